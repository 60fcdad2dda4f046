#include "emodis/trainer/checkpoint.hpp"

#include <stdexcept>

namespace emodis::trainer {

void save_checkpoint(const std::filesystem::path& path, EmoDisModel& model, const TrainConfig& config,
                     std::int64_t step, torch::optim::Optimizer* optimizer) {
  torch::serialize::OutputArchive archive;
  archive.write("format_version", c10::IValue(kCheckpointVersion));
  archive.write("config", c10::IValue(nlohmann::json(config).dump()));
  archive.write("fingerprint", c10::IValue(config.fingerprint()));
  archive.write("step", c10::IValue(step));

  torch::serialize::OutputArchive params;
  for (const auto& item : model->named_parameters()) params.write(item.key(), item.value());
  for (const auto& item : model->named_buffers()) params.write(item.key(), item.value(), /*is_buffer=*/true);
  archive.write("model", params);

  archive.write("has_optimizer", c10::IValue(optimizer != nullptr));
  if (optimizer != nullptr) {
    torch::serialize::OutputArchive opt;
    optimizer->save(opt);
    archive.write("optimizer", opt);
  }

  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  archive.save_to(tmp.string());
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const std::optional<TrainConfig>& expected) {
  if (!std::filesystem::exists(path)) throw std::runtime_error("checkpoint not found: " + path.string());
  torch::serialize::InputArchive archive;
  try {
    archive.load_from(path.string());
  } catch (const c10::Error& e) {
    throw std::runtime_error("unreadable checkpoint " + path.string() + ": " + e.what_without_backtrace());
  }

  c10::IValue v;
  if (!archive.try_read("format_version", v) || !v.isInt()) {
    throw std::runtime_error("checkpoint " + path.string() + " has no version tag");
  }
  if (v.toInt() != kCheckpointVersion) {
    throw std::runtime_error("checkpoint version mismatch: file has " + std::to_string(v.toInt()) + ", expected " +
                             std::to_string(kCheckpointVersion));
  }

  Checkpoint ck;
  archive.read("config", v);
  ck.config = nlohmann::json::parse(v.toStringRef()).get<TrainConfig>();
  archive.read("fingerprint", v);
  ck.fingerprint = v.toStringRef();
  archive.read("step", v);
  ck.step = v.toInt();

  EmoDisModel model(ck.config.model);
  torch::serialize::InputArchive params;
  archive.read("model", params);
  {
    torch::NoGradGuard no_grad;
    for (auto& item : model->named_parameters()) {
      torch::Tensor t;
      params.read(item.key(), t);
      item.value().copy_(t);
    }
    for (auto& item : model->named_buffers()) {
      torch::Tensor t;
      params.read(item.key(), t, /*is_buffer=*/true);
      item.value().copy_(t);
    }
  }
  ck.model = model;

  archive.read("has_optimizer", v);
  if (v.toBool()) {
    torch::serialize::InputArchive opt;
    archive.read("optimizer", opt);
    ck.optimizer_state = std::move(opt);
  }

  if (ck.fingerprint != ck.config.fingerprint()) {
    ck.warnings.push_back("stored fingerprint does not match the stored config");
  }
  if (expected && expected->fingerprint() != ck.fingerprint) {
    ck.warnings.push_back("config fingerprint " + expected->fingerprint() + " differs from checkpoint fingerprint " +
                          ck.fingerprint);
  }
  return ck;
}

}  // namespace emodis::trainer
