#include "emodis/trainer/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "emodis/corpus/batching.hpp"
#include "emodis/trainer/objective.hpp"
#include "emodis/util/random.hpp"

namespace emodis::trainer {

std::filesystem::path RunLayout::step_checkpoint(std::int64_t step) const {
  char name[32];
  std::snprintf(name, sizeof name, "step_%07lld.pt", static_cast<long long>(step));
  return checkpoints() / name;
}

double scheduled_learning_rate(const TrainConfig& cfg, std::int64_t step) {
  if (cfg.warmup_steps == 0) return cfg.learning_rate;
  const double ramp = static_cast<double>(step + 1) / static_cast<double>(cfg.warmup_steps);
  return cfg.learning_rate * std::min(1.0, ramp);
}

namespace {

void set_learning_rate(torch::optim::Adam& opt, double lr) {
  for (auto& group : opt.param_groups()) static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const corpus::CorpusManifest& manifest,
                  const std::vector<corpus::MelSpectrogram>& mels, const std::filesystem::path& out_dir,
                  const TrainOptions& options) {
  cfg.validate();
  // Gaussian attention tails underflow into denormals, which are slow on CPU.
  at::globalContext().setFlushDenormal(true);
  if (mels.size() != manifest.utterances.size()) throw std::invalid_argument("feature count differs from manifest");
  const RunLayout run{out_dir};
  std::filesystem::create_directories(run.checkpoints());
  save_train_config(cfg, run.config());
  if (options.manifest_path) {
    std::ofstream(run.manifest_ref(), std::ios::trunc) << std::filesystem::absolute(*options.manifest_path).string()
                                                       << '\n';
  }

  TrainResult result;
  EmoDisModel model{nullptr};
  std::int64_t step = 0;
  std::optional<torch::serialize::InputArchive> optimizer_state;
  if (options.resume_from) {
    auto ck = load_checkpoint(*options.resume_from, cfg);
    result.warnings = ck.warnings;
    model = ck.model;
    step = ck.step;
    optimizer_state = std::move(ck.optimizer_state);
  } else {
    torch::manual_seed(cfg.seed);
    model = EmoDisModel(fit_model_config(cfg.model, manifest.feature_config.mel_channels,
                                         static_cast<std::int64_t>(manifest.speakers.size())));
  }
  const auto& mc = model->config();
  if (mc.backbone.mel_channels != manifest.feature_config.mel_channels ||
      mc.backbone.n_speakers != static_cast<std::int64_t>(manifest.speakers.size())) {
    throw std::invalid_argument("model shape does not match the corpus");
  }

  torch::optim::Adam optimizer(model->parameters(), torch::optim::AdamOptions(cfg.learning_rate));
  if (optimizer_state) optimizer.load(*optimizer_state);
  // Resumed runs reseed from the step so dropout masks stay a function of (seed, step).
  if (options.resume_from) torch::manual_seed(util::mix_seed(cfg.seed, static_cast<std::uint64_t>(step)));

  std::vector<std::size_t> items(manifest.utterances.size());
  std::iota(items.begin(), items.end(), std::size_t{0});
  corpus::BatchStream stream(manifest, mels, items, cfg.batch_size, util::mix_seed(cfg.seed, 0x62617463ULL),
                             mc.backbone.reduction, cfg.bucket_factor);
  stream.seek(step);
  if (stream.undersized()) result.warnings.push_back("batch_size exceeds corpus size; using one smaller batch");

  std::ofstream metrics(run.metrics(), options.resume_from ? std::ios::app : std::ios::trunc);
  if (!metrics) throw std::runtime_error("cannot write metrics log in " + out_dir.string());

  if (step == 0) save_checkpoint(run.step_checkpoint(0), model, cfg, 0, &optimizer);
  std::filesystem::path last_good = run.step_checkpoint(step);
  if (options.resume_from) last_good = *options.resume_from;

  model->train();
  while (step < cfg.max_steps) {
    const auto batch = stream.next();
    set_learning_rate(optimizer, scheduled_learning_rate(cfg, step));
    optimizer.zero_grad();
    auto fwd = total_loss(model, batch, cfg);
    fwd.losses.step = step + 1;
    const double total = fwd.losses.total.item<double>();
    if (!std::isfinite(total)) {
      result.diverged = true;
      result.warnings.push_back("non-finite loss at step " + std::to_string(step + 1) + "; training aborted");
      break;
    }
    fwd.losses.total.backward();
    if (cfg.grad_clip > 0.0) torch::nn::utils::clip_grad_norm_(model->parameters(), cfg.grad_clip);
    optimizer.step();
    ++step;

    if (step % cfg.log_interval == 0) {
      auto rec = fwd.losses.to_record();
      rec["lr"] = scheduled_learning_rate(cfg, step - 1);
      metrics << rec.dump() << '\n';
      metrics.flush();
      if (options.on_log) options.on_log(rec);
      result.metrics.push_back(std::move(rec));
    }
    if (step % cfg.save_interval == 0) {
      last_good = run.step_checkpoint(step);
      save_checkpoint(last_good, model, cfg, step, &optimizer);
    }
  }

  result.final_step = step;
  if (!result.diverged) {
    save_checkpoint(run.latest_checkpoint(), model, cfg, step, &optimizer);
    result.final_checkpoint = run.latest_checkpoint();
  } else {
    result.final_checkpoint = last_good;
  }
  return result;
}

std::vector<nlohmann::json> read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics log: " + path.string());
  std::vector<nlohmann::json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  }
  return out;
}

}  // namespace emodis::trainer
