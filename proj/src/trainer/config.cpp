#include "emodis/trainer/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace emodis::trainer {

using nlohmann::json;

std::string ablation_name(Ablation a) {
  switch (a) {
    case Ablation::kFull: return "full";
    case Ablation::kWithoutOrt: return "wo_ort";
    case Ablation::kWithout2Ort: return "wo_2ort";
  }
  return "full";
}

Ablation parse_ablation(const std::string& name) {
  if (name == "full") return Ablation::kFull;
  if (name == "wo_ort") return Ablation::kWithoutOrt;
  if (name == "wo_2ort") return Ablation::kWithout2Ort;
  throw std::invalid_argument("unknown ablation '" + name + "'");
}

void TrainConfig::validate() const {
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (bucket_factor < 1) throw std::invalid_argument("bucket_factor must be >= 1");
  if (!(stop_pos_weight > 0.0)) throw std::invalid_argument("stop_pos_weight must be positive");
  if (max_steps < 0) throw std::invalid_argument("max_steps must be >= 0");
  if (warmup_steps < 0) throw std::invalid_argument("warmup_steps must be >= 0");
  if (log_interval < 1 || save_interval < 1) throw std::invalid_argument("intervals must be >= 1");
  if (!(model.grl_lambda >= 0.0)) throw std::invalid_argument("grl_lambda must be >= 0");
}

double TrainConfig::reference_alpha() const { return ablation == Ablation::kFull ? alpha : 0.0; }

void to_json(json& j, const ModelConfig& c) {
  j = json{{"backbone", c.backbone},
           {"reference",
            {{"mel_channels", c.reference.mel_channels},
             {"conv_channels", c.reference.conv_channels},
             {"gru_dim", c.reference.gru_dim},
             {"fc_dim", c.reference.fc_dim},
             {"embedding_dim", c.reference.embedding_dim}}},
           {"grl_lambda", c.grl_lambda}};
}

void from_json(const json& j, ModelConfig& c) {
  c = ModelConfig{};
  if (j.contains("backbone")) c.backbone = j.at("backbone").get<backbone::BackboneConfig>();
  if (j.contains("reference")) {
    const auto& r = j.at("reference");
    c.reference.mel_channels = r.value("mel_channels", c.reference.mel_channels);
    c.reference.conv_channels = r.value("conv_channels", c.reference.conv_channels);
    c.reference.gru_dim = r.value("gru_dim", c.reference.gru_dim);
    c.reference.fc_dim = r.value("fc_dim", c.reference.fc_dim);
    c.reference.embedding_dim = r.value("embedding_dim", c.reference.embedding_dim);
  }
  c.grl_lambda = j.value("grl_lambda", c.grl_lambda);
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"alpha", c.alpha},
           {"beta", c.beta},
           {"ablation", ablation_name(c.ablation)},
           {"learning_rate", c.learning_rate},
           {"warmup_steps", c.warmup_steps},
           {"batch_size", c.batch_size},
           {"max_steps", c.max_steps},
           {"seed", c.seed},
           {"loss_mode", c.loss_mode == backbone::LossMode::kMse ? "mse" : "mae"},
           {"stop_pos_weight", c.stop_pos_weight},
           {"reduction_mode", c.reduction_mode == edm::Reduction::kMean ? "mean" : "sum"},
           {"decoder_adv_backprop", c.decoder_adv_backprop},
           {"grad_clip", c.grad_clip},
           {"bucket_factor", c.bucket_factor},
           {"log_interval", c.log_interval},
           {"save_interval", c.save_interval},
           {"model", c.model}};
}

void from_json(const json& j, TrainConfig& c) {
  static const std::vector<std::string> kKnown = {
      "alpha",      "beta",           "ablation",       "learning_rate",        "warmup_steps",
      "batch_size", "max_steps",      "seed",           "loss_mode",            "reduction_mode",
      "decoder_adv_backprop", "grad_clip",  "bucket_factor",  "log_interval",         "save_interval",
      "stop_pos_weight", "model"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(kKnown.begin(), kKnown.end(), key) == kKnown.end()) {
      throw std::invalid_argument("unknown train config key '" + key + "'");
    }
  }
  c = TrainConfig{};
  c.alpha = j.value("alpha", c.alpha);
  c.beta = j.value("beta", c.beta);
  c.ablation = parse_ablation(j.value("ablation", std::string("full")));
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.warmup_steps = j.value("warmup_steps", c.warmup_steps);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.max_steps = j.value("max_steps", c.max_steps);
  c.seed = j.value("seed", c.seed);
  const auto loss = j.value("loss_mode", std::string("mse"));
  if (loss != "mse" && loss != "mae") throw std::invalid_argument("loss_mode must be mse or mae");
  c.loss_mode = loss == "mse" ? backbone::LossMode::kMse : backbone::LossMode::kMae;
  c.stop_pos_weight = j.value("stop_pos_weight", c.stop_pos_weight);
  const auto red = j.value("reduction_mode", std::string("mean"));
  if (red != "mean" && red != "sum") throw std::invalid_argument("reduction_mode must be mean or sum");
  c.reduction_mode = red == "mean" ? edm::Reduction::kMean : edm::Reduction::kSum;
  c.decoder_adv_backprop = j.value("decoder_adv_backprop", c.decoder_adv_backprop);
  c.grad_clip = j.value("grad_clip", c.grad_clip);
  c.bucket_factor = j.value("bucket_factor", c.bucket_factor);
  c.log_interval = j.value("log_interval", c.log_interval);
  c.save_interval = j.value("save_interval", c.save_interval);
  if (j.contains("model")) c.model = j.at("model").get<ModelConfig>();
  c.validate();
}

std::string TrainConfig::fingerprint() const {
  json j = *this;
  j.erase("max_steps");
  j.erase("log_interval");
  j.erase("save_interval");
  const auto text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open train config: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return json::parse(ss.str()).get<TrainConfig>();
}

void save_train_config(const TrainConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write train config: " + path.string());
  out << json(cfg).dump(2) << '\n';
}

}  // namespace emodis::trainer
