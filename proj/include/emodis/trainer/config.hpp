#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "emodis/backbone/config.hpp"
#include "emodis/backbone/taco_loss.hpp"
#include "emodis/edm/losses.hpp"
#include "emodis/edm/reference_encoder.hpp"

namespace emodis::trainer {

enum class Ablation {
  kFull,
  kWithoutOrt,   // no orthogonality term on the reference-side EDM
  kWithout2Ort,  // no orthogonality anywhere and no synthesized-side EDM losses
};

std::string ablation_name(Ablation a);
Ablation parse_ablation(const std::string& name);

struct ModelConfig {
  backbone::BackboneConfig backbone;
  edm::ReferenceEncoderConfig reference;
  double grl_lambda = 1.0;

  bool operator==(const ModelConfig& o) const {
    return backbone == o.backbone && reference.mel_channels == o.reference.mel_channels &&
           reference.conv_channels == o.reference.conv_channels && reference.gru_dim == o.reference.gru_dim &&
           reference.fc_dim == o.reference.fc_dim && reference.embedding_dim == o.reference.embedding_dim &&
           grl_lambda == o.grl_lambda;
  }
};

struct TrainConfig {
  double alpha = edm::kDefaultAlpha;
  double beta = edm::kDefaultBeta;
  Ablation ablation = Ablation::kFull;
  double learning_rate = 1e-3;
  std::int64_t warmup_steps = 500;
  std::int64_t batch_size = 16;
  // Batches per length-sorted pool; 1 disables bucketing.
  std::int64_t bucket_factor = 8;
  std::int64_t max_steps = 5000;
  std::uint64_t seed = 1;
  backbone::LossMode loss_mode = backbone::LossMode::kMse;
  // Weight of the positive stop targets (one per utterance).
  double stop_pos_weight = 3.0;
  edm::Reduction reduction_mode = edm::Reduction::kMean;
  // Decoder-side speaker branch (l_sc, l_adv, the s side of l_ort) sees a
  // detached copy of the predicted mel unless set.
  bool decoder_adv_backprop = false;
  double grad_clip = 1.0;
  std::int64_t log_interval = 1;
  std::int64_t save_interval = 1000;
  ModelConfig model;

  // Throws std::invalid_argument (alpha < 0, beta outside [0, 1], ...).
  void validate() const;

  // Encoder-side and decoder-side orthogonality weights after the ablation.
  double reference_alpha() const;
  bool synthesized_edm_enabled() const { return ablation != Ablation::kWithout2Ort; }

  // FNV-1a hash of the canonical JSON of every field that changes the
  // trained function (run-length and logging fields excluded).
  std::string fingerprint() const;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

TrainConfig load_train_config(const std::filesystem::path& path);
void save_train_config(const TrainConfig& cfg, const std::filesystem::path& path);

}  // namespace emodis::trainer
