#pragma once

#include <torch/torch.h>

#include "emodis/backbone/tacotron.hpp"
#include "emodis/edm/edm.hpp"
#include "emodis/trainer/config.hpp"

namespace emodis::trainer {

// Backbone plus the two unshared EDM instances: one on the reference mel
// (its emotion encoder conditions the text encoder output) and one on the
// synthesized mel.
class EmoDisModelImpl : public torch::nn::Module {
 public:
  explicit EmoDisModelImpl(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }

  backbone::Tacotron backbone() const { return backbone_; }
  edm::Edm reference_edm() const { return reference_edm_; }
  edm::Edm synthesis_edm() const { return synthesis_edm_; }

 private:
  ModelConfig cfg_;
  backbone::Tacotron backbone_{nullptr};
  edm::Edm reference_edm_{nullptr};
  edm::Edm synthesis_edm_{nullptr};
};
TORCH_MODULE(EmoDisModel);

// Model sizes for a corpus: copies channel and speaker counts into cfg.
ModelConfig fit_model_config(ModelConfig cfg, std::int64_t mel_channels, std::int64_t n_speakers);

}  // namespace emodis::trainer
