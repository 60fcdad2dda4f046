#pragma once

#include <optional>

#include <torch/torch.h>

#include "emodis/edm/losses.hpp"
#include "emodis/edm/reference_encoder.hpp"

namespace emodis::edm {

struct EdmConfig {
  ReferenceEncoderConfig encoder;
  std::int64_t n_emotions = 8;
  std::int64_t n_speakers = 3;
  double grl_lambda = 1.0;
};

struct EdmForward {
  torch::Tensor e;                   // emotion embeddings [B, 256]
  torch::Tensor s;                   // speaker embeddings [B, 256]
  torch::Tensor emotion_logits;      // [B, 8]
  torch::Tensor speaker_logits;      // [B, N]
  torch::Tensor adversarial_logits;  // emotion classifier on grl(s) [B, 8]
};

// Emotion encoder + speaker encoder with their classifiers. Two instances
// (reference side and synthesized side) never share parameters.
class EdmImpl : public torch::nn::Module {
 public:
  explicit EdmImpl(const EdmConfig& cfg);

  torch::Tensor emotion_encode(const torch::Tensor& mels, const torch::Tensor& lengths);
  // Unit-norm: the adversarial branch would otherwise grow |s| without bound.
  torch::Tensor speaker_encode(const torch::Tensor& mels, const torch::Tensor& lengths);

  // When speaker_mels is given, the speaker branch (s, its classifier and the
  // adversarial head) runs on it instead of mels (used to stop its gradient
  // at the synthesized mel).
  EdmForward forward(const torch::Tensor& mels, const torch::Tensor& lengths,
                     const std::optional<torch::Tensor>& speaker_mels = std::nullopt);

  EdmLosses losses(const EdmForward& fwd, const torch::Tensor& emotion_labels, const torch::Tensor& speaker_labels,
                   double alpha, double beta, Reduction reduction = Reduction::kMean) const;

  ReferenceEncoder emotion_encoder() const { return emotion_encoder_; }
  ReferenceEncoder speaker_encoder() const { return speaker_encoder_; }
  torch::nn::Linear emotion_classifier() const { return emotion_classifier_; }
  torch::nn::Linear speaker_classifier() const { return speaker_classifier_; }
  torch::nn::Linear adversarial_classifier() const { return adversarial_classifier_; }
  const EdmConfig& config() const { return cfg_; }

 private:
  EdmConfig cfg_;
  ReferenceEncoder emotion_encoder_{nullptr};
  ReferenceEncoder speaker_encoder_{nullptr};
  torch::nn::Linear emotion_classifier_{nullptr};
  torch::nn::Linear speaker_classifier_{nullptr};
  torch::nn::Linear adversarial_classifier_{nullptr};
};
TORCH_MODULE(Edm);

}  // namespace emodis::edm
