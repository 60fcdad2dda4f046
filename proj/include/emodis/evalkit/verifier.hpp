#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <torch/torch.h>

#include <json.hpp>

#include "emodis/corpus/manifest.hpp"

namespace emodis::evalkit {

// Three conv1d layers over the mel, masked mean pooling, a 64-d penultimate
// layer (the verification embedding) and a speaker classifier on top.
class SpeakerVerifierImpl : public torch::nn::Module {
 public:
  SpeakerVerifierImpl(std::int64_t mel_channels, std::int64_t n_speakers);

  torch::Tensor embed(const torch::Tensor& mels, const torch::Tensor& lengths);  // [B, 64]
  torch::Tensor forward(const torch::Tensor& mels, const torch::Tensor& lengths);  // logits [B, N]

 private:
  torch::nn::Conv1d conv1_{nullptr}, conv2_{nullptr}, conv3_{nullptr};
  torch::nn::Linear hidden_{nullptr}, out_{nullptr};
};
TORCH_MODULE(SpeakerVerifier);

inline constexpr double kVerifierMinAccuracy = 0.95;

struct VerifierReport {
  double heldout_accuracy = 0.0;
  std::int64_t n_train = 0;
  std::int64_t n_heldout = 0;
  std::int64_t steps = 0;

  nlohmann::json to_json() const;
};

class Verifier {
 public:
  Verifier() = default;

  // Trains on an 80/20 speaker-stratified split of the corpus.
  static Verifier train(const corpus::CorpusManifest& manifest, const std::vector<corpus::MelSpectrogram>& mels,
                        std::uint64_t seed, std::int64_t epochs = 3);

  bool trained() const { return trained_; }
  bool usable() const { return trained_ && report_.heldout_accuracy >= kVerifierMinAccuracy; }
  const VerifierReport& report() const { return report_; }

  // Verification embeddings [N, 64]. Throws std::logic_error when untrained.
  torch::Tensor embed(const std::vector<corpus::MelSpectrogram>& mels) const;
  torch::Tensor embed(const std::vector<const corpus::MelSpectrogram*>& mels) const;

 private:
  SpeakerVerifier net_{nullptr};
  VerifierReport report_;
  bool trained_ = false;
};

}  // namespace emodis::evalkit
