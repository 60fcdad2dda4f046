#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "emodis/backbone/tacotron.hpp"
#include "emodis/corpus/manifest.hpp"
#include "emodis/edm/reference_encoder.hpp"
#include "emodis/trainer/checkpoint.hpp"

namespace emodis::inference {

struct SynthesisRequest {
  corpus::PhoneSequence phones;
  corpus::SpeakerId target_speaker = 0;
  corpus::MelSpectrogram reference_mel;
  double strength_scalar = 1.0;
  // <= 0 selects the default of 10 frames per input phone.
  std::int64_t max_frames = 0;
};

struct SynthesisResult {
  corpus::MelSpectrogram mel;
  torch::Tensor alignments;  // [decoder steps, L]
  std::int64_t stop_step = 0;
  bool truncated = false;
};

inline constexpr double kStopThreshold = 0.5;
inline constexpr std::int64_t kFramesPerPhone = 10;
// Scalars above this are allowed but flagged by the CLI.
inline constexpr double kStrengthWarnAbove = 3.0;

torch::Tensor mel_to_tensor(const corpus::MelSpectrogram& mel);
corpus::MelSpectrogram tensor_to_mel(const torch::Tensor& t);

// Inference-time model: text encoder, decoder, postnet, speaker table and the
// reference-side emotion encoder. Nothing else from the training graph is
// kept, so speaker encoders and classifiers cannot be reached from here.
class Synthesizer {
 public:
  Synthesizer(backbone::Tacotron backbone, edm::ReferenceEncoder emotion_encoder);
  static Synthesizer from_model(trainer::EmoDisModel& model);
  static Synthesizer from_checkpoint(const std::filesystem::path& path);

  // Emotion embedding of a reference mel, multiplied by scalar: [256].
  torch::Tensor extract_emotion_embedding(const corpus::MelSpectrogram& mel, double scalar = 1.0) const;

  SynthesisResult synthesize(const SynthesisRequest& req) const;

  // Names of every parameter reachable from the synthesizer.
  std::vector<std::string> parameter_names() const;

  std::int64_t n_speakers() const { return backbone_->config().n_speakers; }

 private:
  backbone::Tacotron backbone_;
  edm::ReferenceEncoder emotion_encoder_;
};

}  // namespace emodis::inference
