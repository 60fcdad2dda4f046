#pragma once

#include <torch/torch.h>

#include "emodis/backbone/config.hpp"
#include "emodis/backbone/decoder.hpp"
#include "emodis/backbone/text_encoder.hpp"

namespace emodis::backbone {

struct DecoderOutput {
  torch::Tensor mel_before;   // [B, T, C]
  torch::Tensor mel_after;    // [B, T, C]
  torch::Tensor stop_logits;  // [B, T]
  torch::Tensor alignments;   // [B, T, L]; decoder-step rows repeated r times
  torch::Tensor means;        // [B, T / r, K] attention means per decoder step
};

struct InferenceOutput {
  torch::Tensor mel;         // [T, C]
  torch::Tensor alignments;  // [steps, L]
  std::int64_t stop_step = 0;
  bool truncated = false;
};

// Concatenates (scalar * e) to every encoder state: [B, L, D] + [B, E] -> [B, L, D + E].
torch::Tensor condition_on_emotion(const torch::Tensor& states, const torch::Tensor& emotion, double scalar);

// Tacotron-style acoustic model with a CBHG text encoder, GMM attention and a
// speaker look-up table feeding the decoder.
class TacotronImpl : public torch::nn::Module {
 public:
  explicit TacotronImpl(const BackboneConfig& cfg);

  const BackboneConfig& config() const { return cfg_; }

  torch::Tensor encode_text(const torch::Tensor& phones, const torch::Tensor& lengths);
  torch::Tensor speaker_vectors(const torch::Tensor& speaker_ids);

  // Ground-truth previous frames drive every decoder step. target_mels is
  // [B, T, C] with T a multiple of the reduction factor.
  DecoderOutput forward_teacher_forced(const torch::Tensor& phones, const torch::Tensor& phone_lengths,
                                       const torch::Tensor& target_mels, const torch::Tensor& mel_lengths,
                                       const torch::Tensor& emotion, const torch::Tensor& speaker_ids,
                                       double scalar = 1.0);

  // Free-running decoding of a single utterance until a stop probability
  // exceeds the threshold or max_frames is reached.
  InferenceOutput infer(const torch::Tensor& phones, const torch::Tensor& emotion, std::int64_t speaker_id,
                        double scalar, std::int64_t max_frames, double stop_threshold = 0.5);

  TextEncoder text_encoder() const { return encoder_; }
  Decoder decoder() const { return decoder_; }
  Postnet postnet() const { return postnet_; }
  torch::nn::Embedding speaker_table() const { return speaker_table_; }

 private:
  BackboneConfig cfg_;
  TextEncoder encoder_{nullptr};
  Decoder decoder_{nullptr};
  Postnet postnet_{nullptr};
  torch::nn::Embedding speaker_table_{nullptr};
};
TORCH_MODULE(Tacotron);

}  // namespace emodis::backbone
