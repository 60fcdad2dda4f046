#pragma once

#include <torch/torch.h>

#include "emodis/backbone/config.hpp"
#include "emodis/backbone/gmm_attention.hpp"
#include "emodis/backbone/text_encoder.hpp"

namespace emodis::backbone {

struct DecoderState {
  torch::Tensor attention_h, attention_c;
  torch::Tensor decoder_h, decoder_c;
  torch::Tensor context;  // [B, memory_dim]
  GmmAttentionState attention;
};

struct DecoderStepOutput {
  torch::Tensor frames;       // [B, r, C] (pre-postnet)
  torch::Tensor stop_logits;  // [B, r]
  torch::Tensor alignment;    // [B, L]
  DecoderState state;
};

// Autoregressive decoder. The speaker look-up vector joins the pre-net output
// and the attention context at every step, feeding both recurrent layers.
class DecoderImpl : public torch::nn::Module {
 public:
  explicit DecoderImpl(const BackboneConfig& cfg);

  DecoderState initial_state(std::int64_t batch, const torch::TensorOptions& opts) const;

  DecoderStepOutput step(const torch::Tensor& prev_frame, const torch::Tensor& speaker_vec,
                         const torch::Tensor& memory, const torch::Tensor& memory_mask,
                         const DecoderState& state);

  GmmAttention attention() const { return attention_; }

 private:
  BackboneConfig cfg_;
  PreNet prenet_{nullptr};
  torch::nn::LSTMCell attention_rnn_{nullptr};
  GmmAttention attention_{nullptr};
  torch::nn::LSTMCell decoder_rnn_{nullptr};
  torch::nn::Linear frame_proj_{nullptr};
  torch::nn::Linear stop_proj_{nullptr};
};
TORCH_MODULE(Decoder);

// Five 1-D convolutions predicting a residual added to the decoder output.
// Input/output are [B, T, C].
class PostnetImpl : public torch::nn::Module {
 public:
  explicit PostnetImpl(const BackboneConfig& cfg);
  torch::Tensor forward(const torch::Tensor& mel, const torch::Tensor& lengths);

 private:
  torch::nn::ModuleList convs_;
};
TORCH_MODULE(Postnet);

}  // namespace emodis::backbone
