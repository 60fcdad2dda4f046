#include "emodis/backbone/decoder.hpp"

namespace emodis::backbone {

DecoderImpl::DecoderImpl(const BackboneConfig& cfg) : cfg_(cfg) {
  prenet_ = register_module(
      "prenet", PreNet(cfg.mel_channels, std::vector<std::int64_t>{cfg.decoder_prenet_dim, cfg.decoder_prenet_dim},
                       cfg.dropout));
  const auto memory_dim = cfg.memory_dim();
  attention_rnn_ = register_module(
      "attention_rnn",
      torch::nn::LSTMCell(cfg.decoder_prenet_dim + memory_dim + cfg.speaker_table_dim, cfg.attention_rnn_dim));
  attention_ = register_module("attention",
                               GmmAttention(cfg.attention_rnn_dim, cfg.attention_hidden_dim, cfg.gmm_components));
  decoder_rnn_ = register_module(
      "decoder_rnn",
      torch::nn::LSTMCell(cfg.attention_rnn_dim + memory_dim + cfg.speaker_table_dim, cfg.decoder_rnn_dim));
  frame_proj_ = register_module("frame_proj",
                                torch::nn::Linear(cfg.decoder_rnn_dim + memory_dim, cfg.reduction * cfg.mel_channels));
  stop_proj_ = register_module("stop_proj", torch::nn::Linear(cfg.decoder_rnn_dim + memory_dim, cfg.reduction));
}

DecoderState DecoderImpl::initial_state(std::int64_t batch, const torch::TensorOptions& opts) const {
  DecoderState s;
  s.attention_h = torch::zeros({batch, cfg_.attention_rnn_dim}, opts);
  s.attention_c = torch::zeros({batch, cfg_.attention_rnn_dim}, opts);
  s.decoder_h = torch::zeros({batch, cfg_.decoder_rnn_dim}, opts);
  s.decoder_c = torch::zeros({batch, cfg_.decoder_rnn_dim}, opts);
  s.context = torch::zeros({batch, cfg_.memory_dim()}, opts);
  s.attention = GmmAttentionState::initial(batch, cfg_.gmm_components, opts);
  return s;
}

DecoderStepOutput DecoderImpl::step(const torch::Tensor& prev_frame, const torch::Tensor& speaker_vec,
                                    const torch::Tensor& memory, const torch::Tensor& memory_mask,
                                    const DecoderState& state) {
  const auto pre = prenet_(prev_frame);
  auto [ah, ac] = attention_rnn_(torch::cat({pre, state.context, speaker_vec}, 1),
                                 std::make_tuple(state.attention_h, state.attention_c));
  auto [alignment, att_state] = attention_(ah, state.attention, memory_mask);
  const auto context = torch::bmm(alignment.unsqueeze(1), memory).squeeze(1);
  auto [dh, dc] = decoder_rnn_(torch::cat({ah, context, speaker_vec}, 1),
                               std::make_tuple(state.decoder_h, state.decoder_c));
  const auto proj_in = torch::cat({dh, context}, 1);

  DecoderStepOutput out;
  out.frames = frame_proj_(proj_in).view({-1, cfg_.reduction, cfg_.mel_channels});
  out.stop_logits = stop_proj_(proj_in);
  out.alignment = alignment;
  out.state = {ah, ac, dh, dc, context, att_state};
  return out;
}

PostnetImpl::PostnetImpl(const BackboneConfig& cfg) {
  convs_ = register_module("convs", torch::nn::ModuleList());
  const auto pad = cfg.postnet_kernel / 2;
  for (std::int64_t i = 0; i < cfg.postnet_layers; ++i) {
    const auto in = i == 0 ? cfg.mel_channels : cfg.postnet_channels;
    const auto out = i + 1 == cfg.postnet_layers ? cfg.mel_channels : cfg.postnet_channels;
    convs_->push_back(torch::nn::Conv1d(torch::nn::Conv1dOptions(in, out, cfg.postnet_kernel).padding(pad)));
  }
}

torch::Tensor PostnetImpl::forward(const torch::Tensor& mel, const torch::Tensor& lengths) {
  auto x = mask_time(mel.transpose(1, 2), lengths);
  const auto n = convs_->size();
  for (std::size_t i = 0; i < n; ++i) {
    x = convs_[i]->as<torch::nn::Conv1d>()->forward(x);
    if (i + 1 < n) x = torch::tanh(x);
    x = mask_time(x, lengths);
  }
  return x.transpose(1, 2);
}

}  // namespace emodis::backbone
