#include "emodis/backbone/text_encoder.hpp"

#include <stdexcept>

namespace emodis::backbone {

namespace F = torch::nn::functional;

torch::Tensor mask_time(const torch::Tensor& x, const torch::Tensor& lengths) {
  const auto steps = torch::arange(x.size(2), lengths.options());
  const auto keep = steps.unsqueeze(0) < lengths.unsqueeze(1);  // [B, T]
  return x * keep.unsqueeze(1).to(x.dtype());
}

PreNetImpl::PreNetImpl(std::int64_t in_dim, std::vector<std::int64_t> dims, double dropout)
    : dropout_(dropout) {
  layers_ = register_module("layers", torch::nn::ModuleList());
  for (auto d : dims) {
    layers_->push_back(torch::nn::Linear(in_dim, d));
    in_dim = d;
  }
}

torch::Tensor PreNetImpl::forward(torch::Tensor x) {
  for (const auto& layer : *layers_) {
    x = torch::relu(layer->as<torch::nn::Linear>()->forward(x));
    x = F::dropout(x, F::DropoutFuncOptions().p(dropout_).training(is_training()));
  }
  return x;
}

HighwayImpl::HighwayImpl(std::int64_t dim) {
  transform_ = register_module("transform", torch::nn::Linear(dim, dim));
  gate_ = register_module("gate", torch::nn::Linear(dim, dim));
  torch::nn::init::constant_(gate_->bias, -1.0);
}

torch::Tensor HighwayImpl::forward(const torch::Tensor& x) {
  const auto h = torch::relu(transform_(x));
  const auto t = torch::sigmoid(gate_(x));
  return h * t + x * (1.0 - t);
}

CbhgImpl::CbhgImpl(std::int64_t in_dim, std::int64_t bank_size, std::int64_t channels,
                   std::int64_t highway_layers, std::int64_t out_dim)
    : channels_(channels) {
  if (out_dim % 2 != 0) throw std::invalid_argument("CBHG output width must be even");
  bank_ = register_module("bank", torch::nn::ModuleList());
  for (std::int64_t k = 1; k <= bank_size; ++k) {
    bank_->push_back(torch::nn::Conv1d(torch::nn::Conv1dOptions(in_dim, channels, k).padding(k / 2)));
  }
  proj1_ = register_module(
      "proj1", torch::nn::Conv1d(torch::nn::Conv1dOptions(bank_size * channels, channels, 3).padding(1)));
  proj2_ = register_module("proj2", torch::nn::Conv1d(torch::nn::Conv1dOptions(channels, in_dim, 3).padding(1)));
  highways_ = register_module("highways", torch::nn::ModuleList());
  for (std::int64_t i = 0; i < highway_layers; ++i) highways_->push_back(Highway(in_dim));
  gru_ = register_module(
      "gru", torch::nn::GRU(torch::nn::GRUOptions(in_dim, out_dim / 2).batch_first(true).bidirectional(true)));
}

torch::Tensor CbhgImpl::forward(const torch::Tensor& x, const torch::Tensor& lengths) {
  const auto length = x.size(1);
  auto h = mask_time(x.transpose(1, 2), lengths);  // [B, D, L]
  std::vector<torch::Tensor> outs;
  outs.reserve(bank_->size());
  for (const auto& conv : *bank_) {
    auto y = conv->as<torch::nn::Conv1d>()->forward(h).narrow(2, 0, length);
    outs.push_back(mask_time(torch::relu(y), lengths));
  }
  auto bank = torch::cat(outs, 1);
  // Width-2 max-pool with stride 1; right edge padded by repetition.
  bank = torch::max(bank, torch::cat({bank.narrow(2, 1, length - 1), bank.narrow(2, length - 1, 1)}, 2));
  bank = mask_time(bank, lengths);
  auto p = mask_time(torch::relu(proj1_(bank)), lengths);
  p = mask_time(proj2_(p), lengths);
  auto y = (p + h).transpose(1, 2);  // [B, L, D]
  for (const auto& hw : *highways_) y = hw->as<Highway>()->forward(y);

  auto packed = torch::nn::utils::rnn::pack_padded_sequence(y, lengths.cpu(), /*batch_first=*/true,
                                                            /*enforce_sorted=*/false);
  auto [out_packed, state] = gru_->forward_with_packed_input(packed);
  auto [out, out_lengths] = torch::nn::utils::rnn::pad_packed_sequence(out_packed, /*batch_first=*/true,
                                                                       0.0, length);
  return out;
}

TextEncoderImpl::TextEncoderImpl(const BackboneConfig& cfg) {
  embedding_ = register_module(
      "embedding", torch::nn::Embedding(torch::nn::EmbeddingOptions(cfg.n_symbols, cfg.symbol_dim)
                                            .padding_idx(cfg.n_symbols - 1)));
  prenet_ = register_module("prenet", PreNet(cfg.symbol_dim, std::vector<std::int64_t>{cfg.encoder_prenet_dim, cfg.cbhg_dim}, cfg.dropout));
  cbhg_ = register_module("cbhg", Cbhg(cfg.cbhg_dim, cfg.cbhg_bank_size, cfg.cbhg_dim, cfg.highway_layers,
                                       cfg.encoder_dim));
}

torch::Tensor TextEncoderImpl::forward(const torch::Tensor& phones, const torch::Tensor& lengths) {
  if (phones.size(1) == 0) throw std::invalid_argument("cannot encode an empty phone sequence");
  if ((lengths < 1).any().item<bool>()) throw std::invalid_argument("cannot encode an empty phone sequence");
  return cbhg_(prenet_(embedding_(phones)), lengths);
}

}  // namespace emodis::backbone
