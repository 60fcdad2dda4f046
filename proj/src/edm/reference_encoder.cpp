#include "emodis/edm/reference_encoder.hpp"

#include <stdexcept>

namespace emodis::edm {

namespace {
std::int64_t halved(std::int64_t n) { return (n - 1) / 2 + 1; }  // stride 2, kernel 3, padding 1
}

ReferenceEncoderImpl::ReferenceEncoderImpl(const ReferenceEncoderConfig& cfg) : cfg_(cfg) {
  convs_ = register_module("convs", torch::nn::ModuleList());
  std::int64_t in = 1;
  std::int64_t freq = cfg.mel_channels;
  for (auto out : cfg.conv_channels) {
    convs_->push_back(torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, 3).stride(2).padding(1)));
    in = out;
    freq = halved(freq);
  }
  gru_ = register_module("gru", torch::nn::GRU(torch::nn::GRUOptions(in * freq, cfg.gru_dim).batch_first(true)));
  fc1_ = register_module("fc1", torch::nn::Linear(cfg.gru_dim, cfg.fc_dim));
  fc2_ = register_module("fc2", torch::nn::Linear(cfg.fc_dim, cfg.fc_dim));
  fc3_ = register_module("fc3", torch::nn::Linear(cfg.fc_dim, cfg.embedding_dim));
}

torch::Tensor ReferenceEncoderImpl::forward(const torch::Tensor& mels, const torch::Tensor& lengths) {
  if (mels.size(1) == 0 || (lengths < 1).any().item<bool>()) {
    throw std::invalid_argument("reference encoder needs at least one frame");
  }
  const auto frames = torch::arange(mels.size(1), lengths.options());
  const auto valid = (frames.unsqueeze(0) < lengths.unsqueeze(1)).to(mels.dtype());
  auto x = (mels * valid.unsqueeze(2)).unsqueeze(1);  // [B, 1, T, C]
  auto len = lengths;
  for (const auto& conv : *convs_) {
    x = torch::relu(conv->as<torch::nn::Conv2d>()->forward(x));
    len = torch::floor_divide(len - 1, 2) + 1;
    const auto steps = torch::arange(x.size(2), len.options());
    const auto keep = (steps.unsqueeze(0) < len.unsqueeze(1)).to(x.dtype());
    x = x * keep.view({x.size(0), 1, x.size(2), 1});
  }
  // [B, C', T', F'] -> [B, T', C' * F']
  x = x.permute({0, 2, 1, 3}).flatten(2);
  auto [seq, h] = gru_->forward(x);
  const auto last = (len - 1).view({-1, 1, 1}).expand({seq.size(0), 1, seq.size(2)});
  auto pooled = seq.gather(1, last).squeeze(1);
  auto y = torch::relu(fc1_(pooled));
  y = torch::relu(fc2_(y));
  return fc3_(y);
}

}  // namespace emodis::edm
