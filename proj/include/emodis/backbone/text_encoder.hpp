#pragma once

#include <vector>

#include <torch/torch.h>

#include "emodis/backbone/config.hpp"

namespace emodis::backbone {

// Zeroes time steps at or beyond each item's length. x is [B, C, T].
torch::Tensor mask_time(const torch::Tensor& x, const torch::Tensor& lengths);

// Stack of ReLU feed-forward layers with dropout that is only active in
// train mode.
class PreNetImpl : public torch::nn::Module {
 public:
  PreNetImpl(std::int64_t in_dim, std::vector<std::int64_t> dims, double dropout);
  torch::Tensor forward(torch::Tensor x);

 private:
  torch::nn::ModuleList layers_;
  double dropout_;
};
TORCH_MODULE(PreNet);

class HighwayImpl : public torch::nn::Module {
 public:
  explicit HighwayImpl(std::int64_t dim);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Linear transform_{nullptr};
  torch::nn::Linear gate_{nullptr};
};
TORCH_MODULE(Highway);

// Convolution bank (widths 1..K) + max-pool + projections + residual +
// highway stack + bidirectional GRU. Input/Output are [B, L, *].
class CbhgImpl : public torch::nn::Module {
 public:
  CbhgImpl(std::int64_t in_dim, std::int64_t bank_size, std::int64_t channels,
           std::int64_t highway_layers, std::int64_t out_dim);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& lengths);

 private:
  std::int64_t channels_;
  torch::nn::ModuleList bank_;
  torch::nn::Conv1d proj1_{nullptr};
  torch::nn::Conv1d proj2_{nullptr};
  torch::nn::ModuleList highways_;
  torch::nn::GRU gru_{nullptr};
};
TORCH_MODULE(Cbhg);

// Symbol embedding + pre-net + CBHG. Produces [B, L, encoder_dim].
class TextEncoderImpl : public torch::nn::Module {
 public:
  explicit TextEncoderImpl(const BackboneConfig& cfg);
  torch::Tensor forward(const torch::Tensor& phones, const torch::Tensor& lengths);

 private:
  torch::nn::Embedding embedding_{nullptr};
  PreNet prenet_{nullptr};
  Cbhg cbhg_{nullptr};
};
TORCH_MODULE(TextEncoder);

}  // namespace emodis::backbone
