#pragma once

#include <torch/torch.h>

namespace emodis::edm {

struct ReferenceEncoderConfig {
  std::int64_t mel_channels = 80;
  std::vector<std::int64_t> conv_channels{32, 32, 64, 64, 128, 128};
  std::int64_t gru_dim = 128;
  std::int64_t fc_dim = 256;
  std::int64_t embedding_dim = 256;
};

// Six stride-2 3x3 convolutions over (time, frequency), a GRU whose state at
// each item's last valid step is kept, then three feed-forward layers.
// Padded frames are zeroed after every convolution, so an item's embedding
// does not depend on how much padding its batch carries.
class ReferenceEncoderImpl : public torch::nn::Module {
 public:
  explicit ReferenceEncoderImpl(const ReferenceEncoderConfig& cfg = {});

  // mels [B, T, C], lengths [B] -> [B, embedding_dim]
  torch::Tensor forward(const torch::Tensor& mels, const torch::Tensor& lengths);

 private:
  ReferenceEncoderConfig cfg_;
  torch::nn::ModuleList convs_;
  torch::nn::GRU gru_{nullptr};
  torch::nn::Linear fc1_{nullptr}, fc2_{nullptr}, fc3_{nullptr};
};
TORCH_MODULE(ReferenceEncoder);

}  // namespace emodis::edm
