#pragma once

#include <torch/torch.h>

namespace emodis::backbone {

// Mixture parameters after one step. mu is carried between steps.
struct GmmAttentionState {
  torch::Tensor mu;      // [B, K], non-decreasing across steps
  torch::Tensor sigma;   // [B, K], > 0
  torch::Tensor weight;  // [B, K], softmax-normalized

  static GmmAttentionState initial(std::int64_t batch, std::int64_t components,
                                   const torch::TensorOptions& opts);
};

// Alignment over memory positions j = 1..L for the given mixture:
// a_j proportional to sum_k w_k exp(-(j - mu_k)^2 / (2 sigma_k^2)),
// renormalized over j < length. Computed in log space so a mixture far from
// every position still yields a normalized row. Returns [B, L].
torch::Tensor gmm_alignment(const torch::Tensor& mu, const torch::Tensor& sigma, const torch::Tensor& weight,
                            const torch::Tensor& memory_mask);

// Monotonic GMM attention: each step adds softplus increments to the means,
// so mu never decreases.
class GmmAttentionImpl : public torch::nn::Module {
 public:
  GmmAttentionImpl(std::int64_t query_dim, std::int64_t hidden_dim, std::int64_t components,
                   double initial_step = 0.3, double initial_sigma = 1.0);

  // memory_mask is [B, L] (1 on valid positions). Returns ([B, L] weights, new state).
  std::pair<torch::Tensor, GmmAttentionState> forward(const torch::Tensor& query,
                                                      const GmmAttentionState& state,
                                                      const torch::Tensor& memory_mask);

  std::int64_t components() const { return components_; }
  torch::nn::Linear projection() const { return out_; }

  static constexpr double kSigmaEpsilon = 1e-3;

 private:
  std::int64_t components_;
  torch::nn::Linear hidden_{nullptr};
  torch::nn::Linear out_{nullptr};
};
TORCH_MODULE(GmmAttention);

}  // namespace emodis::backbone
