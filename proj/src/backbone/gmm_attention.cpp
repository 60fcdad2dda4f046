#include "emodis/backbone/gmm_attention.hpp"

#include <cmath>
#include <limits>

namespace emodis::backbone {

GmmAttentionState GmmAttentionState::initial(std::int64_t batch, std::int64_t components,
                                             const torch::TensorOptions& opts) {
  return {torch::zeros({batch, components}, opts), torch::ones({batch, components}, opts),
          torch::full({batch, components}, 1.0 / static_cast<double>(components), opts)};
}

torch::Tensor gmm_alignment(const torch::Tensor& mu, const torch::Tensor& sigma, const torch::Tensor& weight,
                            const torch::Tensor& memory_mask) {
  const auto length = memory_mask.size(1);
  const auto positions = torch::arange(1, length + 1, mu.options()).view({1, 1, length});
  const auto diff = positions - mu.unsqueeze(2);          // [B, K, L]
  const auto var = (sigma * sigma).unsqueeze(2);
  const auto log_terms = torch::log(weight).unsqueeze(2) - diff * diff / (2.0 * var);
  auto log_density = torch::logsumexp(log_terms, 1);      // [B, L]
  log_density = log_density.masked_fill(memory_mask <= 0, -std::numeric_limits<float>::infinity());
  return torch::softmax(log_density, 1);
}

GmmAttentionImpl::GmmAttentionImpl(std::int64_t query_dim, std::int64_t hidden_dim, std::int64_t components,
                                   double initial_step, double initial_sigma)
    : components_(components) {
  hidden_ = register_module("hidden", torch::nn::Linear(query_dim, hidden_dim));
  out_ = register_module("out", torch::nn::Linear(hidden_dim, 3 * components));
  // Bias the increment and width heads so softplus starts near the given values.
  torch::NoGradGuard no_grad;
  auto bias = out_->bias;
  bias.narrow(0, components, components).fill_(std::log(std::expm1(initial_step)));
  bias.narrow(0, 2 * components, components).fill_(std::log(std::expm1(initial_sigma)));
}

std::pair<torch::Tensor, GmmAttentionState> GmmAttentionImpl::forward(const torch::Tensor& query,
                                                                      const GmmAttentionState& state,
                                                                      const torch::Tensor& memory_mask) {
  const auto params = out_(torch::tanh(hidden_(query)));
  const auto chunks = params.chunk(3, 1);
  GmmAttentionState next;
  next.weight = torch::softmax(chunks[0], 1);
  next.mu = state.mu + torch::softplus(chunks[1]);
  next.sigma = torch::softplus(chunks[2]) + kSigmaEpsilon;
  auto alignment = gmm_alignment(next.mu, next.sigma, next.weight, memory_mask);
  return {alignment, next};
}

}  // namespace emodis::backbone
