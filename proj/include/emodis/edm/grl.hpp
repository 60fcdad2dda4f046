#pragma once

#include <torch/torch.h>

namespace emodis::edm {

// Identity in the forward pass; multiplies the incoming gradient by -lambda
// in the backward pass.
struct GradientReversal : public torch::autograd::Function<GradientReversal> {
  static torch::Tensor forward(torch::autograd::AutogradContext* ctx, const torch::Tensor& x, double lambda);
  static torch::autograd::variable_list backward(torch::autograd::AutogradContext* ctx,
                                                 torch::autograd::variable_list grad_outputs);
};

// Throws std::invalid_argument for negative lambda.
torch::Tensor grl_forward(const torch::Tensor& x, double lambda = 1.0);

}  // namespace emodis::edm
