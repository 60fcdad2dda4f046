#include "emodis/edm/grl.hpp"

#include <stdexcept>

namespace emodis::edm {

torch::Tensor GradientReversal::forward(torch::autograd::AutogradContext* ctx, const torch::Tensor& x,
                                        double lambda) {
  ctx->saved_data["lambda"] = lambda;
  return x.clone();
}

torch::autograd::variable_list GradientReversal::backward(torch::autograd::AutogradContext* ctx,
                                                          torch::autograd::variable_list grad_outputs) {
  const double lambda = ctx->saved_data["lambda"].toDouble();
  return {grad_outputs[0] * -lambda, torch::Tensor()};
}

torch::Tensor grl_forward(const torch::Tensor& x, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("GRL lambda must be >= 0");
  return GradientReversal::apply(x, lambda);
}

}  // namespace emodis::edm
