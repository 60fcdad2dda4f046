#include "emodis/evalkit/projection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace emodis::evalkit {

namespace {

constexpr double kDegenerateVariance = 1e-12;

void check_input(const torch::Tensor& x) {
  if (x.dim() != 2) throw std::invalid_argument("embeddings must be [N, D]");
  if (x.size(0) < 3) throw std::invalid_argument("projection needs at least 3 embeddings");
}

}  // namespace

Projection project_embeddings_2d(const torch::Tensor& embeddings) {
  check_input(embeddings);
  torch::NoGradGuard no_grad;
  const auto x = embeddings.detach().to(torch::kFloat64);
  const auto centered = x - x.mean(0, true);
  Projection p;
  p.coords = torch::zeros({x.size(0), 2}, torch::kFloat64);
  const double total = centered.pow(2).sum().item<double>();
  if (total <= kDegenerateVariance) {
    p.warning = "all embeddings are identical; projection is zero";
    return p;
  }
  const auto svd = torch::linalg_svd(centered, false);
  const auto& s = std::get<1>(svd);
  const auto& vh = std::get<2>(svd);
  const auto components = std::min<std::int64_t>(2, vh.size(0));
  const auto energy = s.pow(2);
  const double energy_sum = energy.sum().item<double>();
  for (std::int64_t c = 0; c < components; ++c) {
    auto v = vh[c];
    const auto pivot = v.abs().argmax().item<std::int64_t>();
    if (v[pivot].item<double>() < 0.0) v = -v;
    p.coords.select(1, c).copy_(centered.matmul(v));
    p.explained[static_cast<std::size_t>(c)] = energy[c].item<double>() / energy_sum;
  }
  return p;
}

Projection project_tsne(const torch::Tensor& embeddings, double perplexity, int iterations) {
  check_input(embeddings);
  torch::NoGradGuard no_grad;
  const auto x = embeddings.detach().to(torch::kFloat64);
  const auto n = x.size(0);
  perplexity = std::min(perplexity, std::max(1.0, static_cast<double>(n - 1) / 3.0));

  // Conditional affinities with per-row bandwidth found by bisection.
  const auto d2 = torch::cdist(x, x).pow(2);
  auto P = torch::zeros({n, n}, torch::kFloat64);
  const double target = std::log(perplexity);
  for (std::int64_t i = 0; i < n; ++i) {
    auto row = d2[i].clone();
    row[i] = std::numeric_limits<double>::infinity();
    double lo = 0.0, hi = std::numeric_limits<double>::infinity(), beta = 1.0;
    torch::Tensor p;
    for (int it = 0; it < 64; ++it) {
      p = torch::exp(-(row - row.min()) * beta);
      const auto sum = p.sum();
      const double h = (std::log(sum.item<double>()) + beta * ((row - row.min()) * p).nan_to_num(0.0).sum().item<double>() / sum.item<double>());
      p = p / sum;
      if (std::abs(h - target) < 1e-5) break;
      if (h > target) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
    }
    P[i].copy_(p);
  }
  P = (P + P.t()) / (2.0 * static_cast<double>(n));
  P = P.clamp_min(1e-12);

  auto y = project_embeddings_2d(x).coords;
  const auto scale = y.std().item<double>();
  y = scale > 0.0 ? y / scale * 1e-2 : y;
  auto velocity = torch::zeros_like(y);
  auto gains = torch::ones_like(y);
  const double learning_rate = std::max(static_cast<double>(n) / 12.0, 50.0);
  for (int it = 0; it < iterations; ++it) {
    const double exaggeration = it < 100 ? 12.0 : 1.0;
    const double momentum = it < 100 ? 0.5 : 0.8;
    auto num = 1.0 / (1.0 + torch::cdist(y, y).pow(2));
    num.fill_diagonal_(0.0);
    const auto Q = (num / num.sum()).clamp_min(1e-12);
    const auto W = (exaggeration * P - Q) * num;
    const auto grad = 4.0 * (W.sum(1, true) * y - W.matmul(y));
    gains = torch::where((grad > 0) != (velocity > 0), gains + 0.2, gains * 0.8).clamp_min(0.01);
    velocity = momentum * velocity - learning_rate * gains * grad;
    y = y + velocity;
    y = y - y.mean(0, true);
  }
  Projection out;
  out.coords = y;
  return out;
}

}  // namespace emodis::evalkit
