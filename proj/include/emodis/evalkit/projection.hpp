#pragma once

#include <array>
#include <cstdint>
#include <string>

#include <torch/torch.h>

namespace emodis::evalkit {

struct Projection {
  torch::Tensor coords;                    // [N, 2] float64
  std::array<double, 2> explained{};       // variance ratio per axis (PCA only)
  std::string warning;                     // set for degenerate input
};

// Principal-component projection to 2D. Each component is signed so that its
// largest-magnitude coordinate is positive. Needs at least 3 rows; all-equal
// rows give zero coordinates and a warning.
Projection project_embeddings_2d(const torch::Tensor& embeddings);

// Exact t-SNE (PCA initialisation, fixed iteration schedule). Figure parity
// only; deterministic for a given input.
Projection project_tsne(const torch::Tensor& embeddings, double perplexity = 30.0, int iterations = 500);

}  // namespace emodis::evalkit
