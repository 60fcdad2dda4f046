#pragma once

#include <torch/torch.h>

#include "emodis/backbone/tacotron.hpp"

namespace emodis::backbone {

enum class LossMode { kMse, kMae };

// Mean of the element-wise error over real frames: sum(mask * err) / (sum(mask) * C).
// pred/target are [B, T, C], mask is [B, T].
torch::Tensor masked_mel_error(const torch::Tensor& pred, const torch::Tensor& target, const torch::Tensor& mask,
                               LossMode mode);

// Binary cross-entropy on logits averaged over real frames; positive targets
// are weighted by pos_weight.
torch::Tensor masked_stop_bce(const torch::Tensor& logits, const torch::Tensor& targets, const torch::Tensor& mask,
                              double pos_weight = 1.0);

struct TacoLossTerms {
  torch::Tensor mel_before;
  torch::Tensor mel_after;
  torch::Tensor stop;
  torch::Tensor total;
};

TacoLossTerms taco_loss(const DecoderOutput& out, const torch::Tensor& target_mel, const torch::Tensor& stop_targets,
                        const torch::Tensor& mask, LossMode mode = LossMode::kMse, double stop_pos_weight = 1.0);

}  // namespace emodis::backbone
