#include "emodis/backbone/taco_loss.hpp"

namespace emodis::backbone {

namespace F = torch::nn::functional;

torch::Tensor masked_mel_error(const torch::Tensor& pred, const torch::Tensor& target, const torch::Tensor& mask,
                               LossMode mode) {
  const auto m = mask.unsqueeze(2);
  // where() keeps non-finite padding values out of the sum entirely.
  const auto diff = torch::where(m > 0, pred - target, torch::zeros_like(pred));
  const auto err = mode == LossMode::kMse ? diff * diff : diff.abs();
  return err.sum() / (mask.sum() * pred.size(2));
}

torch::Tensor masked_stop_bce(const torch::Tensor& logits, const torch::Tensor& targets, const torch::Tensor& mask,
                              double pos_weight) {
  const auto safe_logits = torch::where(mask > 0, logits, torch::zeros_like(logits));
  const auto bce = F::binary_cross_entropy_with_logits(
      safe_logits, targets,
      F::BinaryCrossEntropyWithLogitsFuncOptions().reduction(torch::kNone).pos_weight(
          torch::full({1}, pos_weight, logits.options())));
  return (bce * mask).sum() / mask.sum();
}

TacoLossTerms taco_loss(const DecoderOutput& out, const torch::Tensor& target_mel, const torch::Tensor& stop_targets,
                        const torch::Tensor& mask, LossMode mode, double stop_pos_weight) {
  TacoLossTerms t;
  t.mel_before = masked_mel_error(out.mel_before, target_mel, mask, mode);
  t.mel_after = masked_mel_error(out.mel_after, target_mel, mask, mode);
  t.stop = masked_stop_bce(out.stop_logits, stop_targets, mask, stop_pos_weight);
  t.total = t.mel_before + t.mel_after + t.stop;
  return t;
}

}  // namespace emodis::backbone
