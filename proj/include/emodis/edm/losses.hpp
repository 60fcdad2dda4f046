#pragma once

#include <string_view>

#include <torch/torch.h>

namespace emodis::edm {

// Batch reduction for the per-item loss terms. kSum keeps the literal
// batch-sum form; kMean keeps loss weights comparable across batch sizes.
enum class Reduction { kMean, kSum };

torch::Tensor reduce(const torch::Tensor& per_item, Reduction reduction);

// -log softmax(logits)[label] per row, reduced over the batch.
torch::Tensor classification_loss(const torch::Tensor& logits, const torch::Tensor& labels,
                                  Reduction reduction = Reduction::kMean);

// Emotion classification loss on e (8 classes).
inline torch::Tensor loss_ec(const torch::Tensor& logits, const torch::Tensor& labels,
                             Reduction reduction = Reduction::kMean) {
  return classification_loss(logits, labels, reduction);
}

// Speaker classification loss on s.
inline torch::Tensor loss_sc(const torch::Tensor& logits, const torch::Tensor& labels,
                             Reduction reduction = Reduction::kMean) {
  return classification_loss(logits, labels, reduction);
}

// sum_i ||s_i^T e_i||_F^2, i.e. the squared dot product of each pair.
torch::Tensor loss_ort(const torch::Tensor& s, const torch::Tensor& e, Reduction reduction = Reduction::kMean);

// Emotion classification of the speaker embedding through gradient reversal:
// the classifier learns normally, the speaker encoder receives -lambda times
// the gradient.
torch::Tensor loss_adv(const torch::Tensor& s, const torch::Tensor& emotion_labels,
                       torch::nn::Linear& emotion_classifier_on_s, double lambda = 1.0,
                       Reduction reduction = Reduction::kMean);

// ||e_ref - e_syn||^2 / dim per item; e_ref is treated as a constant target.
torch::Tensor emotion_matching_loss(const torch::Tensor& e_ref, const torch::Tensor& e_syn,
                                    Reduction reduction = Reduction::kMean);

inline constexpr double kDefaultAlpha = 0.02;
inline constexpr double kDefaultBeta = 0.5;

// L_edm = l_ec + alpha * l_ort + beta * l_sc + (1 - beta) * l_adv, in this
// evaluation order for every scalar type (double or 0-dim tensor).
template <typename T>
T compose_edm_total(const T& l_ec, const T& l_ort, const T& l_sc, const T& l_adv, double alpha, double beta) {
  return l_ec + l_ort * alpha + l_sc * beta + l_adv * (1.0 - beta);
}

struct EdmLosses {
  torch::Tensor l_ec, l_ort, l_sc, l_adv, total;
  double alpha = kDefaultAlpha;
  double beta = kDefaultBeta;

  static EdmLosses compose(torch::Tensor l_ec, torch::Tensor l_ort, torch::Tensor l_sc, torch::Tensor l_adv,
                           double alpha, double beta);
};

// Strength levels used at inference; training always uses scalar 1.
enum class StrengthLevel { kWeak = 1, kMedium = 2, kStrong = 3 };

constexpr double strength_scalar(StrengthLevel level) { return static_cast<double>(level); }
std::string_view strength_name(StrengthLevel level);

torch::Tensor scale_embedding(const torch::Tensor& e, double scalar);

}  // namespace emodis::edm
