#include "emodis/edm/losses.hpp"

#include <stdexcept>

#include "emodis/edm/grl.hpp"

namespace emodis::edm {

torch::Tensor reduce(const torch::Tensor& per_item, Reduction reduction) {
  return reduction == Reduction::kMean ? per_item.mean() : per_item.sum();
}

torch::Tensor classification_loss(const torch::Tensor& logits, const torch::Tensor& labels, Reduction reduction) {
  if (logits.size(0) != labels.size(0)) throw std::invalid_argument("logits and labels differ in batch size");
  const auto nll = -torch::log_softmax(logits, 1).gather(1, labels.view({-1, 1})).squeeze(1);
  return reduce(nll, reduction);
}

torch::Tensor loss_ort(const torch::Tensor& s, const torch::Tensor& e, Reduction reduction) {
  if (s.sizes() != e.sizes()) throw std::invalid_argument("speaker and emotion batches differ in shape");
  const auto dot = (s * e).sum(1);
  return reduce(dot * dot, reduction);
}

torch::Tensor loss_adv(const torch::Tensor& s, const torch::Tensor& emotion_labels,
                       torch::nn::Linear& emotion_classifier_on_s, double lambda, Reduction reduction) {
  return classification_loss(emotion_classifier_on_s(grl_forward(s, lambda)), emotion_labels, reduction);
}

torch::Tensor emotion_matching_loss(const torch::Tensor& e_ref, const torch::Tensor& e_syn, Reduction reduction) {
  if (e_ref.sizes() != e_syn.sizes()) throw std::invalid_argument("embedding shapes differ");
  const auto diff = e_syn - e_ref.detach();
  return reduce((diff * diff).mean(1), reduction);
}

EdmLosses EdmLosses::compose(torch::Tensor l_ec, torch::Tensor l_ort, torch::Tensor l_sc, torch::Tensor l_adv,
                             double alpha, double beta) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  EdmLosses out;
  out.total = compose_edm_total(l_ec, l_ort, l_sc, l_adv, alpha, beta);
  out.l_ec = std::move(l_ec);
  out.l_ort = std::move(l_ort);
  out.l_sc = std::move(l_sc);
  out.l_adv = std::move(l_adv);
  out.alpha = alpha;
  out.beta = beta;
  return out;
}

std::string_view strength_name(StrengthLevel level) {
  switch (level) {
    case StrengthLevel::kWeak: return "weak";
    case StrengthLevel::kMedium: return "medium";
    case StrengthLevel::kStrong: return "strong";
  }
  return "unknown";
}

torch::Tensor scale_embedding(const torch::Tensor& e, double scalar) {
  if (!(scalar >= 0.0)) throw std::invalid_argument("emotion scalar must be >= 0");
  return e * scalar;
}

}  // namespace emodis::edm
