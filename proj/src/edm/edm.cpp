#include "emodis/edm/edm.hpp"

#include "emodis/edm/grl.hpp"

namespace emodis::edm {

EdmImpl::EdmImpl(const EdmConfig& cfg) : cfg_(cfg) {
  const auto dim = cfg.encoder.embedding_dim;
  emotion_encoder_ = register_module("emotion_encoder", ReferenceEncoder(cfg.encoder));
  speaker_encoder_ = register_module("speaker_encoder", ReferenceEncoder(cfg.encoder));
  emotion_classifier_ = register_module("emotion_classifier", torch::nn::Linear(dim, cfg.n_emotions));
  speaker_classifier_ = register_module("speaker_classifier", torch::nn::Linear(dim, cfg.n_speakers));
  adversarial_classifier_ = register_module("adversarial_classifier", torch::nn::Linear(dim, cfg.n_emotions));
}

torch::Tensor EdmImpl::emotion_encode(const torch::Tensor& mels, const torch::Tensor& lengths) {
  return emotion_encoder_(mels, lengths);
}

torch::Tensor EdmImpl::speaker_encode(const torch::Tensor& mels, const torch::Tensor& lengths) {
  namespace F = torch::nn::functional;
  return F::normalize(speaker_encoder_(mels, lengths), F::NormalizeFuncOptions().dim(1));
}

EdmForward EdmImpl::forward(const torch::Tensor& mels, const torch::Tensor& lengths,
                            const std::optional<torch::Tensor>& speaker_mels) {
  EdmForward out;
  out.e = emotion_encode(mels, lengths);
  out.s = speaker_encode(speaker_mels ? *speaker_mels : mels, lengths);
  out.emotion_logits = emotion_classifier_(out.e);
  out.speaker_logits = speaker_classifier_(out.s);
  out.adversarial_logits = adversarial_classifier_(grl_forward(out.s, cfg_.grl_lambda));
  return out;
}

EdmLosses EdmImpl::losses(const EdmForward& fwd, const torch::Tensor& emotion_labels,
                          const torch::Tensor& speaker_labels, double alpha, double beta, Reduction reduction) const {
  return EdmLosses::compose(loss_ec(fwd.emotion_logits, emotion_labels, reduction), loss_ort(fwd.s, fwd.e, reduction),
                            loss_sc(fwd.speaker_logits, speaker_labels, reduction),
                            classification_loss(fwd.adversarial_logits, emotion_labels, reduction), alpha, beta);
}

}  // namespace emodis::edm
