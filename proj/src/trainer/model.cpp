#include "emodis/trainer/model.hpp"

#include "emodis/corpus/emotion.hpp"

namespace emodis::trainer {

namespace {
edm::EdmConfig edm_config(const ModelConfig& cfg) {
  edm::EdmConfig e;
  e.encoder = cfg.reference;
  e.n_emotions = corpus::kNumEmotions;
  e.n_speakers = cfg.backbone.n_speakers;
  e.grl_lambda = cfg.grl_lambda;
  return e;
}
}  // namespace

EmoDisModelImpl::EmoDisModelImpl(const ModelConfig& cfg) : cfg_(cfg) {
  backbone_ = register_module("backbone", backbone::Tacotron(cfg.backbone));
  reference_edm_ = register_module("reference_edm", edm::Edm(edm_config(cfg)));
  synthesis_edm_ = register_module("synthesis_edm", edm::Edm(edm_config(cfg)));
}

ModelConfig fit_model_config(ModelConfig cfg, std::int64_t mel_channels, std::int64_t n_speakers) {
  cfg.backbone.mel_channels = mel_channels;
  cfg.backbone.n_speakers = n_speakers;
  cfg.reference.mel_channels = mel_channels;
  cfg.reference.embedding_dim = cfg.backbone.emotion_dim;
  return cfg;
}

}  // namespace emodis::trainer
