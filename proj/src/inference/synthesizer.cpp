#include "emodis/inference/synthesizer.hpp"

#include <cmath>
#include <stdexcept>

#include "emodis/edm/losses.hpp"

namespace emodis::inference {

torch::Tensor mel_to_tensor(const corpus::MelSpectrogram& mel) {
  return torch::from_blob(const_cast<float*>(mel.data().data()), {mel.frames(), mel.channels()}, torch::kFloat32)
      .clone();
}

corpus::MelSpectrogram tensor_to_mel(const torch::Tensor& t) {
  const auto c = t.detach().to(torch::kFloat32).contiguous();
  std::vector<float> data(c.data_ptr<float>(), c.data_ptr<float>() + c.numel());
  return corpus::MelSpectrogram(c.size(0), c.size(1), std::move(data));
}

Synthesizer::Synthesizer(backbone::Tacotron backbone, edm::ReferenceEncoder emotion_encoder)
    : backbone_(std::move(backbone)), emotion_encoder_(std::move(emotion_encoder)) {
  backbone_->eval();
  emotion_encoder_->eval();
}

Synthesizer Synthesizer::from_model(trainer::EmoDisModel& model) {
  return Synthesizer(model->backbone(), model->reference_edm()->emotion_encoder());
}

Synthesizer Synthesizer::from_checkpoint(const std::filesystem::path& path) {
  auto ck = trainer::load_checkpoint(path);
  return from_model(ck.model);
}

torch::Tensor Synthesizer::extract_emotion_embedding(const corpus::MelSpectrogram& mel, double scalar) const {
  if (mel.empty()) throw std::invalid_argument("reference mel has no frames");
  torch::NoGradGuard no_grad;
  const auto x = mel_to_tensor(mel).unsqueeze(0);
  const auto len = torch::full({1}, mel.frames(), torch::kInt64);
  auto encoder = emotion_encoder_;
  return edm::scale_embedding(encoder->forward(x, len).squeeze(0), scalar);
}

SynthesisResult Synthesizer::synthesize(const SynthesisRequest& req) const {
  if (req.phones.empty()) throw std::invalid_argument("synthesis request has no phones");
  corpus::validate_phones(req.phones);
  if (!std::isfinite(req.strength_scalar) || req.strength_scalar < 0.0) {
    throw std::invalid_argument("strength scalar must be finite and >= 0");
  }
  if (req.target_speaker < 0 || req.target_speaker >= n_speakers()) {
    throw std::invalid_argument("unknown target speaker " + std::to_string(req.target_speaker));
  }
  const auto max_frames = req.max_frames > 0
                              ? req.max_frames
                              : kFramesPerPhone * static_cast<std::int64_t>(req.phones.length());
  const auto e = extract_emotion_embedding(req.reference_mel, 1.0);
  const auto phones = torch::tensor(req.phones.symbols, torch::kInt64);
  auto model = backbone_;
  auto out = model->infer(phones, e, req.target_speaker, req.strength_scalar, max_frames, kStopThreshold);
  return {tensor_to_mel(out.mel), out.alignments, out.stop_step, out.truncated};
}

std::vector<std::string> Synthesizer::parameter_names() const {
  std::vector<std::string> names;
  for (const auto& p : backbone_->named_parameters()) names.push_back("backbone." + p.key());
  for (const auto& p : emotion_encoder_->named_parameters()) names.push_back("emotion_encoder." + p.key());
  return names;
}

}  // namespace emodis::inference
