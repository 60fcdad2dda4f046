#include "emodis/backbone/tacotron.hpp"

#include <stdexcept>

namespace emodis::backbone {

torch::Tensor condition_on_emotion(const torch::Tensor& states, const torch::Tensor& emotion, double scalar) {
  if (!(scalar >= 0.0)) throw std::invalid_argument("emotion scalar must be >= 0");
  if (states.size(0) != emotion.size(0)) throw std::invalid_argument("batch mismatch between states and emotion");
  const auto block = (emotion * scalar).unsqueeze(1).expand({states.size(0), states.size(1), emotion.size(1)});
  return torch::cat({states, block}, 2);
}

TacotronImpl::TacotronImpl(const BackboneConfig& cfg) : cfg_(cfg) {
  encoder_ = register_module("encoder", TextEncoder(cfg));
  decoder_ = register_module("decoder", Decoder(cfg));
  postnet_ = register_module("postnet", Postnet(cfg));
  speaker_table_ = register_module("speaker_table", torch::nn::Embedding(cfg.n_speakers, cfg.speaker_table_dim));
}

torch::Tensor TacotronImpl::encode_text(const torch::Tensor& phones, const torch::Tensor& lengths) {
  return encoder_(phones, lengths);
}

torch::Tensor TacotronImpl::speaker_vectors(const torch::Tensor& speaker_ids) { return speaker_table_(speaker_ids); }

DecoderOutput TacotronImpl::forward_teacher_forced(const torch::Tensor& phones, const torch::Tensor& phone_lengths,
                                                   const torch::Tensor& target_mels,
                                                   const torch::Tensor& mel_lengths, const torch::Tensor& emotion,
                                                   const torch::Tensor& speaker_ids, double scalar) {
  const auto r = cfg_.reduction;
  const auto batch = target_mels.size(0);
  const auto frames = target_mels.size(1);
  if (frames % r != 0) throw std::invalid_argument("target frame count must be a multiple of the reduction factor");
  const auto steps = frames / r;

  const auto memory = condition_on_emotion(encode_text(phones, phone_lengths), emotion, scalar);
  const auto positions = torch::arange(memory.size(1), phone_lengths.options());
  const auto memory_mask = (positions.unsqueeze(0) < phone_lengths.unsqueeze(1)).to(memory.dtype());
  const auto speaker = speaker_vectors(speaker_ids);

  auto state = decoder_->initial_state(batch, memory.options());
  std::vector<torch::Tensor> frame_chunks, stop_chunks, align_rows, means;
  frame_chunks.reserve(static_cast<std::size_t>(steps));
  auto prev = torch::zeros({batch, cfg_.mel_channels}, memory.options());
  for (std::int64_t s = 0; s < steps; ++s) {
    auto out = decoder_->step(prev, speaker, memory, memory_mask, state);
    frame_chunks.push_back(out.frames);
    stop_chunks.push_back(out.stop_logits);
    align_rows.push_back(out.alignment);
    means.push_back(out.state.attention.mu);
    state = std::move(out.state);
    prev = target_mels.select(1, (s + 1) * r - 1);
  }

  DecoderOutput result;
  result.mel_before = torch::cat(frame_chunks, 1);
  result.mel_after = result.mel_before + postnet_(result.mel_before, mel_lengths);
  result.stop_logits = torch::cat(stop_chunks, 1);
  result.alignments = torch::stack(align_rows, 1).repeat_interleave(r, 1);
  result.means = torch::stack(means, 1);
  return result;
}

InferenceOutput TacotronImpl::infer(const torch::Tensor& phones, const torch::Tensor& emotion,
                                    std::int64_t speaker_id, double scalar, std::int64_t max_frames,
                                    double stop_threshold) {
  if (phones.dim() != 1 || phones.size(0) == 0) throw std::invalid_argument("inference expects a non-empty phone vector");
  torch::NoGradGuard no_grad;
  const auto r = cfg_.reduction;
  const auto lengths = torch::full({1}, phones.size(0), torch::kInt64);
  const auto memory = condition_on_emotion(encode_text(phones.unsqueeze(0), lengths), emotion.view({1, -1}), scalar);
  const auto memory_mask = torch::ones({1, memory.size(1)}, memory.options());
  const auto speaker = speaker_vectors(torch::full({1}, speaker_id, torch::kInt64));

  auto state = decoder_->initial_state(1, memory.options());
  auto prev = torch::zeros({1, cfg_.mel_channels}, memory.options());
  std::vector<torch::Tensor> frames, aligns;
  InferenceOutput result;
  result.truncated = true;
  std::int64_t produced = 0;
  std::int64_t step = 0;
  while (produced < max_frames) {
    auto out = decoder_->step(prev, speaker, memory, memory_mask, state);
    state = std::move(out.state);
    aligns.push_back(out.alignment.squeeze(0));
    const auto probs = torch::sigmoid(out.stop_logits.squeeze(0));
    std::int64_t keep = r;
    bool stop = false;
    for (std::int64_t k = 0; k < r; ++k) {
      if (probs[k].item<double>() > stop_threshold) {
        keep = k + 1;
        stop = true;
        break;
      }
    }
    keep = std::min(keep, max_frames - produced);
    frames.push_back(out.frames.squeeze(0).narrow(0, 0, keep));
    produced += keep;
    ++step;
    prev = out.frames.select(1, r - 1);
    if (stop) {
      result.truncated = false;
      break;
    }
  }
  result.stop_step = step;
  const auto before = torch::cat(frames, 0).unsqueeze(0);
  const auto len = torch::full({1}, before.size(1), torch::kInt64);
  result.mel = (before + postnet_(before, len)).squeeze(0);
  result.alignments = torch::stack(aligns, 0);
  return result;
}

}  // namespace emodis::backbone
