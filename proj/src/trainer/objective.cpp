#include "emodis/trainer/objective.hpp"

namespace emodis::trainer {

namespace {
double value(const torch::Tensor& t) { return t.item<double>(); }

nlohmann::json edm_record(const edm::EdmLosses& l) {
  return {{"l_ec", value(l.l_ec)}, {"l_ort", value(l.l_ort)}, {"l_sc", value(l.l_sc)},
          {"l_adv", value(l.l_adv)}, {"total", value(l.total)}};
}
}  // namespace

nlohmann::json LossBreakdown::to_record() const {
  return {{"step", step},
          {"l_taco", value(taco.total)},
          {"l_edm", value(edm.total)},
          {"l_edmd", value(edmd.total)},
          {"l_emo", value(l_emo)},
          {"total", value(total)},
          {"taco", {{"mel_before", value(taco.mel_before)}, {"mel_after", value(taco.mel_after)}, {"stop", value(taco.stop)}}},
          {"edm", edm_record(edm)},
          {"edmd", edm_record(edmd)}};
}

ForwardResult total_loss(EmoDisModel& model, const corpus::TrainingBatch& batch, const TrainConfig& cfg) {
  ForwardResult r;
  auto reference = model->reference_edm()->forward(batch.mels, batch.mel_lengths);
  r.e_ref = reference.e;
  r.decoder = model->backbone()->forward_teacher_forced(batch.phones, batch.phone_lengths, batch.mels,
                                                        batch.mel_lengths, reference.e, batch.speakers, 1.0);
  auto& L = r.losses;
  L.taco = backbone::taco_loss(r.decoder, batch.mels, batch.stop_targets, batch.frame_mask, cfg.loss_mode,
                             cfg.stop_pos_weight);
  L.edm = model->reference_edm()->losses(reference, batch.emotions, batch.speakers, cfg.reference_alpha(), cfg.beta,
                                         cfg.reduction_mode);

  const auto& predicted = r.decoder.mel_after;
  if (cfg.synthesized_edm_enabled()) {
    std::optional<torch::Tensor> speaker_input;
    if (!cfg.decoder_adv_backprop) speaker_input = predicted.detach();
    auto synthesized = model->synthesis_edm()->forward(predicted, batch.mel_lengths, speaker_input);
    r.e_syn = synthesized.e;
    L.edmd = model->synthesis_edm()->losses(synthesized, batch.emotions, batch.speakers, cfg.alpha, cfg.beta,
                                            cfg.reduction_mode);
  } else {
    r.e_syn = model->synthesis_edm()->emotion_encode(predicted, batch.mel_lengths);
    const auto zero = torch::zeros({}, predicted.options());
    L.edmd = edm::EdmLosses::compose(zero, zero, zero, zero, 0.0, cfg.beta);
  }
  L.l_emo = edm::emotion_matching_loss(r.e_ref, r.e_syn, cfg.reduction_mode);
  L.total = compose_total(L.taco.total, L.edm.total, L.edmd.total, L.l_emo);
  return r;
}

}  // namespace emodis::trainer
