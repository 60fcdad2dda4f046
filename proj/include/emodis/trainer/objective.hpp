#pragma once

#include <torch/torch.h>

#include <json.hpp>

#include "emodis/backbone/taco_loss.hpp"
#include "emodis/corpus/batching.hpp"
#include "emodis/edm/losses.hpp"
#include "emodis/trainer/config.hpp"
#include "emodis/trainer/model.hpp"

namespace emodis::trainer {

// L = L_taco + L_edm + L_edmd + L_emo, summed in this order for every scalar
// type.
template <typename T>
T compose_total(const T& l_taco, const T& l_edm, const T& l_edmd, const T& l_emo) {
  return l_taco + l_edm + l_edmd + l_emo;
}

struct LossBreakdown {
  std::int64_t step = 0;
  backbone::TacoLossTerms taco;
  edm::EdmLosses edm;   // reference side
  edm::EdmLosses edmd;  // synthesized side (all zero when disabled)
  torch::Tensor l_emo;
  torch::Tensor total;

  torch::Tensor l_taco() const { return taco.total; }

  // Scalar values of every term, for metrics logs.
  nlohmann::json to_record() const;
};

struct ForwardResult {
  LossBreakdown losses;
  backbone::DecoderOutput decoder;
  torch::Tensor e_ref;
  torch::Tensor e_syn;
};

// Teacher-forced pass over one batch plus every loss term. The reference mel
// for the reference-side EDM is the batch's own ground-truth mel.
ForwardResult total_loss(EmoDisModel& model, const corpus::TrainingBatch& batch, const TrainConfig& cfg);

}  // namespace emodis::trainer
