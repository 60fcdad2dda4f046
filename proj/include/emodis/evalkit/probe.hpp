#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <torch/torch.h>

#include <json.hpp>

namespace emodis::evalkit {

enum class ProbeTask { kEmotionOnE, kSpeakerOnE, kSpeakerOnS, kEmotionOnS };

std::string probe_task_name(ProbeTask task);

struct ProbeReport {
  ProbeTask task = ProbeTask::kEmotionOnE;
  double accuracy = 0.0;
  double chance = 0.0;
  std::int64_t n_train = 0;
  std::int64_t n_test = 0;
  std::int64_t n_classes = 0;

  nlohmann::json to_json() const;
};

inline constexpr std::int64_t kMinItemsPerClass = 10;
inline constexpr double kProbeTrainFraction = 0.7;

// Multinomial logistic regression on standardized features, fit on a 70%
// split and scored on the remaining 30%. The split is stratified by class and
// made over uids, so repeated uids never straddle it. Chance is 1/n_classes.
// Throws std::invalid_argument when a class has fewer than 10 items; the
// message names the class (class_names[label] when given).
ProbeReport fit_linear_probe(const torch::Tensor& embeddings, const std::vector<std::int64_t>& labels,
                             const std::vector<std::string>& uids, std::uint64_t split_seed, ProbeTask task,
                             const std::vector<std::string>& class_names = {});

}  // namespace emodis::evalkit
