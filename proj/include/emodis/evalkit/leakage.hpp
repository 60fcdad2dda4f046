#pragma once

#include <cstdint>
#include <vector>

#include <torch/torch.h>

#include <json.hpp>

#include "emodis/corpus/manifest.hpp"
#include "emodis/evalkit/verifier.hpp"

namespace emodis::evalkit {

struct LeakageReport {
  double cos_to_target = 0.0;
  double cos_to_source = 0.0;
  double target_upper_bound = 0.0;  // real target vs real target
  double cross_lower_bound = 0.0;   // real target vs real source
  std::int64_t n_synthesized = 0;

  double gap() const { return cos_to_target - cos_to_source; }
  nlohmann::json to_json() const;
};

// Cosine similarity of two vectors; exactly 1 for a vector with itself.
double cosine(const torch::Tensor& a, const torch::Tensor& b);

inline constexpr std::int64_t kLeakagePairsPerItem = 10;

struct SynthesizedItem {
  corpus::MelSpectrogram mel;
  corpus::SpeakerId source_speaker = 0;  // speaker of the emotion reference
};

// Each synthesized utterance is paired with random real target-speaker and
// real source-speaker utterances (verifier embeddings); the report holds the
// mean cosines plus the two real-data bounds, computed the same way.
// Throws std::invalid_argument when the verifier is untrained or below the
// held-out accuracy bar.
LeakageReport leakage_cosine(const std::vector<SynthesizedItem>& synthesized, const corpus::CorpusManifest& manifest,
                             const std::vector<corpus::MelSpectrogram>& mels, const Verifier& verifier,
                             std::uint64_t seed);

}  // namespace emodis::evalkit
