#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <torch/torch.h>

#include <json.hpp>

#include "emodis/corpus/manifest.hpp"
#include "emodis/evalkit/leakage.hpp"
#include "emodis/evalkit/probe.hpp"
#include "emodis/evalkit/projection.hpp"
#include "emodis/evalkit/strength.hpp"
#include "emodis/evalkit/verifier.hpp"
#include "emodis/inference/synthesizer.hpp"
#include "emodis/trainer/model.hpp"

namespace emodis::evalkit {

struct EvalOptions {
  std::uint64_t seed = 1;
  // Held-out sentences of the factorial probe set.
  int probe_sentences = 20;
  // Held-out sentences of the strength / leakage test set.
  int test_sentences = 10;
};

// Held-out phone strings that never occur in the corpus.
std::vector<corpus::PhoneSequence> held_out_sentences(const corpus::CorpusManifest& manifest, int count,
                                                      std::uint64_t seed);

// Every held-out sentence rendered with every corpus speaker's timbre and
// every source emotion (speaker and emotion are balanced and independent).
struct ProbeItem {
  std::string uid;
  corpus::SpeakerId speaker = 0;
  corpus::EmotionLabel emotion = corpus::EmotionLabel::kNeutral;
  double latent_strength = 0.0;
  corpus::MelSpectrogram mel;
};
std::vector<ProbeItem> make_probe_set(const corpus::CorpusManifest& manifest, int n_sentences, std::uint64_t seed);

struct EmbeddingSet {
  torch::Tensor e;  // reference-side emotion embeddings [N, 256]
  torch::Tensor s;  // reference-side speaker embeddings [N, 256]
  std::vector<std::string> uids;
  std::vector<std::int64_t> emotions;
  std::vector<std::int64_t> speakers;
};
EmbeddingSet embed_probe_set(trainer::EmoDisModel& model, const std::vector<ProbeItem>& items);

struct DisentangleResult {
  std::vector<ProbeReport> probes;
  EmbeddingSet embeddings;
  Projection e_projection;
  Projection s_projection;

  const ProbeReport& probe(ProbeTask task) const;
  nlohmann::json to_json() const;
};
DisentangleResult evaluate_disentanglement(trainer::EmoDisModel& model, const corpus::CorpusManifest& manifest,
                                           const EvalOptions& options);

// Target-speaker syntheses of each held-out sentence for each expressive
// emotion, with a source-speaker corpus utterance of that emotion as
// reference, at strength scalars 1, 2, 3.
struct StrengthSample {
  std::string sentence;
  corpus::EmotionLabel emotion = corpus::EmotionLabel::kNeutral;
  std::string reference_uid;
  corpus::SpeakerId source_speaker = 0;
  std::array<corpus::MelSpectrogram, 3> mels;
  std::array<std::vector<double>, 3> contours;
  std::array<bool, 3> truncated{};
};

inline constexpr std::array<double, 3> kStrengthScalars{1.0, 2.0, 3.0};

std::vector<StrengthSample> synthesize_test_set(const inference::Synthesizer& synth,
                                                const corpus::CorpusManifest& manifest,
                                                const std::vector<corpus::MelSpectrogram>& mels,
                                                const EvalOptions& options, bool all_scalars = true);

struct StrengthResult {
  std::vector<StrengthSample> samples;
  std::vector<StrengthTriple> triples;
  StrengthConfusion confusion;
  double monotonic = 0.0;

  nlohmann::json to_json() const;
};
StrengthResult evaluate_strength(const inference::Synthesizer& synth, const corpus::CorpusManifest& manifest,
                                 const std::vector<corpus::MelSpectrogram>& mels, const EvalOptions& options);

struct LeakageResult {
  VerifierReport verifier;
  LeakageReport report;

  nlohmann::json to_json() const;
};
// Scores the scalar-1 syntheses of the test set; trains the verifier when
// none is passed.
LeakageResult evaluate_leakage(const inference::Synthesizer& synth, const corpus::CorpusManifest& manifest,
                               const std::vector<corpus::MelSpectrogram>& mels, const EvalOptions& options,
                               const Verifier* verifier = nullptr);

}  // namespace emodis::evalkit
