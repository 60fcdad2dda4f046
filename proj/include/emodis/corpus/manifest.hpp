#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "emodis/corpus/emotion.hpp"
#include "emodis/corpus/mel.hpp"
#include "emodis/corpus/phones.hpp"

namespace emodis::corpus {

using SpeakerId = int;

enum class SpeakerRole { kSource, kTarget };

struct SpeakerProfile {
  SpeakerId id = 0;
  std::string name;
  SpeakerRole role = SpeakerRole::kSource;
  // Cosine-series coefficients of the log spectral envelope.
  std::vector<double> timbre;

  bool operator==(const SpeakerProfile&) const = default;
};

struct Utterance {
  std::string uid;
  SpeakerId speaker = 0;
  EmotionLabel emotion = EmotionLabel::kNeutral;
  double latent_strength = 0.0;
  PhoneSequence phones;
  // Relative to the directory holding the manifest.
  std::string mel_path;
  std::int64_t n_frames = 0;

  bool operator==(const Utterance&) const = default;
};

struct CorpusManifest {
  std::vector<SpeakerProfile> speakers;
  std::vector<Utterance> utterances;
  FeatureConfig feature_config;
  std::uint64_t seed = 0;
  // Directory the relative mel paths resolve against; not serialized.
  std::filesystem::path root;

  SpeakerId target_speaker() const;
  std::filesystem::path mel_file(const Utterance& u) const { return root / u.mel_path; }
  const Utterance& find(const std::string& uid) const;

  // Structural invariants only (no file access); throws std::invalid_argument.
  void validate() const;

  bool operator==(const CorpusManifest& o) const {
    return speakers == o.speakers && utterances == o.utterances &&
           feature_config == o.feature_config && seed == o.seed;
  }
};

inline constexpr const char* kManifestFileName = "manifest.jsonl";

// One header record, then one record per utterance, one JSON object per line.
void save_manifest(const CorpusManifest& manifest, const std::filesystem::path& path);

// Errors: malformed record -> message with its 1-based line number;
// missing or unreadable feature file -> message naming the uid.
CorpusManifest load_manifest(const std::filesystem::path& path);

// Reads every feature file referenced by the manifest, in manifest order.
std::vector<MelSpectrogram> load_features(const CorpusManifest& manifest);

}  // namespace emodis::corpus
