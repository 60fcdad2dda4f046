#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "emodis/corpus/manifest.hpp"

namespace emodis::corpus {

// Closed-form prosody of one emotion at unit strength. Pitch terms are in
// mel channels (at 80 channels; scaled for other widths), energy terms in
// natural-log units. The curve is sin(2*pi*rate*t) with phase zero at the
// first frame, so the contour is a function of elapsed time only.
struct EmotionProsody {
  double pitch_amplitude = 0.0;
  double pitch_offset = 0.0;
  double energy_amplitude = 0.0;
  double energy_offset = 0.0;
  double rate_hz = 0.0;
};

const EmotionProsody& prosody_params(EmotionLabel emotion);

// Mel channels [lo, hi) carrying the pitch-proxy peak.
struct PitchBand {
  int lo = 0;
  int hi = 0;
  double center = 0.0;     // resting peak position (channel index)
  double peak_width = 0.0; // gaussian std-dev in channels
  double scale = 1.0;      // mel_channels / 80
};

PitchBand pitch_band(const FeatureConfig& cfg);

struct ProsodyTrack {
  std::vector<double> pitch_center;  // channel index of the pitch peak per frame
  std::vector<double> log_energy;    // additive log-energy per frame
};

// Ground-truth prosody trajectory; amplitude and offset are linear in strength.
ProsodyTrack prosody_track(EmotionLabel emotion, double strength, std::int64_t n_frames,
                           const FeatureConfig& cfg);

// Per-phone durations in frames, each in [4, 10], drawn from the seed.
std::vector<int> phone_durations(const PhoneSequence& phones, std::uint64_t seed);

// Log spectral envelope (natural log) of a profile, one value per channel.
std::vector<double> timbre_envelope(const SpeakerProfile& profile, int mel_channels);

// Content x timbre with the resting pitch peak and no prosody modulation.
MelSpectrogram render_base(const PhoneSequence& phones, const SpeakerProfile& profile,
                           std::uint64_t seed, const FeatureConfig& cfg = {});

// Log-mel rendering of (content) x (timbre) x (prosody). Deterministic in all
// inputs. Throws std::invalid_argument on unknown phones, empty phones or a
// negative strength.
MelSpectrogram render_utterance(const PhoneSequence& phones, const SpeakerProfile& profile,
                                EmotionLabel emotion, double latent_strength,
                                std::uint64_t seed, const FeatureConfig& cfg = {});

struct SpeakerSpec {
  std::string name;
  SpeakerRole role = SpeakerRole::kSource;
  // Utterances per emotion (the target speaker only has neutral_T).
  int utterances_per_emotion = 0;
  std::optional<std::vector<double>> timbre;
};

struct CorpusSpec {
  std::vector<SpeakerSpec> speakers;
  int phone_inventory_size = kNumSymbols;
  int min_phones = 5;
  int max_phones = 8;
  double min_strength = 0.5;
  double max_strength = 1.5;
  FeatureConfig features;

  // Throws std::invalid_argument on structural problems (target count,
  // zero utterances, inventory size, ranges).
  void validate() const;
  std::size_t total_utterances() const;
};

// 1 target x 400 neutral_T, 2 sources x 7 emotions x 100.
CorpusSpec default_corpus_spec();
CorpusSpec load_corpus_spec(const std::filesystem::path& path);
CorpusSpec corpus_spec_from_json(const std::string& text);

// Timbre coefficients for `count` speakers; redraws until every pair of
// envelopes is at least a fixed distance apart.
std::vector<std::vector<double>> draw_timbres(std::uint64_t seed, int count);

// Random phone string of the spec's length range.
PhoneSequence draw_phones(const CorpusSpec& spec, std::uint64_t seed);

// Writes out_dir/manifest.jsonl and out_dir/mels/<uid>.mel.
CorpusManifest generate_corpus(const CorpusSpec& spec, const std::filesystem::path& out_dir,
                               std::uint64_t seed);

}  // namespace emodis::corpus
