#include "emodis/corpus/generator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "emodis/util/random.hpp"

namespace emodis::corpus {

namespace {

constexpr int kTimbreTerms = 4;
constexpr double kTimbreMinDistance = 0.6;
constexpr std::uint64_t kTemplateSeed = 0xC0FFEEULL;
constexpr double kContentFloor = 0.1;
constexpr double kPitchPeakGain = 30.0;
constexpr double kContentNoise = 0.03;
constexpr int kMinDuration = 4;
constexpr int kMaxDuration = 10;

const std::array<EmotionProsody, kNumEmotions> kProsody = {{
    {0.0, 0.0, 0.00, 0.00, 0.0},    // neutral
    {2.0, 1.5, 0.15, 0.10, 3.0},    // happy
    {3.0, 2.5, 0.10, 0.05, 1.5},    // surprise
    {1.5, 1.0, 0.35, 0.30, 5.0},    // angry
    {1.0, -1.5, 0.10, -0.05, 2.0},  // disgust
    {1.2, 2.0, 0.20, -0.10, 7.0},   // fear
    {0.8, -2.0, 0.10, -0.30, 1.0},  // sad
    {0.6, -0.5, 0.05, 0.00, 2.5},   // neutral_T
}};

struct Formant {
  double position;
  double width;
  double gain;
};

// Spectral template of one phone; fixed for the inventory, independent of
// the corpus seed. Formants sit above the pitch band.
std::vector<double> phone_template(std::int64_t phone, int channels) {
  util::Rng rng(util::mix_seed(kTemplateSeed, static_cast<std::uint64_t>(phone)));
  const double scale = channels / 80.0;
  std::array<Formant, 3> formants{};
  for (auto& f : formants) {
    f.position = rng.uniform(0.3, 0.95) * channels;
    f.width = rng.uniform(1.5, 5.0) * scale;
    f.gain = rng.uniform(0.6, 2.0);
  }
  std::vector<double> out(static_cast<std::size_t>(channels), kContentFloor);
  for (int c = 0; c < channels; ++c) {
    for (const auto& f : formants) {
      const double d = (c - f.position) / f.width;
      out[static_cast<std::size_t>(c)] += f.gain * std::exp(-0.5 * d * d);
    }
  }
  return out;
}

// Linear-domain content x timbre with multiplicative content noise.
std::vector<double> content_times_timbre(const PhoneSequence& phones, const SpeakerProfile& profile,
                                         std::uint64_t seed, const FeatureConfig& cfg,
                                         std::int64_t& n_frames) {
  if (phones.empty()) throw std::invalid_argument("cannot render an empty phone sequence");
  validate_phones(phones);
  cfg.validate();
  const int channels = cfg.mel_channels;
  const auto durations = phone_durations(phones, seed);
  n_frames = 0;
  for (int d : durations) n_frames += d;

  const auto log_timbre = timbre_envelope(profile, channels);
  std::vector<double> out(static_cast<std::size_t>(n_frames * channels));
  util::Rng noise(util::mix_seed(seed, 0x6e6f697365ULL));
  std::int64_t t = 0;
  for (std::size_t p = 0; p < phones.length(); ++p) {
    const auto tmpl = phone_template(phones.symbols[p], channels);
    for (int k = 0; k < durations[p]; ++k, ++t) {
      for (int c = 0; c < channels; ++c) {
        const double n = kContentNoise * noise.normal();
        out[static_cast<std::size_t>(t * channels + c)] =
            tmpl[static_cast<std::size_t>(c)] * std::exp(log_timbre[static_cast<std::size_t>(c)] + n);
      }
    }
  }
  return out;
}

MelSpectrogram to_log_mel(const std::vector<double>& linear, std::int64_t frames, int channels) {
  std::vector<float> data(linear.size());
  std::transform(linear.begin(), linear.end(), data.begin(),
                 [](double v) { return static_cast<float>(std::log(v)); });
  return MelSpectrogram(frames, channels, std::move(data));
}

void apply_pitch_peak(std::vector<double>& linear, std::int64_t frames, const FeatureConfig& cfg,
                      const std::vector<double>& centers) {
  const auto band = pitch_band(cfg);
  const int channels = cfg.mel_channels;
  for (std::int64_t t = 0; t < frames; ++t) {
    const double mu = centers[static_cast<std::size_t>(t)];
    for (int c = band.lo; c < band.hi; ++c) {
      const double d = (c - mu) / band.peak_width;
      linear[static_cast<std::size_t>(t * channels + c)] *= 1.0 + kPitchPeakGain * std::exp(-0.5 * d * d);
    }
  }
}

std::string zero_pad(std::size_t v, int width) {
  std::ostringstream os;
  os << std::setw(width) << std::setfill('0') << v;
  return os.str();
}

}  // namespace

const EmotionProsody& prosody_params(EmotionLabel emotion) { return kProsody.at(to_index(emotion)); }

PitchBand pitch_band(const FeatureConfig& cfg) {
  const int channels = cfg.mel_channels;
  PitchBand band;
  band.scale = channels / 80.0;
  band.lo = static_cast<int>(std::lround(0.025 * channels));
  band.hi = std::max(band.lo + 2, static_cast<int>(std::lround(0.275 * channels)));
  band.center = 0.5 * (band.lo + band.hi - 1);
  band.peak_width = 1.5 * band.scale;
  return band;
}

ProsodyTrack prosody_track(EmotionLabel emotion, double strength, std::int64_t n_frames,
                           const FeatureConfig& cfg) {
  if (!(strength >= 0.0)) throw std::invalid_argument("latent strength must be >= 0");
  const auto& p = prosody_params(emotion);
  const auto band = pitch_band(cfg);
  ProsodyTrack track;
  track.pitch_center.resize(static_cast<std::size_t>(n_frames));
  track.log_energy.resize(static_cast<std::size_t>(n_frames));
  for (std::int64_t t = 0; t < n_frames; ++t) {
    const double g = std::sin(2.0 * std::numbers::pi * p.rate_hz * t * cfg.frame_shift_seconds());
    track.pitch_center[static_cast<std::size_t>(t)] =
        band.center + band.scale * strength * (p.pitch_offset + p.pitch_amplitude * g);
    track.log_energy[static_cast<std::size_t>(t)] = strength * (p.energy_offset + p.energy_amplitude * g);
  }
  return track;
}

std::vector<int> phone_durations(const PhoneSequence& phones, std::uint64_t seed) {
  util::Rng rng(util::mix_seed(seed, 0x647572ULL));
  std::vector<int> out(phones.length());
  for (auto& d : out) d = static_cast<int>(rng.integer(kMinDuration, kMaxDuration));
  return out;
}

std::vector<double> timbre_envelope(const SpeakerProfile& profile, int mel_channels) {
  std::vector<double> out(static_cast<std::size_t>(mel_channels), 0.0);
  for (int c = 0; c < mel_channels; ++c) {
    double v = 0.0;
    for (std::size_t j = 0; j < profile.timbre.size(); ++j) {
      v += profile.timbre[j] *
           std::cos(std::numbers::pi * static_cast<double>(j + 1) * (c + 0.5) / mel_channels);
    }
    out[static_cast<std::size_t>(c)] = v;
  }
  return out;
}

MelSpectrogram render_base(const PhoneSequence& phones, const SpeakerProfile& profile,
                           std::uint64_t seed, const FeatureConfig& cfg) {
  std::int64_t frames = 0;
  auto linear = content_times_timbre(phones, profile, seed, cfg, frames);
  const std::vector<double> resting(static_cast<std::size_t>(frames), pitch_band(cfg).center);
  apply_pitch_peak(linear, frames, cfg, resting);
  return to_log_mel(linear, frames, cfg.mel_channels);
}

MelSpectrogram render_utterance(const PhoneSequence& phones, const SpeakerProfile& profile,
                                EmotionLabel emotion, double latent_strength, std::uint64_t seed,
                                const FeatureConfig& cfg) {
  if (!(latent_strength >= 0.0)) {
    throw std::invalid_argument("latent strength must be >= 0, got " + std::to_string(latent_strength));
  }
  std::int64_t frames = 0;
  auto linear = content_times_timbre(phones, profile, seed, cfg, frames);
  const auto track = prosody_track(emotion, latent_strength, frames, cfg);
  apply_pitch_peak(linear, frames, cfg, track.pitch_center);
  const int channels = cfg.mel_channels;
  for (std::int64_t t = 0; t < frames; ++t) {
    const double gain = std::exp(track.log_energy[static_cast<std::size_t>(t)]);
    for (int c = 0; c < channels; ++c) linear[static_cast<std::size_t>(t * channels + c)] *= gain;
  }
  return to_log_mel(linear, frames, channels);
}

void CorpusSpec::validate() const {
  features.validate();
  if (phone_inventory_size < 1 || phone_inventory_size > kNumSymbols) {
    throw std::invalid_argument("phone inventory size must be in [1, " + std::to_string(kNumSymbols) + "]");
  }
  if (min_phones < 1 || max_phones < min_phones) throw std::invalid_argument("invalid phone length range");
  if (!(min_strength > 0.0) || max_strength < min_strength) {
    throw std::invalid_argument("invalid latent strength range");
  }
  int targets = 0;
  int sources = 0;
  for (const auto& s : speakers) {
    if (s.utterances_per_emotion < 0) throw std::invalid_argument("negative utterance count for " + s.name);
    (s.role == SpeakerRole::kTarget ? targets : sources) += 1;
  }
  if (targets != 1) {
    throw std::invalid_argument("corpus spec must declare exactly one target speaker, found " +
                                std::to_string(targets));
  }
  if (sources < 1) throw std::invalid_argument("corpus spec must declare at least one source speaker");
  if (total_utterances() == 0) throw std::invalid_argument("corpus spec has zero utterances");
}

std::size_t CorpusSpec::total_utterances() const {
  std::size_t n = 0;
  for (const auto& s : speakers) {
    const std::size_t classes = s.role == SpeakerRole::kTarget ? 1 : kSourceEmotions.size();
    n += classes * static_cast<std::size_t>(std::max(0, s.utterances_per_emotion));
  }
  return n;
}

CorpusSpec default_corpus_spec() {
  CorpusSpec spec;
  spec.speakers = {{"target", SpeakerRole::kTarget, 400, std::nullopt},
                   {"source_a", SpeakerRole::kSource, 100, std::nullopt},
                   {"source_b", SpeakerRole::kSource, 100, std::nullopt}};
  return spec;
}

CorpusSpec corpus_spec_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  CorpusSpec spec;
  for (const auto& s : j.at("speakers")) {
    SpeakerSpec sp;
    sp.name = s.at("name").get<std::string>();
    const auto role = s.value("role", std::string("source"));
    if (role == "target") {
      sp.role = SpeakerRole::kTarget;
    } else if (role == "source") {
      sp.role = SpeakerRole::kSource;
    } else {
      throw std::invalid_argument("unknown speaker role '" + role + "'");
    }
    sp.utterances_per_emotion = s.at("count").get<int>();
    if (s.contains("timbre")) sp.timbre = s.at("timbre").get<std::vector<double>>();
    spec.speakers.push_back(std::move(sp));
  }
  spec.phone_inventory_size = j.value("phone_inventory_size", spec.phone_inventory_size);
  spec.min_phones = j.value("min_phones", spec.min_phones);
  spec.max_phones = j.value("max_phones", spec.max_phones);
  spec.min_strength = j.value("min_strength", spec.min_strength);
  spec.max_strength = j.value("max_strength", spec.max_strength);
  spec.features.mel_channels = j.value("mel_channels", spec.features.mel_channels);
  spec.validate();
  return spec;
}

CorpusSpec load_corpus_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus spec: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return corpus_spec_from_json(ss.str());
}

std::vector<std::vector<double>> draw_timbres(std::uint64_t seed, int count) {
  std::vector<std::vector<double>> out;
  util::Rng rng(util::mix_seed(seed, 0x74696d627265ULL));
  while (static_cast<int>(out.size()) < count) {
    std::vector<double> cand(kTimbreTerms);
    for (auto& a : cand) a = rng.uniform(-0.6, 0.6);
    const bool far = std::all_of(out.begin(), out.end(), [&](const auto& prev) {
      double d2 = 0.0;
      for (int j = 0; j < kTimbreTerms; ++j) d2 += (prev[j] - cand[j]) * (prev[j] - cand[j]);
      return std::sqrt(d2) >= kTimbreMinDistance;
    });
    if (far) out.push_back(std::move(cand));
  }
  return out;
}

PhoneSequence draw_phones(const CorpusSpec& spec, std::uint64_t seed) {
  util::Rng rng(util::mix_seed(seed, 0x70686f6eULL));
  PhoneSequence phones;
  const auto n = rng.integer(spec.min_phones, spec.max_phones);
  for (std::int64_t i = 0; i < n; ++i) phones.symbols.push_back(rng.integer(0, spec.phone_inventory_size - 1));
  return phones;
}

CorpusManifest generate_corpus(const CorpusSpec& spec, const std::filesystem::path& out_dir,
                               std::uint64_t seed) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "mels", ec);
  if (ec) throw std::runtime_error("cannot create output directory " + out_dir.string() + ": " + ec.message());

  CorpusManifest m;
  m.seed = seed;
  m.feature_config = spec.features;
  m.root = out_dir;
  const auto timbres = draw_timbres(seed, static_cast<int>(spec.speakers.size()));
  for (std::size_t i = 0; i < spec.speakers.size(); ++i) {
    const auto& s = spec.speakers[i];
    m.speakers.push_back({static_cast<SpeakerId>(i), s.name, s.role, s.timbre.value_or(timbres[i])});
  }

  std::uint64_t counter = 0;
  for (const auto& profile : m.speakers) {
    const auto& s = spec.speakers[static_cast<std::size_t>(profile.id)];
    std::vector<EmotionLabel> emotions;
    if (profile.role == SpeakerRole::kTarget) {
      emotions = {EmotionLabel::kNeutralT};
    } else {
      emotions.assign(kSourceEmotions.begin(), kSourceEmotions.end());
    }
    for (auto emotion : emotions) {
      for (int k = 0; k < s.utterances_per_emotion; ++k, ++counter) {
        const std::uint64_t utt_seed = util::mix_seed(seed, counter);
        util::Rng rng(util::mix_seed(utt_seed, 0x737472ULL));
        double strength = 1.0;
        if (emotion == EmotionLabel::kNeutral) {
          strength = 0.0;
        } else if (emotion != EmotionLabel::kNeutralT) {
          strength = rng.uniform(spec.min_strength, spec.max_strength);
        }
        Utterance u;
        u.uid = profile.name + "_" + std::string(emotion_name(emotion)) + "_" + zero_pad(static_cast<std::size_t>(k), 4);
        u.speaker = profile.id;
        u.emotion = emotion;
        u.latent_strength = strength;
        u.phones = draw_phones(spec, utt_seed);
        u.mel_path = "mels/" + u.uid + ".mel";
        const auto mel = render_utterance(u.phones, profile, emotion, strength, utt_seed, spec.features);
        u.n_frames = mel.frames();
        write_mel(out_dir / u.mel_path, mel);
        m.utterances.push_back(std::move(u));
      }
    }
  }
  save_manifest(m, out_dir / kManifestFileName);
  return m;
}

}  // namespace emodis::corpus
