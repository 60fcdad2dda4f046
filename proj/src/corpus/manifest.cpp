#include "emodis/corpus/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace emodis::corpus {

using nlohmann::json;

namespace {

constexpr const char* kFormatTag = "emodis-manifest";
constexpr int kFormatVersion = 1;

std::string role_name(SpeakerRole r) { return r == SpeakerRole::kTarget ? "target" : "source"; }

SpeakerRole parse_role(const std::string& s) {
  if (s == "target") return SpeakerRole::kTarget;
  if (s == "source") return SpeakerRole::kSource;
  throw std::invalid_argument("unknown speaker role '" + s + "'");
}

json header_record(const CorpusManifest& m) {
  json speakers = json::array();
  for (const auto& s : m.speakers) {
    speakers.push_back({{"id", s.id}, {"name", s.name}, {"role", role_name(s.role)}, {"timbre", s.timbre}});
  }
  return json{{"format", kFormatTag},
              {"version", kFormatVersion},
              {"seed", m.seed},
              {"feature_config", m.feature_config},
              {"speakers", speakers}};
}

json utterance_record(const Utterance& u) {
  return json{{"uid", u.uid},
              {"speaker", u.speaker},
              {"emotion", emotion_name(u.emotion)},
              {"latent_strength", u.latent_strength},
              {"phones", phones_to_text(u.phones)},
              {"mel_path", u.mel_path},
              {"n_frames", u.n_frames}};
}

[[noreturn]] void fail_at(std::size_t line, const std::string& what) {
  throw std::runtime_error("manifest line " + std::to_string(line) + ": " + what);
}

}  // namespace

SpeakerId CorpusManifest::target_speaker() const {
  for (const auto& s : speakers) {
    if (s.role == SpeakerRole::kTarget) return s.id;
  }
  throw std::logic_error("manifest has no target speaker");
}

const Utterance& CorpusManifest::find(const std::string& uid) const {
  for (const auto& u : utterances) {
    if (u.uid == uid) return u;
  }
  throw std::out_of_range("no utterance with uid '" + uid + "'");
}

void CorpusManifest::validate() const {
  feature_config.validate();
  int targets = 0;
  for (std::size_t i = 0; i < speakers.size(); ++i) {
    if (speakers[i].id != static_cast<SpeakerId>(i)) {
      throw std::invalid_argument("speaker ids must be 0..N-1 in order");
    }
    if (speakers[i].role == SpeakerRole::kTarget) ++targets;
  }
  if (targets != 1) {
    throw std::invalid_argument("corpus must have exactly one target speaker, found " +
                                std::to_string(targets));
  }
  std::set<std::string> seen;
  for (const auto& u : utterances) {
    if (!seen.insert(u.uid).second) throw std::invalid_argument("duplicate uid '" + u.uid + "'");
    if (u.speaker < 0 || u.speaker >= static_cast<SpeakerId>(speakers.size())) {
      throw std::invalid_argument("utterance '" + u.uid + "' has unknown speaker");
    }
    const bool target = speakers[static_cast<std::size_t>(u.speaker)].role == SpeakerRole::kTarget;
    if (target != (u.emotion == EmotionLabel::kNeutralT)) {
      throw std::invalid_argument("utterance '" + u.uid +
                                  "': neutral_T is reserved for the target speaker");
    }
    if (!(u.latent_strength >= 0.0)) {
      throw std::invalid_argument("utterance '" + u.uid + "' has negative latent strength");
    }
    if (u.latent_strength == 0.0 && !is_neutral(u.emotion)) {
      throw std::invalid_argument("utterance '" + u.uid + "': zero strength on an expressive emotion");
    }
    if (u.phones.empty()) throw std::invalid_argument("utterance '" + u.uid + "' has no phones");
    if (u.n_frames <= 0) throw std::invalid_argument("utterance '" + u.uid + "' has no frames");
  }
}

void save_manifest(const CorpusManifest& manifest, const std::filesystem::path& path) {
  manifest.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest: " + path.string());
  out << header_record(manifest).dump() << '\n';
  for (const auto& u : manifest.utterances) out << utterance_record(u).dump() << '\n';
  if (!out) throw std::runtime_error("failed writing manifest: " + path.string());
}

CorpusManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path.string());

  CorpusManifest m;
  m.root = path.parent_path();
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      fail_at(line_no, std::string("malformed record: ") + e.what());
    }
    try {
      if (!have_header) {
        if (rec.value("format", "") != kFormatTag) fail_at(line_no, "missing manifest header");
        if (rec.at("version").get<int>() != kFormatVersion) fail_at(line_no, "unsupported manifest version");
        m.seed = rec.at("seed").get<std::uint64_t>();
        m.feature_config = rec.at("feature_config").get<FeatureConfig>();
        for (const auto& s : rec.at("speakers")) {
          SpeakerProfile p;
          p.id = s.at("id").get<int>();
          p.name = s.at("name").get<std::string>();
          p.role = parse_role(s.at("role").get<std::string>());
          p.timbre = s.at("timbre").get<std::vector<double>>();
          m.speakers.push_back(std::move(p));
        }
        have_header = true;
        continue;
      }
      Utterance u;
      u.uid = rec.at("uid").get<std::string>();
      u.speaker = rec.at("speaker").get<int>();
      u.emotion = parse_emotion(rec.at("emotion").get<std::string>());
      u.latent_strength = rec.at("latent_strength").get<double>();
      u.phones = phones_from_text(rec.at("phones").get<std::string>());
      u.mel_path = rec.at("mel_path").get<std::string>();
      u.n_frames = rec.at("n_frames").get<std::int64_t>();
      m.utterances.push_back(std::move(u));
    } catch (const json::exception& e) {
      fail_at(line_no, std::string("malformed record: ") + e.what());
    } catch (const std::invalid_argument& e) {
      fail_at(line_no, e.what());
    }
  }
  if (!have_header) throw std::runtime_error("manifest is empty: " + path.string());
  m.validate();

  for (const auto& u : m.utterances) {
    const auto file = m.mel_file(u);
    if (!std::filesystem::exists(file)) {
      throw std::runtime_error("utterance '" + u.uid + "': feature file missing: " + file.string());
    }
    MelSpectrogram mel;
    try {
      mel = read_mel(file);
    } catch (const std::exception& e) {
      throw std::runtime_error("utterance '" + u.uid + "': " + e.what());
    }
    if (mel.frames() != u.n_frames || mel.channels() != m.feature_config.mel_channels) {
      throw std::runtime_error("utterance '" + u.uid + "': feature shape does not match manifest");
    }
  }
  return m;
}

std::vector<MelSpectrogram> load_features(const CorpusManifest& manifest) {
  std::vector<MelSpectrogram> out;
  out.reserve(manifest.utterances.size());
  for (const auto& u : manifest.utterances) {
    try {
      out.push_back(read_mel(manifest.mel_file(u)));
    } catch (const std::exception& e) {
      throw std::runtime_error("utterance '" + u.uid + "': " + e.what());
    }
  }
  return out;
}

}  // namespace emodis::corpus
