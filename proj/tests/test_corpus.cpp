#include "doctest_torch.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "emodis/corpus/batching.hpp"
#include "emodis/corpus/generator.hpp"
#include "emodis/corpus/manifest.hpp"
#include "emodis/evalkit/pitch_proxy.hpp"
#include "helpers.hpp"

using namespace emodis;
using namespace emodis::corpus;

namespace {

SpeakerProfile profile(int id, std::vector<double> timbre) {
  SpeakerProfile p;
  p.id = id;
  p.name = "spk" + std::to_string(id);
  p.timbre = std::move(timbre);
  return p;
}

// Variance of the pitch-peak position over time, from the closed-form track.
double track_variance(EmotionLabel e, double strength, std::int64_t frames) {
  return evalkit::variance(prosody_track(e, strength, frames, FeatureConfig{}).pitch_center);
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("emotion codes follow declaration order") {
  CHECK(to_index(EmotionLabel::kNeutral) == 0);
  CHECK(to_index(EmotionLabel::kNeutralT) == 7);
  CHECK(kAllEmotions.size() == 8);
  for (auto e : kAllEmotions) CHECK(parse_emotion(emotion_name(e)) == e);
  CHECK_THROWS_AS(parse_emotion("bored"), std::invalid_argument);
  CHECK(emotion_name(emotion_from_index(6)) == "sad");
}

TEST_CASE("phone symbols") {
  const auto p = phones_from_text("Hello, world");
  CHECK(p.length() == 12);
  CHECK(phones_to_text(p) == "hello, world");
  try {
    phones_from_text("abc#");
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find('#') != std::string::npos);
  }
}

TEST_CASE("feature config validation") {
  FeatureConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.hop_samples() == 200);
  CHECK(cfg.window_samples() == 800);
  cfg.frame_shift_ms = 60.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = FeatureConfig{};
  cfg.mel_channels = 4;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("mel file round trip and corruption") {
  const auto dir = testing::temp_dir("mel");
  MelSpectrogram m(3, 8);
  for (std::int64_t t = 0; t < 3; ++t)
    for (int c = 0; c < 8; ++c) m.at(t, c) = static_cast<float>(t * 10 + c) - 0.5f;
  write_mel(dir / "a.mel", m);
  CHECK(read_mel(dir / "a.mel") == m);
  CHECK(std::filesystem::file_size(dir / "a.mel") == 8 + 3 * 8 * 4);

  auto bytes = testing::read_file(dir / "a.mel");
  std::ofstream(dir / "short.mel", std::ios::binary) << bytes.substr(0, bytes.size() - 3);
  CHECK_THROWS(read_mel(dir / "short.mel"));
  std::ofstream(dir / "long.mel", std::ios::binary) << bytes << "xx";
  CHECK_THROWS(read_mel(dir / "long.mel"));
}

TEST_CASE("pitch band for 80 channels") {
  const auto band = pitch_band(FeatureConfig{});
  CHECK(band.lo == 2);
  CHECK(band.hi == 22);
  CHECK(band.center == doctest::Approx(11.5));
}

TEST_CASE("render is deterministic and zero strength has no prosody") {
  const auto phones = phones_from_text("abcde");
  const auto spk = profile(0, {0.3, -0.2, 0.1, 0.05});
  const auto a = render_utterance(phones, spk, EmotionLabel::kHappy, 1.2, 7);
  const auto b = render_utterance(phones, spk, EmotionLabel::kHappy, 1.2, 7);
  CHECK(a == b);
  CHECK(a.channels() == 80);
  const auto base = render_base(phones, spk, 7);
  CHECK(render_utterance(phones, spk, EmotionLabel::kNeutral, 0.0, 7) == base);
  // Expressive emotion at zero strength also reduces to the base.
  CHECK(render_utterance(phones, spk, EmotionLabel::kAngry, 0.0, 7) == base);
  CHECK(render_utterance(phones, spk, EmotionLabel::kHappy, 1.2, 8) != a);
}

TEST_CASE("render rejects bad inputs") {
  const auto spk = profile(0, {0.1, 0.1, 0.1, 0.1});
  CHECK_THROWS_AS(render_utterance(phones_from_text("ab"), spk, EmotionLabel::kHappy, -0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(render_utterance(PhoneSequence{}, spk, EmotionLabel::kHappy, 1.0, 1), std::invalid_argument);
  PhoneSequence bad;
  bad.symbols = {1, 99};
  CHECK_THROWS_AS(render_utterance(bad, spk, EmotionLabel::kHappy, 1.0, 1), std::invalid_argument);
}

TEST_CASE("phone durations lie in [4, 10] and sum to the frame count") {
  const auto phones = phones_from_text("the quick brown fox");
  const auto d = phone_durations(phones, 3);
  for (int v : d) {
    CHECK(v >= 4);
    CHECK(v <= 10);
  }
  const auto m = render_base(phones, profile(0, {0, 0, 0, 0}), 3);
  CHECK(m.frames() == std::accumulate(d.begin(), d.end(), 0));
}

TEST_CASE("prosody amplitude is linear in strength") {
  const FeatureConfig cfg;
  const auto band = pitch_band(cfg);
  const auto& p = prosody_params(EmotionLabel::kSurprise);
  for (double s : {0.5, 1.0, 2.0}) {
    const auto track = prosody_track(EmotionLabel::kSurprise, s, 64, cfg);
    for (std::int64_t t = 0; t < 64; ++t) {
      const double g = std::sin(2.0 * M_PI * p.rate_hz * static_cast<double>(t) * 0.0125);
      CHECK(track.pitch_center[static_cast<std::size_t>(t)] ==
            doctest::Approx(band.center + s * (p.pitch_offset + p.pitch_amplitude * g)));
      CHECK(track.log_energy[static_cast<std::size_t>(t)] ==
            doctest::Approx(s * (p.energy_offset + p.energy_amplitude * g)));
    }
  }
  // Variance of the planted pitch curve scales with strength squared.
  const double v1 = track_variance(EmotionLabel::kHappy, 1.0, 60);
  const double v2 = track_variance(EmotionLabel::kHappy, 2.0, 60);
  CHECK(v2 == doctest::Approx(4.0 * v1));
}

TEST_CASE("stronger rendering has a more variable pitch band") {
  const auto phones = phones_from_text("abcdefgh");
  const auto spk = profile(0, {0.2, 0.1, -0.3, 0.0});
  const auto weak = render_utterance(phones, spk, EmotionLabel::kHappy, 1.0, 7);
  const auto strong = render_utterance(phones, spk, EmotionLabel::kHappy, 2.0, 7);
  const double vw = evalkit::variance(evalkit::pitch_proxy_contour(weak));
  const double vs = evalkit::variance(evalkit::pitch_proxy_contour(strong));
  CHECK(vs > vw);
  CHECK(track_variance(EmotionLabel::kHappy, 2.0, strong.frames()) >
        track_variance(EmotionLabel::kHappy, 1.0, weak.frames()));
}

TEST_CASE("timbre separates multiplicatively") {
  const auto phones = phones_from_text("hello");
  const auto a = profile(0, {0.4, -0.1, 0.2, 0.3});
  const auto b = profile(1, {-0.5, 0.3, 0.0, -0.2});
  const auto ma = render_utterance(phones, a, EmotionLabel::kFear, 1.3, 11);
  const auto mb = render_utterance(phones, b, EmotionLabel::kFear, 1.3, 11);
  const auto ea = timbre_envelope(a, 80);
  const auto eb = timbre_envelope(b, 80);
  REQUIRE(ma.frames() == mb.frames());
  double worst = 0.0;
  for (std::int64_t t = 0; t < ma.frames(); ++t)
    for (int c = 0; c < 80; ++c)
      worst = std::max(worst, std::abs((ma.at(t, c) - mb.at(t, c)) - (ea[static_cast<std::size_t>(c)] - eb[static_cast<std::size_t>(c)])));
  CHECK(worst < 1e-5);
}

TEST_CASE("default spec arithmetic and validation") {
  const auto spec = default_corpus_spec();
  CHECK(spec.speakers.size() == 3);
  CHECK(spec.total_utterances() == 1800);
  auto two_targets = spec;
  two_targets.speakers[1].role = SpeakerRole::kTarget;
  CHECK_THROWS_AS(two_targets.validate(), std::invalid_argument);
  auto empty = spec;
  for (auto& s : empty.speakers) s.utterances_per_emotion = 0;
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
}

TEST_CASE("spec file parsing") {
  const auto spec = corpus_spec_from_json(R"({"speakers":[{"name":"t","role":"target","count":3},
      {"name":"s","role":"source","count":1}],"min_phones":2,"max_phones":3})");
  CHECK(spec.total_utterances() == 3 + 7);
  CHECK_THROWS(corpus_spec_from_json(R"({"speakers":[{"name":"s","role":"source","count":1}]})"));
}

TEST_CASE("timbres are spread apart") {
  const auto t = draw_timbres(5, 3);
  REQUIRE(t.size() == 3);
  for (const auto& v : t) CHECK(v.size() == 4);
  CHECK(draw_timbres(5, 3) == t);
}

TEST_CASE("generate and load round trip") {
  const auto dir = testing::temp_dir("gen");
  const auto spec = testing::tiny_spec();
  const auto m = generate_corpus(spec, dir / "a", 7);
  CHECK(m.utterances.size() == spec.total_utterances());
  CHECK(m.speakers.size() == 3);
  std::set<std::string> uids;
  for (const auto& u : m.utterances) {
    uids.insert(u.uid);
    if (u.speaker == m.target_speaker()) CHECK(u.emotion == EmotionLabel::kNeutralT);
    else CHECK(u.emotion != EmotionLabel::kNeutralT);
    if (u.latent_strength == 0.0) CHECK(is_neutral(u.emotion));
  }
  CHECK(uids.size() == m.utterances.size());

  const auto loaded = load_manifest(dir / "a" / kManifestFileName);
  CHECK(loaded == m);
  const auto mels = load_features(loaded);
  for (std::size_t i = 0; i < mels.size(); ++i) CHECK(mels[i].frames() == loaded.utterances[i].n_frames);

  // Same seed, same bytes.
  generate_corpus(spec, dir / "b", 7);
  CHECK(testing::read_file(dir / "a" / kManifestFileName) == testing::read_file(dir / "b" / kManifestFileName));
  for (const auto& u : m.utterances)
    CHECK(testing::read_file(dir / "a" / u.mel_path) == testing::read_file(dir / "b" / u.mel_path));
  generate_corpus(spec, dir / "c", 8);
  CHECK(testing::read_file(dir / "a" / kManifestFileName) != testing::read_file(dir / "c" / kManifestFileName));
}

TEST_CASE("manifest errors") {
  const auto dir = testing::temp_dir("manifest_err");
  const auto m = generate_corpus(testing::tiny_spec(), dir, 3);
  const auto path = dir / kManifestFileName;
  const auto text = testing::read_file(path);

  // Deleted feature file names the uid.
  const auto victim = m.utterances[5];
  std::filesystem::remove(dir / victim.mel_path);
  try {
    load_manifest(path);
    FAIL("expected failure");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find(victim.uid) != std::string::npos);
  }
  write_mel(dir / victim.mel_path, MelSpectrogram(victim.n_frames, 80));

  // Truncated last line reports its line number.
  const auto cut = text.substr(0, text.size() - 20);
  const auto lines = static_cast<int>(std::count(cut.begin(), cut.end(), '\n')) + 1;
  std::ofstream(path, std::ios::trunc) << cut;
  try {
    load_manifest(path);
    FAIL("expected failure");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("line " + std::to_string(lines)) != std::string::npos);
  }
}

TEST_CASE("padding and masks") {
  CorpusManifest m;
  m.speakers = {profile(0, {0, 0, 0, 0})};
  m.speakers[0].role = SpeakerRole::kTarget;
  std::vector<MelSpectrogram> mels;
  for (int n : {50, 70}) {
    Utterance u;
    u.uid = "u" + std::to_string(n);
    u.emotion = EmotionLabel::kNeutralT;
    u.phones = phones_from_text(n == 50 ? "ab" : "abc");
    u.n_frames = n;
    m.utterances.push_back(u);
    mels.emplace_back(n, 80, 1.0f);
  }
  const auto b = collate(m, mels, {0, 1});
  CHECK(b.mels.size(1) == 70);
  CHECK(b.frame_mask.sum(1)[0].item<float>() == 50.0f);
  CHECK(b.frame_mask.sum(1)[1].item<float>() == 70.0f);
  CHECK(b.mels[0].narrow(0, 50, 20).abs().sum().item<float>() == 0.0f);
  CHECK(b.phones[0][2].item<std::int64_t>() == kPadSymbol);
  CHECK(b.stop_targets[0][49].item<float>() == 1.0f);
  CHECK(b.stop_targets[0][48].item<float>() == 0.0f);
  CHECK(b.stop_targets[1][69].item<float>() == 1.0f);
  CHECK(collate(m, mels, {0, 1}, 4).mels.size(1) == 72);
}

TEST_CASE("batch streams are deterministic and cover each epoch") {
  const auto dir = testing::temp_dir("stream");
  const auto m = generate_corpus(testing::tiny_spec(), dir, 5);
  const auto mels = load_features(m);
  std::vector<std::size_t> all(m.utterances.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (std::int64_t bucket : {1, 3}) {
    BatchStream a(m, mels, all, 4, 9, 2, bucket);
    BatchStream b(m, mels, all, 4, 9, 2, bucket);
    CHECK(a.epoch_order(0) == b.epoch_order(0));
    CHECK(a.epoch_order(0) != a.epoch_order(1));
    std::multiset<std::size_t> seen;
    for (const auto& batch : a.epoch_batches(2)) seen.insert(batch.begin(), batch.end());
    CHECK(seen == std::multiset<std::size_t>(all.begin(), all.end()));
    CHECK(a.batch_at(7).uids == b.batch_at(7).uids);
  }
  BatchStream big(m, mels, all, 1000, 1);
  CHECK(big.undersized());
  CHECK(big.batches_per_epoch() == 1);
  CHECK(big.next().size() == static_cast<std::int64_t>(all.size()));
  CHECK_THROWS_AS(BatchStream(m, mels, all, 0, 1), std::invalid_argument);
}

}  // TEST_SUITE
