#include "doctest_torch.hpp"

#include <limits>

#include "emodis/corpus/generator.hpp"
#include "emodis/inference/synthesizer.hpp"
#include "emodis/trainer/checkpoint.hpp"
#include "helpers.hpp"

using namespace emodis;
using namespace emodis::inference;

namespace {

trainer::EmoDisModel small_model() {
  auto cfg = testing::tiny_config();
  torch::manual_seed(31);
  return trainer::EmoDisModel(trainer::fit_model_config(cfg.model, 80, 3));
}

corpus::MelSpectrogram reference_mel() {
  auto spec = testing::tiny_spec();
  const auto timbres = corpus::draw_timbres(3, 3);
  corpus::SpeakerProfile p;
  p.id = 1;
  p.name = "src";
  p.timbre = timbres[1];
  return corpus::render_utterance(corpus::draw_phones(spec, 8), p, corpus::EmotionLabel::kAngry, 1.0, 8);
}

SynthesisRequest request() {
  SynthesisRequest r;
  r.phones = corpus::draw_phones(testing::tiny_spec(), 12);
  r.target_speaker = 0;
  r.reference_mel = reference_mel();
  r.max_frames = 12;
  return r;
}

}  // namespace

TEST_SUITE("inference") {

TEST_CASE("synthesis is deterministic") {
  auto model = small_model();
  const auto synth = Synthesizer::from_model(model);
  const auto a = synth.synthesize(request());
  const auto b = synth.synthesize(request());
  CHECK(a.mel.data() == b.mel.data());
  CHECK(a.mel.channels() == 80);
  CHECK(a.mel.frames() > 0);
  CHECK(a.mel.frames() <= 12);
}

TEST_CASE("embedding extraction scales linearly") {
  auto model = small_model();
  const auto synth = Synthesizer::from_model(model);
  const auto mel = reference_mel();
  const auto e1 = synth.extract_emotion_embedding(mel, 1.0);
  CHECK(e1.sizes() == torch::IntArrayRef({256}));
  CHECK(torch::equal(synth.extract_emotion_embedding(mel, 2.0), 2.0 * e1));
  CHECK(synth.extract_emotion_embedding(mel, 0.0).abs().max().item<double>() == 0.0);
}

TEST_CASE("only the backbone and the reference emotion encoder are reachable") {
  auto model = small_model();
  const auto synth = Synthesizer::from_model(model);
  for (const auto& name : synth.parameter_names()) {
    CHECK(name.find("speaker_encoder") == std::string::npos);
    CHECK(name.find("classifier") == std::string::npos);
  }
  const auto before = synth.synthesize(request());
  {
    torch::NoGradGuard g;
    const auto nan = std::numeric_limits<float>::quiet_NaN();
    for (auto& p : model->reference_edm()->speaker_encoder()->parameters()) p.fill_(nan);
    for (const auto& edm : {model->reference_edm(), model->synthesis_edm()}) {
      edm->emotion_classifier()->weight.fill_(nan);
      edm->speaker_classifier()->weight.fill_(nan);
      edm->adversarial_classifier()->weight.fill_(nan);
    }
    for (auto& p : model->synthesis_edm()->parameters()) p.fill_(nan);
  }
  const auto after = synth.synthesize(request());
  CHECK(before.mel.data() == after.mel.data());
}

TEST_CASE("runaway decoding is truncated and flagged") {
  auto model = small_model();
  {
    torch::NoGradGuard g;
    // stop logits pinned far below the threshold
    for (auto& item : model->backbone()->named_parameters()) {
      if (item.key().find("stop_proj") != std::string::npos) {
        item.value().zero_();
        if (item.key().find("bias") != std::string::npos) item.value().fill_(-50.0);
      }
    }
  }
  const auto synth = Synthesizer::from_model(model);
  auto req = request();
  req.max_frames = 7;
  const auto r = synth.synthesize(req);
  CHECK(r.truncated);
  CHECK(r.mel.frames() == 7);
}

TEST_CASE("invalid requests are rejected") {
  auto model = small_model();
  const auto synth = Synthesizer::from_model(model);
  auto r = request();
  r.strength_scalar = -1.0;
  CHECK_THROWS_AS(synth.synthesize(r), std::invalid_argument);
  r = request();
  r.strength_scalar = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(synth.synthesize(r), std::invalid_argument);
  r = request();
  r.target_speaker = 3;
  CHECK_THROWS_AS(synth.synthesize(r), std::invalid_argument);
  r = request();
  r.phones = {};
  CHECK_THROWS_AS(synth.synthesize(r), std::invalid_argument);
  r = request();
  r.reference_mel = corpus::MelSpectrogram();
  CHECK_THROWS_AS(synth.synthesize(r), std::invalid_argument);
}

TEST_CASE("checkpoint loading gives the same synthesizer") {
  auto model = small_model();
  const auto path = testing::temp_dir("synth_ckpt") / "m.pt";
  auto cfg = testing::tiny_config();
  cfg.model = model->config();
  trainer::save_checkpoint(path, model, cfg, 0);
  const auto a = Synthesizer::from_model(model).synthesize(request());
  const auto b = Synthesizer::from_checkpoint(path).synthesize(request());
  CHECK(a.mel.data() == b.mel.data());
}

}  // TEST_SUITE
