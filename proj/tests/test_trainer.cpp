#include "doctest_torch.hpp"

#include <cmath>

#include "emodis/corpus/batching.hpp"
#include "emodis/corpus/generator.hpp"
#include "emodis/trainer/checkpoint.hpp"
#include "emodis/trainer/config.hpp"
#include "emodis/trainer/objective.hpp"
#include "emodis/trainer/trainer.hpp"
#include "helpers.hpp"

using namespace emodis;
using namespace emodis::trainer;

namespace {

struct TinyCorpus {
  std::filesystem::path dir;
  corpus::CorpusManifest manifest;
  std::vector<corpus::MelSpectrogram> mels;
};

const TinyCorpus& tiny_corpus() {
  static const TinyCorpus c = [] {
    TinyCorpus t;
    t.dir = testing::temp_dir("trainer_corpus");
    t.manifest = corpus::generate_corpus(testing::tiny_spec(), t.dir, 5);
    t.mels = corpus::load_features(t.manifest);
    return t;
  }();
  return c;
}

EmoDisModel tiny_model(const TrainConfig& cfg) {
  const auto& c = tiny_corpus();
  torch::manual_seed(cfg.seed);
  return EmoDisModel(fit_model_config(cfg.model, c.manifest.feature_config.mel_channels,
                                      static_cast<std::int64_t>(c.manifest.speakers.size())));
}

corpus::TrainingBatch fixed_batch() {
  const auto& c = tiny_corpus();
  return corpus::collate(c.manifest, c.mels, {0, 13, 20, 31}, 2);
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("config json round trip and validation") {
  auto cfg = testing::tiny_config();
  cfg.alpha = 0.1;
  cfg.ablation = Ablation::kWithoutOrt;
  cfg.loss_mode = backbone::LossMode::kMae;
  cfg.bucket_factor = 3;
  const auto back = nlohmann::json(cfg).get<TrainConfig>();
  CHECK(nlohmann::json(back) == nlohmann::json(cfg));
  CHECK(back.fingerprint() == cfg.fingerprint());

  auto j = nlohmann::json(cfg);
  j["learning_rat"] = 1.0;
  CHECK_THROWS_WITH_AS(j.get<TrainConfig>(), doctest::Contains("learning_rat"), std::invalid_argument);

  TrainConfig bad;
  bad.beta = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {};
  bad.alpha = -0.1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(parse_ablation("wo_3ort"), std::invalid_argument);
}

TEST_CASE("fingerprint ignores run length but tracks the objective") {
  auto a = testing::tiny_config();
  auto b = a;
  b.max_steps = 17;
  b.log_interval = 9;
  CHECK(a.fingerprint() == b.fingerprint());
  b.beta = 0.4;
  CHECK(a.fingerprint() != b.fingerprint());
}

TEST_CASE("learning rate warms up linearly") {
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.warmup_steps = 500;
  CHECK(scheduled_learning_rate(cfg, 0) == doctest::Approx(2e-6));
  CHECK(scheduled_learning_rate(cfg, 249) == doctest::Approx(5e-4));
  CHECK(scheduled_learning_rate(cfg, 499) == doctest::Approx(1e-3));
  CHECK(scheduled_learning_rate(cfg, 4000) == doctest::Approx(1e-3));
  cfg.warmup_steps = 0;
  CHECK(scheduled_learning_rate(cfg, 0) == 1e-3);
}

TEST_CASE("total is the exact sum of the four terms") {
  CHECK(compose_total(2.0, 1.0, 1.0, 0.5) == 4.5);
  auto cfg = testing::tiny_config();
  auto model = tiny_model(cfg);
  const auto r = total_loss(model, fixed_batch(), cfg);
  const auto& L = r.losses;
  CHECK(torch::equal(L.total, compose_total(L.taco.total, L.edm.total, L.edmd.total, L.l_emo)));
  CHECK(std::isfinite(L.total.item<double>()));
  const auto rec = L.to_record();
  for (const char* k : {"l_taco", "l_edm", "l_edmd", "l_emo", "total"}) CHECK(rec.contains(k));
}

TEST_CASE("ablation routing") {
  auto cfg = testing::tiny_config();
  CHECK(cfg.reference_alpha() == doctest::Approx(0.02));
  cfg.ablation = Ablation::kWithoutOrt;
  CHECK(cfg.reference_alpha() == 0.0);
  CHECK(cfg.synthesized_edm_enabled());

  cfg.ablation = Ablation::kWithout2Ort;
  CHECK(cfg.reference_alpha() == 0.0);
  CHECK(!cfg.synthesized_edm_enabled());
  auto model = tiny_model(cfg);
  const auto r = total_loss(model, fixed_batch(), cfg);
  CHECK(r.losses.edmd.total.item<double>() == 0.0);
  CHECK(r.losses.l_emo.item<double>() > 0.0);
}

TEST_CASE("zero orthogonality weight sends no gradient through the ort term") {
  auto cfg = testing::tiny_config();
  cfg.ablation = Ablation::kWithoutOrt;
  auto model = tiny_model(cfg);
  const auto r = total_loss(model, fixed_batch(), cfg);
  const auto ort_term = r.losses.edm.l_ort * cfg.reference_alpha();
  ort_term.backward();
  for (const auto& p : model->parameters()) {
    if (p.grad().defined()) CHECK(p.grad().abs().max().item<double>() == 0.0);
  }
}

TEST_CASE("decoder-side speaker branch stops at the predicted mel by default") {
  auto cfg = testing::tiny_config();
  cfg.alpha = 0.0;
  cfg.beta = 0.0;
  auto model = tiny_model(cfg);
  auto batch = fixed_batch();
  auto r = total_loss(model, batch, cfg);
  (r.losses.edmd.l_adv + r.losses.edmd.l_sc).backward();
  for (const auto& p : model->backbone()->parameters()) {
    if (p.grad().defined()) CHECK(p.grad().abs().max().item<double>() == 0.0);
  }
  model->zero_grad();
  r = total_loss(model, batch, cfg);
  r.losses.edmd.l_ec.backward();
  double ec_reached = 0.0;
  for (const auto& p : model->backbone()->parameters()) {
    if (p.grad().defined()) ec_reached += p.grad().abs().sum().item<double>();
  }
  CHECK(ec_reached > 0.0);
  model->zero_grad();
  cfg.decoder_adv_backprop = true;
  r = total_loss(model, batch, cfg);
  r.losses.edmd.l_adv.backward();
  double reached = 0.0;
  for (const auto& p : model->backbone()->parameters()) {
    if (p.grad().defined()) reached += p.grad().abs().sum().item<double>();
  }
  CHECK(reached > 0.0);
}

TEST_CASE("checkpoint round trip reproduces forward outputs bit-identically") {
  auto cfg = testing::tiny_config();
  auto model = tiny_model(cfg);
  const auto dir = testing::temp_dir("ckpt_roundtrip");
  const auto path = dir / "a.pt";
  save_checkpoint(path, model, cfg, 42);
  auto ck = load_checkpoint(path, cfg);
  CHECK(ck.step == 42);
  CHECK(ck.warnings.empty());
  CHECK(ck.fingerprint == cfg.fingerprint());
  model->eval();
  ck.model->eval();
  const auto batch = fixed_batch();
  const auto a = total_loss(model, batch, cfg);
  const auto b = total_loss(ck.model, batch, cfg);
  CHECK(torch::equal(a.decoder.mel_after, b.decoder.mel_after));
  CHECK(torch::equal(a.e_ref, b.e_ref));
  CHECK(torch::equal(a.losses.total, b.losses.total));

  // the archive records its file stem, so compare same-named files
  std::filesystem::create_directories(dir / "again");
  save_checkpoint(dir / "again" / "a.pt", ck.model, ck.config, 42);
  CHECK(testing::read_file(path) == testing::read_file(dir / "again" / "a.pt"));

  auto other = cfg;
  other.alpha = 0.5;
  CHECK(load_checkpoint(path, other).warnings.size() == 1);
}

TEST_CASE("wrong checkpoint version is rejected") {
  const auto path = testing::temp_dir("ckpt_version") / "old.pt";
  torch::serialize::OutputArchive archive;
  archive.write("format_version", c10::IValue(kCheckpointVersion + 1));
  archive.save_to(path.string());
  CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("version"), std::runtime_error);
  CHECK_THROWS_AS(load_checkpoint(path.parent_path() / "missing.pt"), std::runtime_error);
}

TEST_CASE("zero-step training leaves only the initial checkpoint") {
  const auto& c = tiny_corpus();
  auto cfg = testing::tiny_config();
  cfg.max_steps = 0;
  const auto dir = testing::temp_dir("train_zero");
  const auto res = train(cfg, c.manifest, c.mels, dir);
  CHECK(res.final_step == 0);
  CHECK(res.metrics.empty());
  const RunLayout run{dir};
  CHECK(std::filesystem::exists(run.step_checkpoint(0)));
  CHECK(std::filesystem::exists(run.latest_checkpoint()));
  CHECK(read_metrics(run.metrics()).empty());
}

TEST_CASE("resume continues the step counter without a loss spike") {
  const auto& c = tiny_corpus();
  auto cfg = testing::tiny_config();
  cfg.max_steps = 6;
  cfg.save_interval = 3;
  const auto dir = testing::temp_dir("train_resume");
  const auto first = train(cfg, c.manifest, c.mels, dir);
  REQUIRE(first.metrics.size() == 6);
  const RunLayout run{dir};

  auto more = cfg;
  more.max_steps = 9;
  TrainOptions opts;
  opts.resume_from = run.latest_checkpoint();
  const auto second = train(more, c.manifest, c.mels, dir, opts);
  CHECK(second.final_step == 9);
  REQUIRE(second.metrics.size() == 3);
  CHECK(second.metrics.front()["step"] == 7);
  const double before = first.metrics.back()["l_taco"];
  const double after = second.metrics.front()["l_taco"];
  CHECK(after <= 2.0 * before);
  CHECK(read_metrics(run.metrics()).size() == 9);

  // replaying from step 3 lands on the same batches as the uninterrupted run
  const auto replay_dir = testing::temp_dir("train_replay");
  std::filesystem::create_directories(replay_dir);
  TrainOptions from3;
  from3.resume_from = run.step_checkpoint(3);
  const auto replay = train(cfg, c.manifest, c.mels, replay_dir, from3);
  CHECK(replay.final_step == 6);
  CHECK(replay.metrics.front()["step"] == 4);
}

}  // TEST_SUITE
