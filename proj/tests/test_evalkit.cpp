#include "doctest_torch.hpp"

#include <cmath>
#include <map>

#include "emodis/corpus/generator.hpp"
#include "emodis/evalkit/evaluation.hpp"
#include "emodis/evalkit/leakage.hpp"
#include "emodis/evalkit/pitch_proxy.hpp"
#include "emodis/evalkit/plots.hpp"
#include "emodis/evalkit/probe.hpp"
#include "emodis/evalkit/projection.hpp"
#include "emodis/evalkit/strength.hpp"
#include "emodis/evalkit/verifier.hpp"
#include "helpers.hpp"

using namespace emodis;
using namespace emodis::evalkit;

namespace {

std::vector<std::string> make_uids(std::int64_t n) {
  std::vector<std::string> out;
  for (std::int64_t i = 0; i < n; ++i) out.push_back("u" + std::to_string(i));
  return out;
}

StrengthTriple triple(double a, double b, double c) {
  StrengthTriple t;
  t.sentence = "s";
  t.variance = {a, b, c};
  return t;
}

}  // namespace

TEST_SUITE("evalkit") {

TEST_CASE("probe separates well-separated clusters perfectly") {
  torch::manual_seed(1);
  const std::int64_t per = 30;
  auto x = torch::randn({3 * per, 6}, torch::kDouble) * 0.1;
  std::vector<std::int64_t> labels;
  for (int k = 0; k < 3; ++k) {
    x.narrow(0, k * per, per).select(1, k) += 5.0;
    for (int i = 0; i < per; ++i) labels.push_back(k);
  }
  const auto r = fit_linear_probe(x, labels, make_uids(3 * per), 7, ProbeTask::kSpeakerOnE);
  CHECK(r.accuracy == 1.0);
  CHECK(r.chance == doctest::Approx(1.0 / 3));
  CHECK(r.n_classes == 3);
  CHECK(r.n_train + r.n_test == 3 * per);
  CHECK(r.n_test == 27);
  CHECK(r.to_json()["task"] == probe_task_name(ProbeTask::kSpeakerOnE));
}

TEST_CASE("probe on label-independent features stays near chance") {
  torch::manual_seed(2);
  const std::int64_t n = 300;
  const auto x = torch::randn({n, 8}, torch::kDouble);
  std::vector<std::int64_t> labels;
  for (std::int64_t i = 0; i < n; ++i) labels.push_back(i % 3);
  const auto r = fit_linear_probe(x, labels, make_uids(n), 3, ProbeTask::kSpeakerOnE);
  CHECK(std::abs(r.accuracy - 1.0 / 3) <= 0.15);
}

TEST_CASE("probe needs ten items per class and names the short one") {
  const auto x = torch::randn({25, 4}, torch::kDouble);
  std::vector<std::int64_t> labels(25, 0);
  for (int i = 18; i < 25; ++i) labels[static_cast<std::size_t>(i)] = 1;
  CHECK_THROWS_WITH_AS(fit_linear_probe(x, labels, make_uids(25), 1, ProbeTask::kEmotionOnE, {"calm", "angry"}),
                       doctest::Contains("angry"), std::invalid_argument);
}

TEST_CASE("pca: clusters, explained ratio, idempotence, sign convention") {
  torch::manual_seed(5);
  auto x = torch::randn({40, 10}, torch::kDouble) * 0.01;
  x.narrow(0, 0, 20).select(1, 3) += 4.0;
  x.narrow(0, 20, 20).select(1, 3) -= 4.0;
  x.select(1, 7) += torch::linspace(-1, 1, 40, torch::kDouble);
  const auto p = project_embeddings_2d(x);
  CHECK(p.coords.sizes() == torch::IntArrayRef({40, 2}));
  CHECK(p.warning.empty());
  const auto first = p.coords.select(1, 0);
  const bool split = first.narrow(0, 0, 20).min().item<double>() > first.narrow(0, 20, 20).max().item<double>() ||
                     first.narrow(0, 0, 20).max().item<double>() < first.narrow(0, 20, 20).min().item<double>();
  CHECK(split);
  CHECK(p.explained[0] > p.explained[1]);
  CHECK(p.explained[0] + p.explained[1] > 0.99);
  CHECK(p.explained[0] + p.explained[1] <= 1.0 + 1e-12);

  const auto again = project_embeddings_2d(p.coords);
  CHECK(torch::allclose(again.coords, p.coords, 1e-9, 1e-9));

  // oracle: centred SVD, each right singular vector signed by its largest-magnitude entry
  const auto centred = x - x.mean(0, true);
  auto v = std::get<2>(torch::linalg_svd(centred, false)).narrow(0, 0, 2).clone();
  for (int k = 0; k < 2; ++k) {
    const auto idx = v[k].abs().argmax().item<std::int64_t>();
    if (v[k][idx].item<double>() < 0) v[k] *= -1;
  }
  CHECK(torch::allclose(p.coords, centred.matmul(v.t()), 1e-9, 1e-9));
}

TEST_CASE("pca degenerate and undersized input") {
  const auto same = torch::ones({5, 4}, torch::kDouble);
  const auto p = project_embeddings_2d(same);
  CHECK(!p.warning.empty());
  CHECK(p.coords.abs().max().item<double>() == 0.0);
  CHECK_THROWS_AS(project_embeddings_2d(torch::randn({2, 4})), std::invalid_argument);
}

TEST_CASE("t-sne is deterministic") {
  torch::manual_seed(6);
  const auto x = torch::randn({30, 5}, torch::kDouble);
  const auto a = project_tsne(x, 5.0, 100);
  const auto b = project_tsne(x, 5.0, 100);
  CHECK(torch::equal(a.coords, b.coords));
  CHECK(torch::isfinite(a.coords).all().item<bool>());
}

TEST_CASE("contour of a time-constant mel is constant") {
  corpus::FeatureConfig fc;
  std::vector<float> data;
  for (int t = 0; t < 30; ++t) {
    for (int c = 0; c < fc.mel_channels; ++c) data.push_back(static_cast<float>(-0.05 * (c - 9) * (c - 9)));
  }
  const auto contour = pitch_proxy_contour(corpus::MelSpectrogram(30, fc.mel_channels, data));
  REQUIRE(contour.size() == 30);
  for (double v : contour) CHECK(v == doctest::Approx(contour[0]).epsilon(1e-9));
  CHECK(variance(contour) < 1e-12);
}

TEST_CASE("contour follows the generator's pitch track") {
  auto spec = testing::tiny_spec();
  spec.min_phones = spec.max_phones = 8;
  const auto timbres = corpus::draw_timbres(1, 2);
  corpus::SpeakerProfile p;
  p.timbre = timbres[0];
  for (auto e : corpus::kAllEmotions) {
    const auto phones = corpus::draw_phones(spec, 3);
    const auto mel = corpus::render_utterance(phones, p, e, 1.5, 3);
    const auto track = corpus::prosody_track(e, 1.5, mel.frames(), corpus::FeatureConfig{});
    const auto truth = moving_average(track.pitch_center, kContourSmoothing);
    if (variance(truth) == 0.0) continue;  // neutral has no pitch movement
    CHECK(pearson_correlation(pitch_proxy_contour(mel), truth) > 0.9);
  }
}

TEST_CASE("moving average, variance, correlation") {
  const auto m = moving_average({1, 2, 3, 4, 5}, 3);
  CHECK(m[0] == doctest::Approx(1.5));
  CHECK(m[2] == doctest::Approx(3.0));
  CHECK(m[4] == doctest::Approx(4.5));
  CHECK(variance({1, 3}) == doctest::Approx(1.0));
  CHECK(variance({2}) == 0.0);
  CHECK(pearson_correlation({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0));
  CHECK(pearson_correlation({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0));
}

TEST_CASE("strength confusion: ordered triples give the identity") {
  std::vector<StrengthTriple> ts;
  for (int i = 0; i < 20; ++i) ts.push_back(triple(1.0 + i, 2.0 + i, 3.0 + 2 * i));
  const auto c = strength_confusion(ts, 1);
  for (int l = 0; l < 3; ++l) CHECK(c.diagonal(l) == 1.0);
  CHECK(c.n_triples == 20);
  CHECK(monotonic_fraction(ts) == 1.0);

  std::vector<StrengthTriple> reversed{triple(3, 2, 1)};
  CHECK(strength_confusion(reversed, 1).rate[0][2] == 1.0);
  CHECK(monotonic_fraction(reversed) == 0.0);
}

TEST_CASE("strength confusion: full ties spread evenly") {
  std::vector<StrengthTriple> ts(3000, triple(1.0, 1.0, 1.0));
  const auto c = strength_confusion(ts, 5);
  for (int l = 0; l < 3; ++l) {
    double row = 0.0;
    for (int r = 0; r < 3; ++r) {
      CHECK(std::abs(c.rate[l][r] - 1.0 / 3) < 0.05);
      row += c.rate[l][r];
    }
    CHECK(row == doctest::Approx(1.0));
  }
}

TEST_CASE("strength confusion skips incomplete triples") {
  auto partial = triple(1, 2, 3);
  partial.variance[1].reset();
  std::vector<StrengthTriple> ts{partial, triple(1, 2, 3)};
  const auto c = strength_confusion(ts, 1);
  CHECK(c.n_triples == 1);
  CHECK(c.skipped == 1);
  CHECK_THROWS_AS(strength_confusion({partial}, 1), std::invalid_argument);
}

TEST_CASE("cosine") {
  const auto a = torch::randn({64});
  CHECK(cosine(a, a) == 1.0);
  CHECK(cosine(a, -a) == doctest::Approx(-1.0));
  CHECK(cosine(torch::tensor({1.0, 0.0}), torch::tensor({0.0, 2.0})) == doctest::Approx(0.0));
}

TEST_CASE("untrained verifier is rejected") {
  const auto dir = testing::temp_dir("eval_verifier");
  const auto manifest = corpus::generate_corpus(testing::tiny_spec(), dir, 2);
  const auto mels = corpus::load_features(manifest);
  const Verifier v;
  CHECK(!v.usable());
  CHECK_THROWS_AS(v.embed(mels), std::logic_error);
  std::vector<SynthesizedItem> items{{mels[0], 1}};
  CHECK_THROWS_AS(leakage_cosine(items, manifest, mels, v, 1), std::invalid_argument);

  const auto trained = Verifier::train(manifest, mels, 1, 1);
  CHECK(trained.trained());
  CHECK(trained.embed(mels).sizes() == torch::IntArrayRef({static_cast<std::int64_t>(mels.size()), 64}));
}

TEST_CASE("probe set is a full factorial over held-out sentences") {
  const auto dir = testing::temp_dir("eval_probe_set");
  const auto manifest = corpus::generate_corpus(testing::tiny_spec(), dir, 3);
  const auto sentences = held_out_sentences(manifest, 4, 1);
  CHECK(sentences.size() == 4);
  for (const auto& s : sentences) {
    for (const auto& u : manifest.utterances) CHECK(!(u.phones == s));
  }
  const auto items = make_probe_set(manifest, 4, 1);
  CHECK(items.size() == 4 * manifest.speakers.size() * 7);
  std::map<std::pair<int, int>, int> cells;
  for (const auto& it : items) ++cells[{static_cast<int>(it.speaker), corpus::to_index(it.emotion)}];
  CHECK(cells.size() == manifest.speakers.size() * 7);
  for (const auto& [k, n] : cells) CHECK(n == 4);
}

TEST_CASE("svg writers") {
  const auto s = scatter_svg({{0.0, 1.0}, {2.0, -1.0}}, {0, 1}, {"a", "b"}, "points");
  CHECK(s.rfind("<svg", 0) == 0);
  CHECK(s.find("</svg>") != std::string::npos);
  CHECK(s.find("points") != std::string::npos);
  const auto l = lines_svg({{"weak", {1, 2, 3}}, {"strong", {2, 4, 1}}}, "contours", "frame", "channel");
  CHECK(l.find("strong") != std::string::npos);
  const auto h = heatmap_svg({{1, 0}, {0, 1}}, {"r1", "r2"}, {"c1", "c2"}, "grid");
  CHECK(h.find("c2") != std::string::npos);
  const auto path = testing::temp_dir("svg") / "nested" / "x.svg";
  write_text(path, h);
  CHECK(testing::read_file(path) == h);
}

}  // TEST_SUITE
