#include "emodis/evalkit/leakage.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "emodis/util/random.hpp"

namespace emodis::evalkit {

nlohmann::json LeakageReport::to_json() const {
  return {{"cos_to_target", cos_to_target},         {"cos_to_source", cos_to_source},
          {"target_upper_bound", target_upper_bound}, {"cross_lower_bound", cross_lower_bound},
          {"gap", gap()},                           {"n_synthesized", n_synthesized}};
}

double cosine(const torch::Tensor& a, const torch::Tensor& b) {
  const auto x = a.detach().to(torch::kFloat64).flatten();
  const auto y = b.detach().to(torch::kFloat64).flatten();
  if (x.numel() != y.numel()) throw std::invalid_argument("cosine of vectors with different sizes");
  const double nx = x.norm().item<double>();
  const double ny = y.norm().item<double>();
  if (nx == 0.0 || ny == 0.0) return 0.0;
  if (x.data_ptr() == y.data_ptr() || torch::equal(x, y)) return 1.0;
  return std::clamp(x.dot(y).item<double>() / (nx * ny), -1.0, 1.0);
}

namespace {

double mean_pair_cosine(const torch::Tensor& a, const std::vector<std::int64_t>& ia, const torch::Tensor& b,
                        const std::vector<std::int64_t>& ib) {
  double sum = 0.0;
  for (std::size_t k = 0; k < ia.size(); ++k) sum += cosine(a[ia[k]], b[ib[k]]);
  return ia.empty() ? 0.0 : sum / static_cast<double>(ia.size());
}

}  // namespace

LeakageReport leakage_cosine(const std::vector<SynthesizedItem>& synthesized, const corpus::CorpusManifest& manifest,
                             const std::vector<corpus::MelSpectrogram>& mels, const Verifier& verifier,
                             std::uint64_t seed) {
  if (!verifier.trained()) throw std::invalid_argument("leakage needs a trained verifier");
  if (!verifier.usable()) {
    throw std::invalid_argument("verifier held-out accuracy " + std::to_string(verifier.report().heldout_accuracy) +
                                " is below " + std::to_string(kVerifierMinAccuracy));
  }
  if (synthesized.empty()) throw std::invalid_argument("no synthesized utterances to score");
  if (mels.size() != manifest.utterances.size()) throw std::invalid_argument("mels do not match the manifest");

  const auto target = manifest.target_speaker();
  std::map<int, std::vector<const corpus::MelSpectrogram*>> real;
  for (std::size_t i = 0; i < mels.size(); ++i) real[manifest.utterances[i].speaker].push_back(&mels[i]);
  if (real[target].size() < 2) throw std::invalid_argument("need at least two real target utterances");
  std::map<int, torch::Tensor> real_emb;
  for (const auto& [spk, list] : real) real_emb[spk] = verifier.embed(list);

  std::vector<corpus::MelSpectrogram> synth_mels;
  for (const auto& s : synthesized) synth_mels.push_back(s.mel);
  const auto synth_emb = verifier.embed(synth_mels);

  util::Rng rng(seed);
  auto pick = [&](const torch::Tensor& t) { return rng.integer(0, t.size(0) - 1); };

  LeakageReport r;
  r.n_synthesized = static_cast<std::int64_t>(synthesized.size());
  double to_target = 0.0, to_source = 0.0;
  for (std::size_t i = 0; i < synthesized.size(); ++i) {
    const auto src = synthesized[i].source_speaker;
    if (!real_emb.count(src) || src == target) {
      throw std::invalid_argument("synthesized item references speaker " + std::to_string(src) +
                                  " which is not a source speaker of the corpus");
    }
    const auto one = synth_emb[static_cast<std::int64_t>(i)];
    for (std::int64_t k = 0; k < kLeakagePairsPerItem; ++k) {
      to_target += cosine(one, real_emb[target][pick(real_emb[target])]);
      to_source += cosine(one, real_emb[src][pick(real_emb[src])]);
    }
  }
  const auto pairs = static_cast<double>(synthesized.size() * kLeakagePairsPerItem);
  r.cos_to_target = to_target / pairs;
  r.cos_to_source = to_source / pairs;

  // Disjoint random pairs of real target utterances.
  const auto& te = real_emb[target];
  std::vector<std::int64_t> perm(static_cast<std::size_t>(te.size(0)));
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<std::int64_t>(i);
  for (std::size_t i = perm.size(); i > 1; --i) {
    std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(i) - 1))]);
  }
  std::vector<std::int64_t> ia, ib;
  for (std::size_t i = 0; i + 1 < perm.size(); i += 2) {
    ia.push_back(perm[i]);
    ib.push_back(perm[i + 1]);
  }
  r.target_upper_bound = mean_pair_cosine(te, ia, te, ib);

  // Each target utterance against a random real source utterance.
  double cross = 0.0;
  std::int64_t n_cross = 0;
  for (std::int64_t i = 0; i < te.size(0); ++i) {
    for (const auto& [spk, emb] : real_emb) {
      if (spk == target) continue;
      cross += cosine(te[i], emb[pick(emb)]);
      ++n_cross;
    }
  }
  r.cross_lower_bound = n_cross ? cross / static_cast<double>(n_cross) : 0.0;
  return r;
}

}  // namespace emodis::evalkit
