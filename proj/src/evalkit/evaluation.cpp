#include "emodis/evalkit/evaluation.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "emodis/corpus/batching.hpp"
#include "emodis/corpus/generator.hpp"
#include "emodis/evalkit/pitch_proxy.hpp"
#include "emodis/util/random.hpp"

namespace emodis::evalkit {

namespace {

constexpr std::int64_t kEmbedChunk = 64;

std::string padded(int i, int width) {
  auto s = std::to_string(i);
  return std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
}

std::vector<std::string> speaker_names(const corpus::CorpusManifest& manifest) {
  std::vector<std::string> names(manifest.speakers.size());
  for (const auto& s : manifest.speakers) names.at(static_cast<std::size_t>(s.id)) = s.name;
  return names;
}

std::vector<std::string> emotion_names() {
  std::vector<std::string> names;
  for (auto e : corpus::kAllEmotions) names.emplace_back(corpus::emotion_name(e));
  return names;
}

}  // namespace

std::vector<corpus::PhoneSequence> held_out_sentences(const corpus::CorpusManifest& manifest, int count,
                                                      std::uint64_t seed) {
  std::set<std::vector<std::int64_t>> seen;
  for (const auto& u : manifest.utterances) seen.insert(u.phones.symbols);
  const auto spec = corpus::default_corpus_spec();
  std::vector<corpus::PhoneSequence> out;
  for (std::uint64_t attempt = 0; static_cast<int>(out.size()) < count; ++attempt) {
    auto phones = corpus::draw_phones(spec, util::mix_seed(seed, 0x73656e74ULL + attempt));
    if (seen.insert(phones.symbols).second) out.push_back(std::move(phones));
  }
  return out;
}

std::vector<ProbeItem> make_probe_set(const corpus::CorpusManifest& manifest, int n_sentences, std::uint64_t seed) {
  if (n_sentences < 1) throw std::invalid_argument("probe set needs at least one sentence");
  const auto sentences = held_out_sentences(manifest, n_sentences, seed);
  const auto spec = corpus::default_corpus_spec();
  std::vector<ProbeItem> items;
  for (int i = 0; i < n_sentences; ++i) {
    const auto render_seed = util::mix_seed(seed, 0x70726f62ULL + static_cast<std::uint64_t>(i));
    util::Rng rng(render_seed);
    for (auto emotion : corpus::kSourceEmotions) {
      // Strength is shared across speakers so only timbre differs.
      const double strength = corpus::is_neutral(emotion) ? 0.0 : rng.uniform(spec.min_strength, spec.max_strength);
      for (const auto& speaker : manifest.speakers) {
        ProbeItem item;
        item.uid = "probe_" + padded(i, 3) + "_" + speaker.name + "_" + std::string(corpus::emotion_name(emotion));
        item.speaker = speaker.id;
        item.emotion = emotion;
        item.latent_strength = strength;
        item.mel = corpus::render_utterance(sentences[static_cast<std::size_t>(i)], speaker, emotion, strength,
                                            render_seed, manifest.feature_config);
        items.push_back(std::move(item));
      }
    }
  }
  return items;
}

EmbeddingSet embed_probe_set(trainer::EmoDisModel& model, const std::vector<ProbeItem>& items) {
  if (items.empty()) throw std::invalid_argument("empty probe set");
  torch::NoGradGuard no_grad;
  const bool was_training = model->is_training();
  model->eval();
  auto edm = model->reference_edm();
  std::vector<torch::Tensor> es, ss;
  EmbeddingSet out;
  for (std::size_t begin = 0; begin < items.size(); begin += kEmbedChunk) {
    const auto end = std::min(items.size(), begin + static_cast<std::size_t>(kEmbedChunk));
    std::vector<const corpus::MelSpectrogram*> batch;
    for (auto i = begin; i < end; ++i) batch.push_back(&items[i].mel);
    auto [x, len] = corpus::pad_mels(batch);
    es.push_back(edm->emotion_encode(x, len));
    ss.push_back(edm->speaker_encode(x, len));
  }
  for (const auto& item : items) {
    out.uids.push_back(item.uid);
    out.emotions.push_back(corpus::to_index(item.emotion));
    out.speakers.push_back(item.speaker);
  }
  out.e = torch::cat(es, 0);
  out.s = torch::cat(ss, 0);
  if (was_training) model->train();
  return out;
}

const ProbeReport& DisentangleResult::probe(ProbeTask task) const {
  for (const auto& p : probes) {
    if (p.task == task) return p;
  }
  throw std::out_of_range("probe " + probe_task_name(task) + " was not run");
}

nlohmann::json DisentangleResult::to_json() const {
  auto j = nlohmann::json::array();
  for (const auto& p : probes) j.push_back(p.to_json());
  return {{"probes", j},
          {"n_items", embeddings.uids.size()},
          {"e_explained_variance", e_projection.explained},
          {"s_explained_variance", s_projection.explained}};
}

DisentangleResult evaluate_disentanglement(trainer::EmoDisModel& model, const corpus::CorpusManifest& manifest,
                                           const EvalOptions& options) {
  const auto items = make_probe_set(manifest, options.probe_sentences, options.seed);
  DisentangleResult r;
  r.embeddings = embed_probe_set(model, items);
  const auto split_seed = util::mix_seed(options.seed, 0x73706c74ULL);
  const auto& emb = r.embeddings;
  const auto emotions = emotion_names();
  const auto speakers = speaker_names(manifest);
  r.probes.push_back(fit_linear_probe(emb.e, emb.emotions, emb.uids, split_seed, ProbeTask::kEmotionOnE, emotions));
  r.probes.push_back(fit_linear_probe(emb.e, emb.speakers, emb.uids, split_seed, ProbeTask::kSpeakerOnE, speakers));
  r.probes.push_back(fit_linear_probe(emb.s, emb.speakers, emb.uids, split_seed, ProbeTask::kSpeakerOnS, speakers));
  r.probes.push_back(fit_linear_probe(emb.s, emb.emotions, emb.uids, split_seed, ProbeTask::kEmotionOnS, emotions));
  r.e_projection = project_embeddings_2d(emb.e);
  r.s_projection = project_embeddings_2d(emb.s);
  return r;
}

std::vector<StrengthSample> synthesize_test_set(const inference::Synthesizer& synth,
                                                const corpus::CorpusManifest& manifest,
                                                const std::vector<corpus::MelSpectrogram>& mels,
                                                const EvalOptions& options, bool all_scalars) {
  if (mels.size() != manifest.utterances.size()) throw std::invalid_argument("mels do not match the manifest");
  const auto sentences = held_out_sentences(manifest, options.test_sentences, util::mix_seed(options.seed, 0x74657374ULL));
  const auto target = manifest.target_speaker();
  std::vector<corpus::SpeakerId> sources;
  for (const auto& s : manifest.speakers) {
    if (s.role == corpus::SpeakerRole::kSource) sources.push_back(s.id);
  }
  if (sources.empty()) throw std::invalid_argument("corpus has no source speaker");

  std::vector<StrengthSample> out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    for (auto emotion : corpus::kExpressiveEmotions) {
      // Reference: a source-speaker corpus utterance of this emotion, source
      // speakers alternating over sentences.
      const auto source = sources[i % sources.size()];
      std::vector<std::size_t> candidates;
      for (std::size_t u = 0; u < manifest.utterances.size(); ++u) {
        const auto& utt = manifest.utterances[u];
        if (utt.speaker == source && utt.emotion == emotion) candidates.push_back(u);
      }
      if (candidates.empty()) {
        throw std::invalid_argument("no " + std::string(corpus::emotion_name(emotion)) + " utterance for source speaker " +
                                    std::to_string(source));
      }
      util::Rng rng(util::mix_seed(options.seed, i * 16 + static_cast<std::size_t>(corpus::to_index(emotion))));
      const auto ref = candidates[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(candidates.size()) - 1))];

      StrengthSample sample;
      sample.sentence = corpus::phones_to_text(sentences[i]);
      sample.emotion = emotion;
      sample.reference_uid = manifest.utterances[ref].uid;
      sample.source_speaker = source;
      for (std::size_t k = 0; k < (all_scalars ? kStrengthScalars.size() : 1); ++k) {
        inference::SynthesisRequest req;
        req.phones = sentences[i];
        req.target_speaker = target;
        req.reference_mel = mels[ref];
        req.strength_scalar = kStrengthScalars[k];
        auto res = synth.synthesize(req);
        sample.truncated[k] = res.truncated;
        sample.contours[k] = pitch_proxy_contour(res.mel);
        sample.mels[k] = std::move(res.mel);
      }
      out.push_back(std::move(sample));
    }
  }
  return out;
}

nlohmann::json StrengthResult::to_json() const {
  std::int64_t truncated = 0;
  for (const auto& s : samples) truncated += s.truncated[0] + s.truncated[1] + s.truncated[2];
  return {{"confusion", confusion.to_json()},
          {"diagonal", {confusion.diagonal(0), confusion.diagonal(1), confusion.diagonal(2)}},
          {"monotonic_fraction", monotonic},
          {"n_samples", samples.size()},
          {"truncated_syntheses", truncated}};
}

StrengthResult evaluate_strength(const inference::Synthesizer& synth, const corpus::CorpusManifest& manifest,
                                 const std::vector<corpus::MelSpectrogram>& mels, const EvalOptions& options) {
  StrengthResult r;
  r.samples = synthesize_test_set(synth, manifest, mels, options, true);
  for (const auto& s : r.samples) {
    StrengthTriple t;
    t.sentence = s.sentence;
    t.emotion = s.emotion;
    for (std::size_t k = 0; k < 3; ++k) {
      if (s.mels[k].frames() >= 1) t.variance[k] = variance(s.contours[k]);
    }
    r.triples.push_back(t);
  }
  r.confusion = strength_confusion(r.triples, util::mix_seed(options.seed, 0x74696573ULL));
  r.monotonic = monotonic_fraction(r.triples);
  return r;
}

nlohmann::json LeakageResult::to_json() const {
  auto j = report.to_json();
  j["verifier"] = verifier.to_json();
  j["reference_values"] = {{"target_upper_bound", 0.75}, {"cross_lower_bound", 0.17},
                           {"cos_to_target", 0.60},      {"cos_to_source", 0.28}};
  return j;
}

LeakageResult evaluate_leakage(const inference::Synthesizer& synth, const corpus::CorpusManifest& manifest,
                               const std::vector<corpus::MelSpectrogram>& mels, const EvalOptions& options,
                               const Verifier* verifier) {
  Verifier owned;
  if (!verifier) {
    owned = Verifier::train(manifest, mels, util::mix_seed(options.seed, 0x76726679ULL));
    verifier = &owned;
  }
  const auto samples = synthesize_test_set(synth, manifest, mels, options, false);
  std::vector<SynthesizedItem> items;
  for (const auto& s : samples) items.push_back({s.mels[0], s.source_speaker});
  LeakageResult r;
  r.verifier = verifier->report();
  r.report = leakage_cosine(items, manifest, mels, *verifier, util::mix_seed(options.seed, 0x6c65616bULL));
  return r;
}

}  // namespace emodis::evalkit
