#include "emodis/cli/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "emodis/corpus/generator.hpp"
#include "emodis/evalkit/evaluation.hpp"
#include "emodis/evalkit/plots.hpp"
#include "emodis/inference/synthesizer.hpp"
#include "emodis/trainer/checkpoint.hpp"
#include "emodis/trainer/trainer.hpp"

namespace emodis::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
  if (const char* env = std::getenv("EMODIS_SEED"); env && *env) {
    std::size_t used = 0;
    const auto value = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument(std::string("EMODIS_SEED is not an integer: ") + env);
    return value;
  }
  return flag.value_or(fallback);
}

namespace {

// Runtime failures that carry their own message.
struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_jsonl(const fs::path& path, const std::vector<json>& records) {
  std::ostringstream o;
  for (const auto& r : records) o << r.dump() << "\n";
  evalkit::write_text(path, o.str());
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeFailure("cannot read " + path.string());
  std::vector<json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

// Manifest recorded next to a checkpoint's run directory, if any.
std::optional<fs::path> manifest_for_checkpoint(const fs::path& checkpoint) {
  for (auto dir = checkpoint.parent_path(); !dir.empty(); dir = dir.parent_path()) {
    const auto ref = dir / "manifest.ref";
    if (fs::exists(ref)) {
      std::ifstream in(ref);
      std::string line;
      std::getline(in, line);
      if (!line.empty()) return fs::path(line);
    }
    if (dir == dir.parent_path()) break;
  }
  return std::nullopt;
}

corpus::SpeakerId resolve_speaker(const std::string& text, const std::optional<corpus::CorpusManifest>& manifest,
                                  std::int64_t n_speakers) {
  if (manifest) {
    for (const auto& s : manifest->speakers) {
      if (s.name == text) return s.id;
    }
  }
  std::size_t used = 0;
  int id = -1;
  try {
    id = std::stoi(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || id < 0 || id >= n_speakers) throw RuntimeFailure("unknown speaker '" + text + "'");
  return id;
}

// ---- plots ---------------------------------------------------------------

void plot_embeddings(const std::vector<json>& rows, const fs::path& plot_dir, const std::string& projection) {
  std::vector<std::array<double, 2>> e_pts, s_pts;
  std::vector<int> emotions, speakers;
  std::map<int, std::string> speaker_name;
  std::vector<std::vector<float>> e_raw, s_raw;
  for (const auto& r : rows) {
    e_pts.push_back({r.at("e_pca")[0].get<double>(), r.at("e_pca")[1].get<double>()});
    s_pts.push_back({r.at("s_pca")[0].get<double>(), r.at("s_pca")[1].get<double>()});
    emotions.push_back(r.at("emotion_index").get<int>());
    speakers.push_back(r.at("speaker").get<int>());
    speaker_name[r.at("speaker").get<int>()] = r.at("speaker_name").get<std::string>();
    if (projection == "tsne") {
      e_raw.push_back(r.at("e").get<std::vector<float>>());
      s_raw.push_back(r.at("s").get<std::vector<float>>());
    }
  }
  if (projection == "tsne" && rows.size() >= 3) {
    auto to_tensor = [](const std::vector<std::vector<float>>& v) {
      std::vector<torch::Tensor> t;
      for (const auto& row : v) t.push_back(torch::tensor(row));
      return torch::stack(t);
    };
    auto to_points = [](const torch::Tensor& c) {
      std::vector<std::array<double, 2>> pts;
      for (std::int64_t i = 0; i < c.size(0); ++i) pts.push_back({c[i][0].item<double>(), c[i][1].item<double>()});
      return pts;
    };
    e_pts = to_points(evalkit::project_tsne(to_tensor(e_raw)).coords);
    s_pts = to_points(evalkit::project_tsne(to_tensor(s_raw)).coords);
  }
  std::vector<std::string> emotion_names;
  for (auto e : corpus::kAllEmotions) emotion_names.emplace_back(corpus::emotion_name(e));
  std::vector<std::string> speaker_names;
  for (const auto& [id, name] : speaker_name) {
    if (static_cast<int>(speaker_names.size()) <= id) speaker_names.resize(static_cast<std::size_t>(id) + 1);
    speaker_names[static_cast<std::size_t>(id)] = name;
  }
  const std::string tag = projection == "tsne" ? " (t-SNE)" : " (PCA)";
  evalkit::write_text(plot_dir / ("emotion_embeddings_by_emotion_" + projection + ".svg"),
                      evalkit::scatter_svg(e_pts, emotions, emotion_names, "Emotion embeddings by emotion" + tag));
  evalkit::write_text(plot_dir / ("emotion_embeddings_by_speaker_" + projection + ".svg"),
                      evalkit::scatter_svg(e_pts, speakers, speaker_names, "Emotion embeddings by speaker" + tag));
  evalkit::write_text(plot_dir / ("speaker_embeddings_by_speaker_" + projection + ".svg"),
                      evalkit::scatter_svg(s_pts, speakers, speaker_names, "Speaker embeddings by speaker" + tag));
}

void plot_strength(const std::vector<json>& strength, const std::vector<json>& contours, const fs::path& plot_dir) {
  for (const auto& r : strength) {
    if (r.value("record", "") != "confusion") continue;
    std::vector<std::vector<double>> m;
    for (const auto& row : r.at("rate")) m.push_back(row.get<std::vector<double>>());
    evalkit::write_text(plot_dir / "strength_confusion.svg",
                        evalkit::heatmap_svg(m, {"weak (1)", "medium (2)", "strong (3)"},
                                             {"rank 1", "rank 2", "rank 3"}, "Strength ranking by pitch-proxy variance"));
  }
  // First sentence of each emotion, all three scalars.
  std::map<std::string, std::vector<evalkit::Series>> by_emotion;
  std::map<std::string, std::string> first_sentence;
  for (const auto& c : contours) {
    const auto emotion = c.at("emotion").get<std::string>();
    const auto sentence = c.at("sentence").get<std::string>();
    if (!first_sentence.count(emotion)) first_sentence[emotion] = sentence;
    if (first_sentence[emotion] != sentence) continue;
    std::ostringstream name;
    name << "scalar " << c.at("scalar").get<double>();
    by_emotion[emotion].push_back({name.str(), c.at("contour").get<std::vector<double>>()});
  }
  for (const auto& [emotion, series] : by_emotion) {
    evalkit::write_text(plot_dir / ("pitch_contours_" + emotion + ".svg"),
                        evalkit::lines_svg(series, "Pitch-proxy contours, " + emotion + ": \"" + first_sentence[emotion] + "\"",
                                           "frame", "band centroid (channel)"));
  }
}

int render_plots(const fs::path& report_dir, const fs::path& plot_dir, const std::string& projection,
                 std::ostream& out) {
  int made = 0;
  if (fs::exists(report_dir / "embeddings.jsonl")) {
    plot_embeddings(read_jsonl(report_dir / "embeddings.jsonl"), plot_dir, projection);
    made += 3;
  }
  if (fs::exists(report_dir / "strength.jsonl") && fs::exists(report_dir / "contours.jsonl")) {
    plot_strength(read_jsonl(report_dir / "strength.jsonl"), read_jsonl(report_dir / "contours.jsonl"), plot_dir);
    made += 1;
  }
  if (made == 0) throw RuntimeFailure("no report data found in " + report_dir.string());
  out << "plots written to " << plot_dir.string() << "\n";
  return kExitOk;
}

// ---- subcommands ---------------------------------------------------------

struct CorpusArgs {
  std::string spec, out;
  std::optional<std::uint64_t> seed;
};

int run_corpus_generate(const CorpusArgs& a, std::ostream& out) {
  const auto spec = a.spec.empty() ? corpus::default_corpus_spec() : corpus::load_corpus_spec(a.spec);
  const auto seed = resolve_seed(a.seed, 0);
  const auto m = corpus::generate_corpus(spec, a.out, seed);
  out << "generated " << m.utterances.size() << " utterances into " << a.out << " (seed " << seed << ")\n";
  return kExitOk;
}

struct TrainArgs {
  std::string config, manifest, run, resume, ablation;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> steps;
};

int run_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  auto cfg = a.config.empty() ? trainer::TrainConfig{} : trainer::load_train_config(a.config);
  cfg.seed = resolve_seed(a.seed, cfg.seed);
  if (a.steps) cfg.max_steps = *a.steps;
  if (!a.ablation.empty()) cfg.ablation = trainer::parse_ablation(a.ablation);
  cfg.validate();
  const auto manifest = corpus::load_manifest(a.manifest);
  const auto mels = corpus::load_features(manifest);
  trainer::TrainOptions options;
  options.manifest_path = a.manifest;
  if (!a.resume.empty()) options.resume_from = a.resume;
  const auto every = std::max<std::int64_t>(1, cfg.max_steps / 20);
  options.on_log = [&](const json& rec) {
    if (rec.at("step").get<std::int64_t>() % every == 0) {
      out << "step " << rec.at("step") << " l_taco " << rec.at("l_taco") << " total " << rec.at("total") << "\n";
    }
  };
  const auto r = trainer::train(cfg, manifest, mels, a.run, options);
  for (const auto& w : r.warnings) err << "warning: " << w << "\n";
  if (r.diverged) throw RuntimeFailure("training diverged at step " + std::to_string(r.final_step) +
                                       "; last finite checkpoint kept");
  out << "finished at step " << r.final_step << "; checkpoint " << r.final_checkpoint.string() << "\n";
  return kExitOk;
}

struct SynthArgs {
  std::string checkpoint, text, speaker, reference, out, manifest;
  double strength = 1.0;
  std::int64_t max_frames = 0;
};

int run_synth(const SynthArgs& a, std::ostream& out, std::ostream& err) {
  if (a.strength > inference::kStrengthWarnAbove) {
    err << "warning: strength " << a.strength << " is above " << inference::kStrengthWarnAbove
        << "; quality may degrade\n";
  }
  const auto synth = inference::Synthesizer::from_checkpoint(a.checkpoint);
  std::optional<corpus::CorpusManifest> manifest;
  std::optional<fs::path> manifest_path =
      a.manifest.empty() ? manifest_for_checkpoint(a.checkpoint) : std::optional<fs::path>(a.manifest);
  if (manifest_path && fs::exists(*manifest_path)) manifest = corpus::load_manifest(*manifest_path);

  inference::SynthesisRequest req;
  req.phones = corpus::phones_from_text(a.text);
  req.target_speaker = resolve_speaker(a.speaker, manifest, synth.n_speakers());
  req.strength_scalar = a.strength;
  req.max_frames = a.max_frames;
  if (fs::exists(a.reference) && fs::is_regular_file(a.reference)) {
    req.reference_mel = corpus::read_mel(a.reference);
  } else {
    if (!manifest) throw RuntimeFailure("reference '" + a.reference + "' is not a file and no manifest is available");
    req.reference_mel = corpus::read_mel(manifest->mel_file(manifest->find(a.reference)));
  }
  const auto r = synth.synthesize(req);
  corpus::write_mel(a.out, r.mel);
  out << json{{"out", a.out}, {"frames", r.mel.frames()}, {"stop_step", r.stop_step}, {"truncated", r.truncated}}.dump()
      << "\n";
  if (r.truncated) err << "warning: decoding hit max_frames without a stop token\n";
  return kExitOk;
}

struct EmbedArgs {
  std::string checkpoint, manifest, out;
  double strength = 1.0;
};

int run_embed(const EmbedArgs& a, std::ostream& out) {
  const auto synth = inference::Synthesizer::from_checkpoint(a.checkpoint);
  const auto manifest = corpus::load_manifest(a.manifest);
  const auto mels = corpus::load_features(manifest);
  std::vector<json> rows;
  for (std::size_t i = 0; i < mels.size(); ++i) {
    const auto e = synth.extract_emotion_embedding(mels[i], a.strength).contiguous();
    const auto& u = manifest.utterances[i];
    rows.push_back({{"uid", u.uid},
                    {"speaker", u.speaker},
                    {"emotion", corpus::emotion_name(u.emotion)},
                    {"e", std::vector<float>(e.data_ptr<float>(), e.data_ptr<float>() + e.numel())}});
  }
  write_jsonl(a.out, rows);
  out << "wrote " << rows.size() << " embeddings to " << a.out << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string checkpoint, manifest, out;
  std::optional<std::uint64_t> seed;
  int sentences = 0;
};

evalkit::EvalOptions eval_options(const EvalArgs& a, const trainer::TrainConfig& cfg) {
  evalkit::EvalOptions o;
  o.seed = resolve_seed(a.seed, cfg.seed);
  if (a.sentences > 0) o.test_sentences = a.sentences;
  return o;
}

int run_eval_disentangle(const EvalArgs& a, std::ostream& out) {
  auto ck = trainer::load_checkpoint(a.checkpoint);
  const auto manifest = corpus::load_manifest(a.manifest);
  auto opts = eval_options(a, ck.config);
  if (a.sentences > 0) opts.probe_sentences = a.sentences;
  const auto r = evalkit::evaluate_disentanglement(ck.model, manifest, opts);
  std::vector<json> report;
  for (const auto& p : r.probes) {
    auto j = p.to_json();
    j["record"] = "probe";
    report.push_back(j);
  }
  report.push_back({{"record", "projection"},
                    {"method", "pca"},
                    {"e_explained_variance", r.e_projection.explained},
                    {"s_explained_variance", r.s_projection.explained},
                    {"e_warning", r.e_projection.warning},
                    {"s_warning", r.s_projection.warning}});
  write_jsonl(fs::path(a.out) / "disentangle.jsonl", report);

  std::map<int, std::string> names;
  for (const auto& s : manifest.speakers) names[s.id] = s.name;
  std::vector<json> rows;
  const auto& emb = r.embeddings;
  for (std::size_t i = 0; i < emb.uids.size(); ++i) {
    const auto k = static_cast<std::int64_t>(i);
    const auto e = emb.e[k].contiguous();
    const auto s = emb.s[k].contiguous();
    rows.push_back({{"uid", emb.uids[i]},
                    {"speaker", emb.speakers[i]},
                    {"speaker_name", names[static_cast<int>(emb.speakers[i])]},
                    {"emotion", corpus::emotion_name(corpus::emotion_from_index(static_cast<int>(emb.emotions[i])))},
                    {"emotion_index", emb.emotions[i]},
                    {"e_pca", {r.e_projection.coords[k][0].item<double>(), r.e_projection.coords[k][1].item<double>()}},
                    {"s_pca", {r.s_projection.coords[k][0].item<double>(), r.s_projection.coords[k][1].item<double>()}},
                    {"e", std::vector<float>(e.data_ptr<float>(), e.data_ptr<float>() + e.numel())},
                    {"s", std::vector<float>(s.data_ptr<float>(), s.data_ptr<float>() + s.numel())}});
  }
  write_jsonl(fs::path(a.out) / "embeddings.jsonl", rows);
  plot_embeddings(rows, fs::path(a.out) / "plots", "pca");
  for (const auto& p : r.probes) {
    out << evalkit::probe_task_name(p.task) << " accuracy " << p.accuracy << " (chance " << p.chance << ")\n";
  }
  return kExitOk;
}

int run_eval_strength(const EvalArgs& a, std::ostream& out) {
  auto ck = trainer::load_checkpoint(a.checkpoint);
  const auto synth = inference::Synthesizer::from_model(ck.model);
  const auto manifest = corpus::load_manifest(a.manifest);
  const auto mels = corpus::load_features(manifest);
  const auto r = evalkit::evaluate_strength(synth, manifest, mels, eval_options(a, ck.config));
  std::vector<json> report;
  auto summary = r.to_json();
  summary["record"] = "summary";
  report.push_back(summary);
  auto confusion = r.confusion.to_json();
  confusion["record"] = "confusion";
  report.push_back(confusion);
  std::vector<json> contours;
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    const auto& s = r.samples[i];
    const auto& t = r.triples[i];
    json variances = json::array();
    for (const auto& v : t.variance) variances.push_back(v ? json(*v) : json(nullptr));
    report.push_back({{"record", "triple"},
                      {"sentence", s.sentence},
                      {"emotion", corpus::emotion_name(s.emotion)},
                      {"reference_uid", s.reference_uid},
                      {"variance", variances},
                      {"monotonic", t.monotonic()},
                      {"truncated", s.truncated}});
    for (std::size_t k = 0; k < 3; ++k) {
      contours.push_back({{"sentence", s.sentence},
                          {"emotion", corpus::emotion_name(s.emotion)},
                          {"scalar", evalkit::kStrengthScalars[k]},
                          {"contour", s.contours[k]}});
    }
  }
  write_jsonl(fs::path(a.out) / "strength.jsonl", report);
  write_jsonl(fs::path(a.out) / "contours.jsonl", contours);
  plot_strength(report, contours, fs::path(a.out) / "plots");
  out << "diagonal " << r.confusion.diagonal(0) << " " << r.confusion.diagonal(1) << " " << r.confusion.diagonal(2)
      << "; monotonic fraction " << r.monotonic << "\n";
  return kExitOk;
}

int run_eval_leakage(const EvalArgs& a, std::ostream& out) {
  auto ck = trainer::load_checkpoint(a.checkpoint);
  const auto synth = inference::Synthesizer::from_model(ck.model);
  const auto manifest = corpus::load_manifest(a.manifest);
  const auto mels = corpus::load_features(manifest);
  const auto r = evalkit::evaluate_leakage(synth, manifest, mels, eval_options(a, ck.config));
  auto j = r.to_json();
  j["record"] = "leakage";
  write_jsonl(fs::path(a.out) / "leakage.jsonl", {j});
  out << "cos_to_target " << r.report.cos_to_target << " cos_to_source " << r.report.cos_to_source
      << " (bounds " << r.report.target_upper_bound << " / " << r.report.cross_lower_bound << ")\n";
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-speaker emotion transfer toolkit", "emodis"};
  app.require_subcommand(1);

  CorpusArgs corpus_args;
  auto* corpus_cmd = app.add_subcommand("corpus", "Synthetic corpus tools");
  corpus_cmd->require_subcommand(1);
  auto* generate = corpus_cmd->add_subcommand("generate", "Render a synthetic corpus");
  generate->add_option("--spec", corpus_args.spec, "Corpus spec (JSON); default corpus when omitted");
  generate->add_option("--out", corpus_args.out, "Output directory")->required();
  generate->add_option("--seed", corpus_args.seed, "Random seed");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  train_cmd->add_option("--config", train_args.config, "Training config (JSON)");
  train_cmd->add_option("--manifest", train_args.manifest, "Corpus manifest")->required();
  train_cmd->add_option("--out,--run", train_args.run, "Run directory")->required();
  train_cmd->add_option("--resume", train_args.resume, "Checkpoint to resume from");
  train_cmd->add_option("--ablation", train_args.ablation, "full | wo_ort | wo_2ort");
  train_cmd->add_option("--steps", train_args.steps, "Override max_steps");
  train_cmd->add_option("--seed", train_args.seed, "Random seed (default: config)");

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Synthesize a mel spectrogram");
  synth_cmd->add_option("--checkpoint", synth_args.checkpoint)->required();
  synth_cmd->add_option("--text", synth_args.text)->required();
  synth_cmd->add_option("--speaker", synth_args.speaker, "Speaker id or name")->required();
  synth_cmd->add_option("--reference", synth_args.reference, "Reference utterance uid or mel file")->required();
  synth_cmd->add_option("--strength", synth_args.strength, "Emotion strength scalar");
  synth_cmd->add_option("--out", synth_args.out, "Output mel file")->required();
  synth_cmd->add_option("--manifest", synth_args.manifest, "Manifest for uid/name lookup");
  synth_cmd->add_option("--max-frames", synth_args.max_frames, "Decoding limit (default 10 per phone)");
  // Inference is deterministic; accepted for a uniform interface.
  std::optional<std::uint64_t> unused_seed;
  synth_cmd->add_option("--seed", unused_seed, "Random seed (synthesis is deterministic)");

  EmbedArgs embed_args;
  auto* embed_cmd = app.add_subcommand("embed", "Extract emotion embeddings for a corpus");
  embed_cmd->add_option("--checkpoint", embed_args.checkpoint)->required();
  embed_cmd->add_option("--manifest", embed_args.manifest)->required();
  embed_cmd->add_option("--out", embed_args.out, "Output JSONL file")->required();
  embed_cmd->add_option("--strength", embed_args.strength, "Scalar folded into the embedding");
  embed_cmd->add_option("--seed", unused_seed, "Random seed (extraction is deterministic)");

  auto* eval_cmd = app.add_subcommand("eval", "Objective evaluations");
  eval_cmd->require_subcommand(1);
  std::map<std::string, EvalArgs> eval_args;
  std::map<std::string, CLI::App*> eval_cmds;
  for (const std::string name : {"disentangle", "leakage", "strength"}) {
    auto& ea = eval_args[name];
    auto* c = eval_cmd->add_subcommand(name);
    c->add_option("--checkpoint", ea.checkpoint)->required();
    c->add_option("--manifest", ea.manifest)->required();
    c->add_option("--out", ea.out, "Report directory")->required();
    c->add_option("--seed", ea.seed, "Random seed (default: checkpoint config)");
    c->add_option("--sentences", ea.sentences, "Held-out sentence count");
    eval_cmds[name] = c;
  }

  std::string plot_report, plot_out, plot_projection = "pca";
  auto* plot_cmd = app.add_subcommand("plot", "Render figures from report data");
  plot_cmd->add_option("--report", plot_report, "Report directory")->required();
  plot_cmd->add_option("--out", plot_out, "Plot directory (default <report>/plots)");
  plot_cmd->add_option("--projection", plot_projection, "pca | tsne")->check(CLI::IsMember({"pca", "tsne"}));
  plot_cmd->add_option("--seed", unused_seed, "Unused; plots are deterministic");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (corpus_cmd->parsed()) return run_corpus_generate(corpus_args, out);
    if (train_cmd->parsed()) return run_train(train_args, out, err);
    if (synth_cmd->parsed()) return run_synth(synth_args, out, err);
    if (embed_cmd->parsed()) return run_embed(embed_args, out);
    if (eval_cmds["disentangle"]->parsed()) return run_eval_disentangle(eval_args["disentangle"], out);
    if (eval_cmds["strength"]->parsed()) return run_eval_strength(eval_args["strength"], out);
    if (eval_cmds["leakage"]->parsed()) return run_eval_leakage(eval_args["leakage"], out);
    if (plot_cmd->parsed()) {
      return render_plots(plot_report, plot_out.empty() ? fs::path(plot_report) / "plots" : fs::path(plot_out),
                          plot_projection, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace emodis::cli
