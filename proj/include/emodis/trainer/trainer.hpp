#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "emodis/corpus/manifest.hpp"
#include "emodis/trainer/checkpoint.hpp"
#include "emodis/trainer/config.hpp"

namespace emodis::trainer {

// Run directory layout, every path relative to the run root.
struct RunLayout {
  std::filesystem::path root;

  std::filesystem::path config() const { return root / "config.json"; }
  std::filesystem::path manifest_ref() const { return root / "manifest.ref"; }
  std::filesystem::path checkpoints() const { return root / "checkpoints"; }
  std::filesystem::path latest_checkpoint() const { return checkpoints() / "latest.pt"; }
  std::filesystem::path step_checkpoint(std::int64_t step) const;
  std::filesystem::path metrics() const { return root / "metrics.log"; }
  std::filesystem::path reports() const { return root / "reports"; }
  std::filesystem::path plots() const { return root / "plots"; }
};

struct TrainOptions {
  std::optional<std::filesystem::path> resume_from;
  // Recorded in manifest.ref when known.
  std::optional<std::filesystem::path> manifest_path;
  // Called with every logged record.
  std::function<void(const nlohmann::json&)> on_log;
};

struct TrainResult {
  std::int64_t final_step = 0;
  std::filesystem::path final_checkpoint;
  std::vector<nlohmann::json> metrics;
  bool diverged = false;
  std::vector<std::string> warnings;
};

// Learning rate after linear warmup.
double scheduled_learning_rate(const TrainConfig& cfg, std::int64_t step);

// Trains on every manifest item. Saves checkpoints every save_interval
// steps plus a final one; a non-finite loss stops training and leaves the
// last finite checkpoint in place.
TrainResult train(const TrainConfig& cfg, const corpus::CorpusManifest& manifest,
                  const std::vector<corpus::MelSpectrogram>& mels, const std::filesystem::path& out_dir,
                  const TrainOptions& options = {});

// Reads metrics.log back (one JSON record per line).
std::vector<nlohmann::json> read_metrics(const std::filesystem::path& path);

}  // namespace emodis::trainer
