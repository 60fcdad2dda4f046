#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "emodis/trainer/config.hpp"
#include "emodis/trainer/model.hpp"

namespace emodis::trainer {

inline constexpr std::int64_t kCheckpointVersion = 1;

struct Checkpoint {
  TrainConfig config;
  std::string fingerprint;
  std::int64_t step = 0;
  EmoDisModel model{nullptr};
  // Serialized optimizer state; empty when the checkpoint carries none.
  std::optional<torch::serialize::InputArchive> optimizer_state;
  std::vector<std::string> warnings;
};

// Writes to a temporary sibling and renames over `path`.
void save_checkpoint(const std::filesystem::path& path, EmoDisModel& model, const TrainConfig& config,
                     std::int64_t step, torch::optim::Optimizer* optimizer = nullptr);

// Throws std::runtime_error on a version mismatch before any state is built.
// A fingerprint differing from `expected` is recorded in `warnings`.
Checkpoint load_checkpoint(const std::filesystem::path& path, const std::optional<TrainConfig>& expected = std::nullopt);

}  // namespace emodis::trainer
