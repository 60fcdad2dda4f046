#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "emodis/corpus/emotion.hpp"

namespace emodis::evalkit {

// Pitch-proxy variances of one sentence/emotion synthesized at scalars
// 1, 2, 3 (weak, medium, strong). Missing entries make the triple incomplete.
struct StrengthTriple {
  std::string sentence;
  corpus::EmotionLabel emotion = corpus::EmotionLabel::kNeutral;
  std::array<std::optional<double>, 3> variance;

  bool complete() const { return variance[0] && variance[1] && variance[2]; }
  // Variance non-decreasing from weak to strong.
  bool monotonic() const;
};

struct StrengthConfusion {
  // rate[level][rank]: how often the triple member at `level` was ranked
  // `rank` by pitch-proxy variance (0 = lowest). Rows sum to 1.
  std::array<std::array<double, 3>, 3> rate{};
  std::int64_t n_triples = 0;
  std::int64_t skipped = 0;

  double diagonal(int level) const { return rate[static_cast<std::size_t>(level)][static_cast<std::size_t>(level)]; }
  nlohmann::json to_json() const;
};

// Ranks each complete triple by variance; ties are broken at random from
// tie_seed. Throws std::invalid_argument when no triple is complete.
StrengthConfusion strength_confusion(const std::vector<StrengthTriple>& triples, std::uint64_t tie_seed);

// Share of complete triples whose variance is non-decreasing in the scalar.
double monotonic_fraction(const std::vector<StrengthTriple>& triples);

}  // namespace emodis::evalkit
