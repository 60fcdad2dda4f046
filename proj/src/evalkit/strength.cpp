#include "emodis/evalkit/strength.hpp"

#include <algorithm>
#include <stdexcept>

#include "emodis/util/random.hpp"

namespace emodis::evalkit {

bool StrengthTriple::monotonic() const {
  return complete() && *variance[0] <= *variance[1] && *variance[1] <= *variance[2];
}

nlohmann::json StrengthConfusion::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : rate) rows.push_back(row);
  return {{"levels", {"weak", "medium", "strong"}}, {"rate", rows}, {"n_triples", n_triples}, {"skipped", skipped}};
}

StrengthConfusion strength_confusion(const std::vector<StrengthTriple>& triples, std::uint64_t tie_seed) {
  StrengthConfusion out;
  std::array<std::array<std::int64_t, 3>, 3> counts{};
  util::Rng rng(tie_seed);
  for (const auto& t : triples) {
    if (!t.complete()) {
      ++out.skipped;
      continue;
    }
    std::array<double, 3> key{};
    for (auto& k : key) k = rng.uniform();
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const double va = *t.variance[static_cast<std::size_t>(a)];
      const double vb = *t.variance[static_cast<std::size_t>(b)];
      if (va != vb) return va < vb;
      return key[static_cast<std::size_t>(a)] < key[static_cast<std::size_t>(b)];
    });
    for (int rank = 0; rank < 3; ++rank) ++counts[static_cast<std::size_t>(order[static_cast<std::size_t>(rank)])][static_cast<std::size_t>(rank)];
    ++out.n_triples;
  }
  if (out.n_triples == 0) throw std::invalid_argument("no complete strength triple to rank");
  for (std::size_t level = 0; level < 3; ++level) {
    for (std::size_t rank = 0; rank < 3; ++rank) {
      out.rate[level][rank] = static_cast<double>(counts[level][rank]) / static_cast<double>(out.n_triples);
    }
  }
  return out;
}

double monotonic_fraction(const std::vector<StrengthTriple>& triples) {
  std::int64_t complete = 0, monotonic = 0;
  for (const auto& t : triples) {
    if (!t.complete()) continue;
    ++complete;
    if (t.monotonic()) ++monotonic;
  }
  if (complete == 0) throw std::invalid_argument("no complete strength triple");
  return static_cast<double>(monotonic) / static_cast<double>(complete);
}

}  // namespace emodis::evalkit
