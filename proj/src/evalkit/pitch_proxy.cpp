#include "emodis/evalkit/pitch_proxy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "emodis/corpus/generator.hpp"

namespace emodis::evalkit {

std::vector<double> moving_average(const std::vector<double>& x, int window) {
  if (window < 1) throw std::invalid_argument("moving average window must be >= 1");
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto half = static_cast<std::ptrdiff_t>(window / 2);
  std::vector<double> out(x.size());
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    const auto lo = std::max<std::ptrdiff_t>(0, t - half);
    const auto hi = std::min<std::ptrdiff_t>(n - 1, t + half);
    double sum = 0.0;
    for (auto i = lo; i <= hi; ++i) sum += x[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(t)] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

std::vector<double> pitch_proxy_contour(const corpus::MelSpectrogram& mel) {
  corpus::FeatureConfig cfg;
  cfg.mel_channels = static_cast<int>(mel.channels());
  const auto band = corpus::pitch_band(cfg);
  std::vector<double> raw(static_cast<std::size_t>(mel.frames()));
  for (std::int64_t t = 0; t < mel.frames(); ++t) {
    // Shift by the band maximum before exponentiating to stay finite.
    double peak = -std::numeric_limits<double>::infinity();
    for (int c = band.lo; c < band.hi; ++c) peak = std::max(peak, static_cast<double>(mel.at(t, c)));
    double mass = 0.0, moment = 0.0;
    for (int c = band.lo; c < band.hi; ++c) {
      const double w = std::exp(kCentroidSharpness * (static_cast<double>(mel.at(t, c)) - peak));
      mass += w;
      moment += w * c;
    }
    raw[static_cast<std::size_t>(t)] = moment / mass;
  }
  return moving_average(raw, kContourSmoothing);
}

double variance(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double acc = 0.0;
  for (double v : x) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(x.size());
}

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("correlation needs equal-length series");
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace emodis::evalkit
