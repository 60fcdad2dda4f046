#pragma once

#include <vector>

#include "emodis/corpus/mel.hpp"

namespace emodis::evalkit {

inline constexpr int kContourSmoothing = 5;
// Centroid weights are linear magnitude raised to this power, so the planted
// peak dominates the content envelope under it.
inline constexpr double kCentroidSharpness = 5.0;

// Per-frame spectral centroid (in channel units) of exp(k * log-mel) over the
// generator's pitch-proxy band, smoothed with a centred 5-frame moving average
// (shorter windows at the edges).
std::vector<double> pitch_proxy_contour(const corpus::MelSpectrogram& mel);

std::vector<double> moving_average(const std::vector<double>& x, int window);

// Population variance; 0 for fewer than two values.
double variance(const std::vector<double>& x);

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace emodis::evalkit
