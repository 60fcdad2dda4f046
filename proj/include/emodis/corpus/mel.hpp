#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

namespace emodis::corpus {

struct FeatureConfig {
  int sample_rate = 16000;
  double frame_length_ms = 50.0;
  double frame_shift_ms = 12.5;
  int mel_channels = 80;

  double frame_shift_seconds() const { return frame_shift_ms / 1000.0; }
  int window_samples() const;
  int hop_samples() const;

  // Throws std::invalid_argument when frame_shift >= frame_length or
  // mel_channels < 8.
  void validate() const;

  bool operator==(const FeatureConfig&) const = default;
};

void to_json(nlohmann::json& j, const FeatureConfig& c);
void from_json(const nlohmann::json& j, FeatureConfig& c);

// Row-major frames x channels log-mel matrix.
class MelSpectrogram {
 public:
  MelSpectrogram() = default;
  MelSpectrogram(std::int64_t frames, std::int64_t channels, float fill = 0.0f);
  MelSpectrogram(std::int64_t frames, std::int64_t channels, std::vector<float> data);

  std::int64_t frames() const { return frames_; }
  std::int64_t channels() const { return channels_; }
  bool empty() const { return frames_ == 0; }

  float& at(std::int64_t t, std::int64_t c) { return data_[static_cast<std::size_t>(t * channels_ + c)]; }
  float at(std::int64_t t, std::int64_t c) const { return data_[static_cast<std::size_t>(t * channels_ + c)]; }

  std::span<float> row(std::int64_t t) {
    return {data_.data() + t * channels_, static_cast<std::size_t>(channels_)};
  }
  std::span<const float> row(std::int64_t t) const {
    return {data_.data() + t * channels_, static_cast<std::size_t>(channels_)};
  }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

  bool operator==(const MelSpectrogram&) const = default;

 private:
  std::int64_t frames_ = 0;
  std::int64_t channels_ = 0;
  std::vector<float> data_;
};

// Feature file layout: uint32 frame count, uint32 channel count (both
// little-endian), then frames*channels little-endian float32 values.
void write_mel(const std::filesystem::path& path, const MelSpectrogram& mel);
MelSpectrogram read_mel(const std::filesystem::path& path);

}  // namespace emodis::corpus
