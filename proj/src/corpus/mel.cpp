#include "emodis/corpus/mel.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

namespace emodis::corpus {

static_assert(std::endian::native == std::endian::little,
              "feature files are little-endian; big-endian hosts need byte swapping");

int FeatureConfig::window_samples() const {
  return static_cast<int>(std::lround(sample_rate * frame_length_ms / 1000.0));
}

int FeatureConfig::hop_samples() const {
  return static_cast<int>(std::lround(sample_rate * frame_shift_ms / 1000.0));
}

void FeatureConfig::validate() const {
  if (sample_rate <= 0) throw std::invalid_argument("sample_rate must be positive");
  if (!(frame_shift_ms > 0.0) || !(frame_shift_ms < frame_length_ms)) {
    throw std::invalid_argument("frame_shift must be positive and shorter than frame_length");
  }
  if (mel_channels < 8) throw std::invalid_argument("mel_channels must be >= 8");
}

void to_json(nlohmann::json& j, const FeatureConfig& c) {
  j = nlohmann::json{{"sample_rate", c.sample_rate},
                     {"frame_length_ms", c.frame_length_ms},
                     {"frame_shift_ms", c.frame_shift_ms},
                     {"mel_channels", c.mel_channels}};
}

void from_json(const nlohmann::json& j, FeatureConfig& c) {
  j.at("sample_rate").get_to(c.sample_rate);
  j.at("frame_length_ms").get_to(c.frame_length_ms);
  j.at("frame_shift_ms").get_to(c.frame_shift_ms);
  j.at("mel_channels").get_to(c.mel_channels);
  c.validate();
}

MelSpectrogram::MelSpectrogram(std::int64_t frames, std::int64_t channels, float fill)
    : frames_(frames), channels_(channels),
      data_(static_cast<std::size_t>(frames * channels), fill) {
  if (frames < 0 || channels < 0) throw std::invalid_argument("negative mel shape");
}

MelSpectrogram::MelSpectrogram(std::int64_t frames, std::int64_t channels, std::vector<float> data)
    : frames_(frames), channels_(channels), data_(std::move(data)) {
  if (frames < 0 || channels < 0 ||
      data_.size() != static_cast<std::size_t>(frames * channels)) {
    throw std::invalid_argument("mel data size does not match its shape");
  }
}

void write_mel(const std::filesystem::path& path, const MelSpectrogram& mel) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open feature file for writing: " + path.string());
  const auto frames = static_cast<std::uint32_t>(mel.frames());
  const auto channels = static_cast<std::uint32_t>(mel.channels());
  out.write(reinterpret_cast<const char*>(&frames), sizeof frames);
  out.write(reinterpret_cast<const char*>(&channels), sizeof channels);
  out.write(reinterpret_cast<const char*>(mel.data().data()),
            static_cast<std::streamsize>(mel.data().size() * sizeof(float)));
  if (!out) throw std::runtime_error("failed writing feature file: " + path.string());
}

MelSpectrogram read_mel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open feature file: " + path.string());
  std::uint32_t frames = 0;
  std::uint32_t channels = 0;
  in.read(reinterpret_cast<char*>(&frames), sizeof frames);
  in.read(reinterpret_cast<char*>(&channels), sizeof channels);
  if (!in) throw std::runtime_error("truncated feature header: " + path.string());
  std::vector<float> data(static_cast<std::size_t>(frames) * channels);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(float)));
  if (in.gcount() != static_cast<std::streamsize>(data.size() * sizeof(float))) {
    throw std::runtime_error("truncated feature data: " + path.string());
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw std::runtime_error("trailing bytes in feature file: " + path.string());
  }
  return MelSpectrogram(frames, channels, std::move(data));
}

}  // namespace emodis::corpus
