#include "emodis/corpus/emotion.hpp"

#include <stdexcept>

namespace emodis::corpus {

namespace {
constexpr std::array<std::string_view, kNumEmotions> kNames = {
    "neutral", "happy", "surprise", "angry", "disgust", "fear", "sad", "neutral_T"};
}

EmotionLabel emotion_from_index(int code) {
  if (code < 0 || code >= kNumEmotions) {
    throw std::out_of_range("emotion code out of range: " + std::to_string(code));
  }
  return static_cast<EmotionLabel>(code);
}

std::string_view emotion_name(EmotionLabel e) { return kNames.at(to_index(e)); }

EmotionLabel parse_emotion(std::string_view name) {
  for (int i = 0; i < kNumEmotions; ++i) {
    if (kNames[i] == name) return static_cast<EmotionLabel>(i);
  }
  throw std::invalid_argument("unknown emotion label '" + std::string(name) + "'");
}

}  // namespace emodis::corpus
