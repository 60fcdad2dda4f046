#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace emodis::corpus {

// Integer codes are stable: they index classifier outputs and appear in
// checkpoints. neutral_T is the target speaker's own style.
enum class EmotionLabel : std::uint8_t {
  kNeutral = 0,
  kHappy = 1,
  kSurprise = 2,
  kAngry = 3,
  kDisgust = 4,
  kFear = 5,
  kSad = 6,
  kNeutralT = 7,
};

inline constexpr int kNumEmotions = 8;

inline constexpr std::array<EmotionLabel, kNumEmotions> kAllEmotions = {
    EmotionLabel::kNeutral, EmotionLabel::kHappy,   EmotionLabel::kSurprise,
    EmotionLabel::kAngry,   EmotionLabel::kDisgust, EmotionLabel::kFear,
    EmotionLabel::kSad,     EmotionLabel::kNeutralT};

// Classes a source speaker may carry (everything except neutral_T).
inline constexpr std::array<EmotionLabel, 7> kSourceEmotions = {
    EmotionLabel::kNeutral, EmotionLabel::kHappy,   EmotionLabel::kSurprise,
    EmotionLabel::kAngry,   EmotionLabel::kDisgust, EmotionLabel::kFear,
    EmotionLabel::kSad};

// Emotions used for transfer and strength evaluation (neutral transfer does
// not change the target style).
inline constexpr std::array<EmotionLabel, 6> kExpressiveEmotions = {
    EmotionLabel::kHappy,   EmotionLabel::kSurprise, EmotionLabel::kAngry,
    EmotionLabel::kDisgust, EmotionLabel::kFear,     EmotionLabel::kSad};

constexpr int to_index(EmotionLabel e) { return static_cast<int>(e); }

EmotionLabel emotion_from_index(int code);
std::string_view emotion_name(EmotionLabel e);
EmotionLabel parse_emotion(std::string_view name);

constexpr bool is_neutral(EmotionLabel e) {
  return e == EmotionLabel::kNeutral || e == EmotionLabel::kNeutralT;
}

}  // namespace emodis::corpus
