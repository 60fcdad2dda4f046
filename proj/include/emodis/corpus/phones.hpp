#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace emodis::corpus {

// Character-level symbol table: 26 letters plus 6 punctuation/space marks.
inline constexpr std::string_view kSymbolTable = "abcdefghijklmnopqrstuvwxyz .,?!'";
inline constexpr int kNumSymbols = static_cast<int>(kSymbolTable.size());
// Index reserved for padding in batched phone matrices.
inline constexpr int kPadSymbol = kNumSymbols;

struct PhoneSequence {
  std::vector<std::int64_t> symbols;

  std::size_t length() const { return symbols.size(); }
  bool empty() const { return symbols.empty(); }
  bool operator==(const PhoneSequence&) const = default;
};

// Maps each character to its symbol id; upper-case letters fold to lower.
// Throws std::invalid_argument naming the first unknown character.
PhoneSequence phones_from_text(std::string_view text);
std::string phones_to_text(const PhoneSequence& phones);

// Throws std::invalid_argument if any id is outside [0, inventory_size).
void validate_phones(const PhoneSequence& phones, int inventory_size = kNumSymbols);

}  // namespace emodis::corpus
