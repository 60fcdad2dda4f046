#include "emodis/corpus/phones.hpp"

#include <cctype>
#include <stdexcept>

namespace emodis::corpus {

PhoneSequence phones_from_text(std::string_view text) {
  PhoneSequence out;
  out.symbols.reserve(text.size());
  for (char raw : text) {
    const char ch = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
    const auto pos = kSymbolTable.find(ch);
    if (pos == std::string_view::npos) {
      throw std::invalid_argument(std::string("unknown phone symbol '") + raw + "'");
    }
    out.symbols.push_back(static_cast<std::int64_t>(pos));
  }
  return out;
}

std::string phones_to_text(const PhoneSequence& phones) {
  validate_phones(phones);
  std::string out;
  out.reserve(phones.length());
  for (auto id : phones.symbols) out.push_back(kSymbolTable[static_cast<std::size_t>(id)]);
  return out;
}

void validate_phones(const PhoneSequence& phones, int inventory_size) {
  for (auto id : phones.symbols) {
    if (id < 0 || id >= inventory_size) {
      throw std::invalid_argument("unknown phone symbol id " + std::to_string(id));
    }
  }
}

}  // namespace emodis::corpus
