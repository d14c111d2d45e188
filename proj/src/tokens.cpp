#include "tacit/tokens.hpp"

#include <stdexcept>

namespace tacit {

std::int64_t estimate_tokens(std::string_view text) {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

std::string truncate_for_embedding(std::string_view text, std::int64_t limit) {
  if (limit < 1) throw std::invalid_argument("truncate_for_embedding: limit must be >= 1");
  if (estimate_tokens(text) <= limit) return std::string(text);
  std::size_t max_bytes = static_cast<std::size_t>(limit) * 4;
  std::size_t cut = max_bytes;
  // back off to a UTF-8 code point boundary
  while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
  return std::string(text.substr(0, cut));
}

}  // namespace tacit
