#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace tacit {

// Approximate token count: ceil(byte_length / 4). Deterministic and
// backend-agnostic; real usage numbers from remote APIs override estimates
// wherever both exist.
std::int64_t estimate_tokens(std::string_view text);

// Longest prefix whose estimate fits in `limit` tokens, never splitting a
// UTF-8 code point. Returns the input unchanged when already within limit.
std::string truncate_for_embedding(std::string_view text, std::int64_t limit);

}  // namespace tacit
