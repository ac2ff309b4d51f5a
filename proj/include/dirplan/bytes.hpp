#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dirplan {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline Bytes to_bytes(const std::string& s) {
    return Bytes(s.begin(), s.end());
}

inline std::string to_string(ByteView b) {
    return std::string(b.begin(), b.end());
}

std::string hex_encode(ByteView data);

// Accepts upper or lower case digits; throws std::invalid_argument on odd
// length or non-hex characters.
Bytes hex_decode(const std::string& text);

std::string base64_encode(ByteView data);

// Whitespace is not tolerated; the caller unfolds LDIF continuations first.
Bytes base64_decode(const std::string& text);

}  // namespace dirplan
