#include "dirplan/bytes.hpp"

#include <array>
#include <stdexcept>

namespace dirplan {

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

constexpr char kBase64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("hex_decode: bad digit");
}

std::array<int, 256> make_base64_reverse() {
    std::array<int, 256> table{};
    table.fill(-1);
    for (int i = 0; i < 64; ++i) {
        table[static_cast<unsigned char>(kBase64Alphabet[i])] = i;
    }
    return table;
}

}  // namespace

std::string hex_encode(ByteView data) {
    std::string out;
    out.reserve(data.size() * 2);
    for (std::uint8_t b : data) {
        out += kHexDigits[b >> 4];
        out += kHexDigits[b & 0x0f];
    }
    return out;
}

Bytes hex_decode(const std::string& text) {
    if (text.size() % 2 != 0) {
        throw std::invalid_argument("hex_decode: odd length");
    }
    Bytes out;
    out.reserve(text.size() / 2);
    for (std::size_t i = 0; i < text.size(); i += 2) {
        out.push_back(static_cast<std::uint8_t>(hex_nibble(text[i]) << 4 |
                                                hex_nibble(text[i + 1])));
    }
    return out;
}

std::string base64_encode(ByteView data) {
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 3 <= data.size()) {
        std::uint32_t n = data[i] << 16 | data[i + 1] << 8 | data[i + 2];
        out += kBase64Alphabet[n >> 18];
        out += kBase64Alphabet[(n >> 12) & 0x3f];
        out += kBase64Alphabet[(n >> 6) & 0x3f];
        out += kBase64Alphabet[n & 0x3f];
        i += 3;
    }
    const std::size_t rest = data.size() - i;
    if (rest == 1) {
        std::uint32_t n = data[i] << 16;
        out += kBase64Alphabet[n >> 18];
        out += kBase64Alphabet[(n >> 12) & 0x3f];
        out += "==";
    } else if (rest == 2) {
        std::uint32_t n = data[i] << 16 | data[i + 1] << 8;
        out += kBase64Alphabet[n >> 18];
        out += kBase64Alphabet[(n >> 12) & 0x3f];
        out += kBase64Alphabet[(n >> 6) & 0x3f];
        out += '=';
    }
    return out;
}

Bytes base64_decode(const std::string& text) {
    static const std::array<int, 256> reverse = make_base64_reverse();
    if (text.size() % 4 != 0) {
        throw std::invalid_argument("base64_decode: length not a multiple of 4");
    }
    Bytes out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int pad = 0;
        std::uint32_t n = 0;
        for (std::size_t j = 0; j < 4; ++j) {
            char c = text[i + j];
            if (c == '=') {
                if (i + 4 != text.size() || j < 2) {
                    throw std::invalid_argument("base64_decode: misplaced padding");
                }
                ++pad;
                n <<= 6;
                continue;
            }
            if (pad > 0) {
                throw std::invalid_argument("base64_decode: data after padding");
            }
            int v = reverse[static_cast<unsigned char>(c)];
            if (v < 0) {
                throw std::invalid_argument("base64_decode: bad character");
            }
            n = n << 6 | static_cast<std::uint32_t>(v);
        }
        out.push_back(static_cast<std::uint8_t>(n >> 16));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>(n >> 8));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(n));
    }
    return out;
}

}  // namespace dirplan
