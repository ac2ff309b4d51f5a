#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dirplan/bytes.hpp"

// Minimal DER (X.690) reader/writer. Definite, minimal-length encodings
// only; BER laxity is rejected up front.
namespace dirplan::der {

enum class Errc {
    truncated,
    non_canonical_length,
    indefinite_length,
    malformed_tag,
    empty_oid,
    truncated_arc,
    non_canonical_arc,
    malformed_time,
    malformed_integer,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

enum class TagClass : std::uint8_t {
    universal = 0,
    application = 1,
    context = 2,
    priv = 3,
};

// Universal tag numbers used by the X.509 structures handled here.
namespace tag {
inline constexpr std::uint32_t boolean = 1;
inline constexpr std::uint32_t integer = 2;
inline constexpr std::uint32_t bit_string = 3;
inline constexpr std::uint32_t octet_string = 4;
inline constexpr std::uint32_t null = 5;
inline constexpr std::uint32_t oid = 6;
inline constexpr std::uint32_t utf8_string = 12;
inline constexpr std::uint32_t sequence = 16;
inline constexpr std::uint32_t set = 17;
inline constexpr std::uint32_t printable_string = 19;
inline constexpr std::uint32_t t61_string = 20;
inline constexpr std::uint32_t ia5_string = 22;
inline constexpr std::uint32_t utc_time = 23;
inline constexpr std::uint32_t generalized_time = 24;
}  // namespace tag

struct TlvNode {
    TagClass tag_class = TagClass::universal;
    std::uint32_t tag_number = 0;
    bool constructed = false;
    Bytes content;
    std::size_t header_length = 0;
    std::size_t total_length = 0;  // header_length + content.size()

    bool is_universal(std::uint32_t number) const {
        return tag_class == TagClass::universal && tag_number == number;
    }
    bool is_context(std::uint32_t number) const {
        return tag_class == TagClass::context && tag_number == number;
    }
};

struct OidValue {
    std::vector<std::uint64_t> arcs;

    std::string text() const;  // dotted decimal
    bool operator==(const OidValue& other) const = default;
};

OidValue oid_from_text(const std::string& dotted);

enum class TimeForm { utc_time, generalized_time };

struct Asn1Time {
    std::int64_t instant = 0;  // UTC epoch seconds
    TimeForm source_form = TimeForm::utc_time;

    bool operator==(const Asn1Time& other) const = default;
    bool operator<(const Asn1Time& other) const { return instant < other.instant; }
    std::string iso8601() const;
};

// Reads the TLV starting at offset. Rejects indefinite lengths, non-minimal
// length octets, and tag numbers >= 2^31.
TlvNode read_tlv(ByteView bytes, std::size_t offset);

Bytes write_tlv(TagClass tag_class, std::uint32_t tag_number, bool constructed,
                ByteView content);
inline Bytes write_tlv(const TlvNode& node) {
    return write_tlv(node.tag_class, node.tag_number, node.constructed,
                     node.content);
}

// Base-128 arc decoding of OID content octets (the first octet carries the
// first two arcs).
OidValue decode_oid(ByteView content);
Bytes encode_oid(const OidValue& oid);

// UTCTime (two-digit year, pivot at 50) or GeneralizedTime. Only the
// DER-complete forms YYMMDDHHMMSSZ / YYYYMMDDHHMMSSZ are accepted.
Asn1Time parse_time(const TlvNode& node);
std::string render_time(const Asn1Time& time);  // inverse of parse_time

// Sequential reader over the content of a constructed value.
class Reader {
public:
    explicit Reader(ByteView data) : data_(data) {}

    bool empty() const { return pos_ >= data_.size(); }
    std::size_t remaining() const { return data_.size() - pos_; }

    TlvNode next();
    const TlvNode& peek();

private:
    ByteView data_;
    std::size_t pos_ = 0;
    TlvNode peeked_;
    bool has_peeked_ = false;
};

// Convenience constructors for building X.509 test fixtures and directory
// attribute payloads.
Bytes make_sequence(const std::vector<Bytes>& children);
Bytes make_set(const std::vector<Bytes>& children);
Bytes make_explicit(std::uint32_t context_tag, ByteView inner);
Bytes make_context_primitive(std::uint32_t context_tag, ByteView content);
Bytes make_boolean(bool value);
Bytes make_integer(std::int64_t value);
Bytes make_integer_bytes(ByteView magnitude);  // non-negative, minimal form
Bytes make_null();
Bytes make_oid(const std::string& dotted);
Bytes make_octet_string(ByteView content);
Bytes make_bit_string(ByteView bits, unsigned unused_bits = 0);
Bytes make_printable_string(const std::string& s);
Bytes make_utf8_string(const std::string& s);
Bytes make_ia5_string(const std::string& s);
Bytes make_time(const Asn1Time& t);

}  // namespace dirplan::der
