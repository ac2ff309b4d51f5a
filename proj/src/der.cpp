#include "dirplan/der.hpp"

#include <algorithm>

#include "dirplan/timeutil.hpp"

namespace dirplan::der {

namespace {

[[noreturn]] void fail(Errc code, const std::string& what) {
    throw Error(code, what);
}

int digit(char c) {
    if (c < '0' || c > '9') fail(Errc::malformed_time, "non-digit in time string");
    return c - '0';
}

int two_digits(const std::string& s, std::size_t at) {
    return digit(s[at]) * 10 + digit(s[at + 1]);
}

}  // namespace

std::string OidValue::text() const {
    std::string out;
    for (std::size_t i = 0; i < arcs.size(); ++i) {
        if (i > 0) out += '.';
        out += std::to_string(arcs[i]);
    }
    return out;
}

OidValue oid_from_text(const std::string& dotted) {
    OidValue oid;
    std::uint64_t arc = 0;
    bool have_digit = false;
    for (char c : dotted) {
        if (c == '.') {
            if (!have_digit) throw std::invalid_argument("bad OID text: " + dotted);
            oid.arcs.push_back(arc);
            arc = 0;
            have_digit = false;
        } else if (c >= '0' && c <= '9') {
            arc = arc * 10 + static_cast<std::uint64_t>(c - '0');
            have_digit = true;
        } else {
            throw std::invalid_argument("bad OID text: " + dotted);
        }
    }
    if (!have_digit) throw std::invalid_argument("bad OID text: " + dotted);
    oid.arcs.push_back(arc);
    if (oid.arcs.size() < 2) throw std::invalid_argument("OID needs two arcs: " + dotted);
    return oid;
}

std::string Asn1Time::iso8601() const { return timeutil::iso8601_utc(instant); }

TlvNode read_tlv(ByteView bytes, std::size_t offset) {
    if (offset >= bytes.size()) fail(Errc::truncated, "offset past end of input");
    std::size_t pos = offset;

    const std::uint8_t first = bytes[pos++];
    TlvNode node;
    node.tag_class = static_cast<TagClass>(first >> 6);
    node.constructed = (first & 0x20) != 0;
    std::uint32_t tag = first & 0x1f;
    if (tag == 0x1f) {
        // high-tag-number form
        std::uint64_t value = 0;
        std::size_t arc_len = 0;
        while (true) {
            if (pos >= bytes.size()) fail(Errc::truncated, "truncated high tag number");
            const std::uint8_t b = bytes[pos++];
            if (arc_len == 0 && b == 0x80) {
                fail(Errc::malformed_tag, "non-minimal high tag number");
            }
            value = value << 7 | (b & 0x7f);
            ++arc_len;
            if (value >= (1ull << 31)) fail(Errc::malformed_tag, "tag number too large");
            if ((b & 0x80) == 0) break;
        }
        if (value < 31) fail(Errc::malformed_tag, "high form used for low tag number");
        tag = static_cast<std::uint32_t>(value);
    }
    node.tag_number = tag;

    if (pos >= bytes.size()) fail(Errc::truncated, "missing length octet");
    const std::uint8_t len0 = bytes[pos++];
    std::size_t length = 0;
    if (len0 == 0x80) {
        fail(Errc::indefinite_length, "indefinite length is not DER");
    } else if (len0 & 0x80) {
        const unsigned n = len0 & 0x7f;
        if (n > sizeof(std::size_t)) fail(Errc::non_canonical_length, "length octets overflow");
        if (pos + n > bytes.size()) fail(Errc::truncated, "truncated length octets");
        for (unsigned i = 0; i < n; ++i) {
            length = length << 8 | bytes[pos++];
        }
        // X.690 10.1: the length must use the fewest octets possible.
        if (bytes[pos - n] == 0) fail(Errc::non_canonical_length, "leading zero length octet");
        if (length < 0x80) fail(Errc::non_canonical_length, "long form used for short length");
    } else {
        length = len0;
    }

    node.header_length = pos - offset;
    if (pos + length > bytes.size()) fail(Errc::truncated, "content exceeds buffer");
    node.content.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                        bytes.begin() + static_cast<std::ptrdiff_t>(pos + length));
    node.total_length = node.header_length + length;
    return node;
}

Bytes write_tlv(TagClass tag_class, std::uint32_t tag_number, bool constructed,
                ByteView content) {
    Bytes out;
    std::uint8_t first = static_cast<std::uint8_t>(static_cast<unsigned>(tag_class) << 6);
    if (constructed) first |= 0x20;
    if (tag_number < 31) {
        out.push_back(first | static_cast<std::uint8_t>(tag_number));
    } else {
        out.push_back(first | 0x1f);
        std::uint8_t stack[5];
        int n = 0;
        std::uint32_t v = tag_number;
        do {
            stack[n++] = static_cast<std::uint8_t>(v & 0x7f);
            v >>= 7;
        } while (v != 0);
        for (int i = n - 1; i > 0; --i) out.push_back(stack[i] | 0x80);
        out.push_back(stack[0]);
    }

    const std::size_t len = content.size();
    if (len < 0x80) {
        out.push_back(static_cast<std::uint8_t>(len));
    } else {
        std::uint8_t stack[sizeof(std::size_t)];
        int n = 0;
        std::size_t v = len;
        while (v != 0) {
            stack[n++] = static_cast<std::uint8_t>(v & 0xff);
            v >>= 8;
        }
        out.push_back(static_cast<std::uint8_t>(0x80 | n));
        for (int i = n - 1; i >= 0; --i) out.push_back(stack[i]);
    }
    out.insert(out.end(), content.begin(), content.end());
    return out;
}

OidValue decode_oid(ByteView content) {
    if (content.empty()) fail(Errc::empty_oid, "empty OID content");
    OidValue oid;
    std::size_t pos = 0;

    std::uint64_t value = 0;
    std::size_t arc_len = 0;
    bool first_arc = true;
    while (pos < content.size()) {
        const std::uint8_t b = content[pos++];
        if (arc_len == 0 && b == 0x80) {
            if (pos == content.size()) {
                fail(Errc::truncated_arc, "continuation bit set on last byte");
            }
            fail(Errc::non_canonical_arc, "padded arc encoding");
        }
        value = value << 7 | (b & 0x7f);
        ++arc_len;
        if (arc_len > 9) fail(Errc::non_canonical_arc, "arc too long");
        if ((b & 0x80) == 0) {
            if (first_arc) {
                // first octet group packs the first two arcs
                if (value < 40) {
                    oid.arcs.push_back(0);
                    oid.arcs.push_back(value);
                } else if (value < 80) {
                    oid.arcs.push_back(1);
                    oid.arcs.push_back(value - 40);
                } else {
                    oid.arcs.push_back(2);
                    oid.arcs.push_back(value - 80);
                }
                first_arc = false;
            } else {
                oid.arcs.push_back(value);
            }
            value = 0;
            arc_len = 0;
        }
    }
    if (arc_len != 0) fail(Errc::truncated_arc, "continuation bit set on last byte");
    return oid;
}

Bytes encode_oid(const OidValue& oid) {
    if (oid.arcs.size() < 2) throw std::invalid_argument("OID needs at least two arcs");
    if (oid.arcs[0] > 2 || (oid.arcs[0] < 2 && oid.arcs[1] >= 40)) {
        throw std::invalid_argument("invalid leading OID arcs");
    }
    Bytes out;
    auto put_arc = [&out](std::uint64_t v) {
        std::uint8_t stack[10];
        int n = 0;
        do {
            stack[n++] = static_cast<std::uint8_t>(v & 0x7f);
            v >>= 7;
        } while (v != 0);
        for (int i = n - 1; i > 0; --i) out.push_back(stack[i] | 0x80);
        out.push_back(stack[0]);
    };
    put_arc(oid.arcs[0] * 40 + oid.arcs[1]);
    for (std::size_t i = 2; i < oid.arcs.size(); ++i) put_arc(oid.arcs[i]);
    return out;
}

Asn1Time parse_time(const TlvNode& node) {
    if (node.tag_class != TagClass::universal || node.constructed ||
        (node.tag_number != tag::utc_time && node.tag_number != tag::generalized_time)) {
        fail(Errc::malformed_time, "node is not a time value");
    }
    const std::string s(node.content.begin(), node.content.end());
    timeutil::CivilTime c;
    Asn1Time out;
    if (node.tag_number == tag::utc_time) {
        // YYMMDDHHMMSSZ
        if (s.size() != 13 || s.back() != 'Z') fail(Errc::malformed_time, "bad UTCTime form");
        const int yy = two_digits(s, 0);
        c.year = yy < 50 ? 2000 + yy : 1900 + yy;
        c.month = two_digits(s, 2);
        c.day = two_digits(s, 4);
        c.hour = two_digits(s, 6);
        c.minute = two_digits(s, 8);
        c.second = two_digits(s, 10);
        out.source_form = TimeForm::utc_time;
    } else {
        // YYYYMMDDHHMMSSZ
        if (s.size() != 15 || s.back() != 'Z') {
            fail(Errc::malformed_time, "bad GeneralizedTime form");
        }
        c.year = two_digits(s, 0) * 100 + two_digits(s, 2);
        c.month = two_digits(s, 4);
        c.day = two_digits(s, 6);
        c.hour = two_digits(s, 8);
        c.minute = two_digits(s, 10);
        c.second = two_digits(s, 12);
        out.source_form = TimeForm::generalized_time;
    }
    if (!timeutil::is_valid_civil(c)) fail(Errc::malformed_time, "impossible date: " + s);
    out.instant = timeutil::epoch_from_civil(c);
    return out;
}

std::string render_time(const Asn1Time& time) {
    const timeutil::CivilTime c = timeutil::civil_from_epoch(time.instant);
    char buf[20];
    if (time.source_form == TimeForm::utc_time) {
        if (c.year < 1950 || c.year > 2049) {
            fail(Errc::malformed_time, "year out of UTCTime range");
        }
        std::snprintf(buf, sizeof(buf), "%02d%02d%02d%02d%02d%02dZ", c.year % 100,
                      c.month, c.day, c.hour, c.minute, c.second);
    } else {
        std::snprintf(buf, sizeof(buf), "%04d%02d%02d%02d%02d%02dZ", c.year,
                      c.month, c.day, c.hour, c.minute, c.second);
    }
    return buf;
}

TlvNode Reader::next() {
    if (has_peeked_) {
        has_peeked_ = false;
        pos_ += peeked_.total_length;
        return std::move(peeked_);
    }
    TlvNode node = read_tlv(data_, pos_);
    pos_ += node.total_length;
    return node;
}

const TlvNode& Reader::peek() {
    if (!has_peeked_) {
        peeked_ = read_tlv(data_, pos_);
        has_peeked_ = true;
    }
    return peeked_;
}

Bytes make_sequence(const std::vector<Bytes>& children) {
    Bytes content;
    for (const Bytes& c : children) content.insert(content.end(), c.begin(), c.end());
    return write_tlv(TagClass::universal, tag::sequence, true, content);
}

Bytes make_set(const std::vector<Bytes>& children) {
    // DER SET OF: element encodings sorted ascending
    std::vector<Bytes> sorted = children;
    std::sort(sorted.begin(), sorted.end());
    Bytes content;
    for (const Bytes& c : sorted) content.insert(content.end(), c.begin(), c.end());
    return write_tlv(TagClass::universal, tag::set, true, content);
}

Bytes make_explicit(std::uint32_t context_tag, ByteView inner) {
    return write_tlv(TagClass::context, context_tag, true, inner);
}

Bytes make_context_primitive(std::uint32_t context_tag, ByteView content) {
    return write_tlv(TagClass::context, context_tag, false, content);
}

Bytes make_boolean(bool value) {
    const Bytes content{static_cast<std::uint8_t>(value ? 0xff : 0x00)};
    return write_tlv(TagClass::universal, tag::boolean, false, content);
}

Bytes make_integer(std::int64_t value) {
    if (value < 0) throw std::invalid_argument("negative integers unsupported");
    Bytes mag;
    std::uint64_t v = static_cast<std::uint64_t>(value);
    do {
        mag.insert(mag.begin(), static_cast<std::uint8_t>(v & 0xff));
        v >>= 8;
    } while (v != 0);
    return make_integer_bytes(mag);
}

Bytes make_integer_bytes(ByteView magnitude) {
    Bytes content;
    std::size_t start = 0;
    while (start + 1 < magnitude.size() && magnitude[start] == 0) ++start;
    if (magnitude.empty()) {
        content.push_back(0);
    } else {
        if (magnitude[start] & 0x80) content.push_back(0);  // keep it non-negative
        content.insert(content.end(), magnitude.begin() + static_cast<std::ptrdiff_t>(start),
                       magnitude.end());
    }
    return write_tlv(TagClass::universal, tag::integer, false, content);
}

Bytes make_null() { return write_tlv(TagClass::universal, tag::null, false, {}); }

Bytes make_oid(const std::string& dotted) {
    return write_tlv(TagClass::universal, tag::oid, false, encode_oid(oid_from_text(dotted)));
}

Bytes make_octet_string(ByteView content) {
    return write_tlv(TagClass::universal, tag::octet_string, false, content);
}

Bytes make_bit_string(ByteView bits, unsigned unused_bits) {
    Bytes content;
    content.push_back(static_cast<std::uint8_t>(unused_bits));
    content.insert(content.end(), bits.begin(), bits.end());
    return write_tlv(TagClass::universal, tag::bit_string, false, content);
}

Bytes make_printable_string(const std::string& s) {
    return write_tlv(TagClass::universal, tag::printable_string, false, to_bytes(s));
}

Bytes make_utf8_string(const std::string& s) {
    return write_tlv(TagClass::universal, tag::utf8_string, false, to_bytes(s));
}

Bytes make_ia5_string(const std::string& s) {
    return write_tlv(TagClass::universal, tag::ia5_string, false, to_bytes(s));
}

Bytes make_time(const Asn1Time& t) {
    const std::uint32_t tag_number =
        t.source_form == TimeForm::utc_time ? tag::utc_time : tag::generalized_time;
    return write_tlv(TagClass::universal, tag_number, false, to_bytes(render_time(t)));
}

}  // namespace dirplan::der
