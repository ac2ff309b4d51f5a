#include <doctest.h>

#include <random>

#include "dirplan/der.hpp"
#include "dirplan/timeutil.hpp"

using namespace dirplan;
using der::Errc;
using der::TagClass;

namespace {

der::TlvNode node_from(const Bytes& bytes) { return der::read_tlv(bytes, 0); }

std::int64_t iso(const char* text) {
    return *timeutil::parse_iso8601_utc(text);
}

}  // namespace

TEST_CASE("read_tlv parses an empty constructed SEQUENCE") {
    const Bytes bytes = {0x30, 0x00};
    const der::TlvNode node = node_from(bytes);
    CHECK(node.is_universal(der::tag::sequence));
    CHECK(node.constructed);
    CHECK(node.content.empty());
    CHECK(node.header_length == 2);
    CHECK(node.total_length == 2);
}

TEST_CASE("read_tlv parses a SEQUENCE holding INTEGER 5") {
    // openssl asn1parse on these bytes: SEQUENCE (hl=2 l=3), INTEGER :05
    const Bytes bytes = {0x30, 0x03, 0x02, 0x01, 0x05};
    const der::TlvNode outer = node_from(bytes);
    CHECK(outer.is_universal(der::tag::sequence));
    CHECK(outer.total_length == 5);
    const der::TlvNode inner = der::read_tlv(outer.content, 0);
    CHECK(inner.is_universal(der::tag::integer));
    REQUIRE(inner.content.size() == 1);
    CHECK(inner.content[0] == 0x05);
}

TEST_CASE("read_tlv rejects long-form length where short form fits") {
    // openssl asn1parse shows hl=3 for this one-byte INTEGER: the long form
    // was used, which X.690 10.1 forbids for DER
    const Bytes bytes = {0x02, 0x81, 0x01, 0x05};
    CHECK_THROWS_WITH_AS(node_from(bytes), doctest::Contains("long form"), der::Error);
    try {
        node_from(bytes);
    } catch (const der::Error& e) {
        CHECK(e.code() == Errc::non_canonical_length);
    }
}

TEST_CASE("read_tlv rejects indefinite length") {
    const Bytes bytes = {0x30, 0x80, 0x00, 0x00};
    try {
        node_from(bytes);
        FAIL("expected der::Error");
    } catch (const der::Error& e) {
        CHECK(e.code() == Errc::indefinite_length);
    }
}

TEST_CASE("read_tlv rejects content running past the buffer") {
    const Bytes bytes = {0x30, 0x05, 0x02, 0x01};
    try {
        node_from(bytes);
        FAIL("expected der::Error");
    } catch (const der::Error& e) {
        CHECK(e.code() == Errc::truncated);
    }
}

TEST_CASE("read_tlv rejects length octets with leading zero") {
    Bytes bytes = {0x04, 0x82, 0x00, 0x81};
    bytes.resize(4 + 0x81, 0xaa);
    try {
        node_from(bytes);
        FAIL("expected der::Error");
    } catch (const der::Error& e) {
        CHECK(e.code() == Errc::non_canonical_length);
    }
}

TEST_CASE("read_tlv rejects tag numbers of 2^31 and above") {
    // high-tag-number form for 2^31: five base-128 septets
    const Bytes bytes = {0x1f, 0x88, 0x80, 0x80, 0x80, 0x00, 0x00};
    try {
        node_from(bytes);
        FAIL("expected der::Error");
    } catch (const der::Error& e) {
        CHECK(e.code() == Errc::malformed_tag);
    }
}

TEST_CASE("decode_oid handles the X.520 attribute arcs") {
    // openssl asn1parse names 55 04 03 commonName and 55 04 0a
    // organizationName
    CHECK(der::decode_oid(Bytes{0x55, 0x04, 0x03}).text() == "2.5.4.3");
    CHECK(der::decode_oid(Bytes{0x55, 0x04, 0x0a}).text() == "2.5.4.10");
}

TEST_CASE("decode_oid error cases") {
    try {
        der::decode_oid(Bytes{});
        FAIL("expected der::Error");
    } catch (const der::Error& e) {
        CHECK(e.code() == Errc::empty_oid);
    }
    try {
        der::decode_oid(Bytes{0x80});
        FAIL("expected der::Error");
    } catch (const der::Error& e) {
        CHECK(e.code() == Errc::truncated_arc);
    }
    try {
        der::decode_oid(Bytes{0x55, 0x80, 0x03});  // padded arc
        FAIL("expected der::Error");
    } catch (const der::Error& e) {
        CHECK(e.code() == Errc::non_canonical_arc);
    }
}

TEST_CASE("encode_oid then decode_oid is the identity") {
    std::mt19937 rng(41);
    std::uniform_int_distribution<int> first(0, 2);
    std::uniform_int_distribution<std::uint64_t> small(0, 39);
    std::uniform_int_distribution<std::uint64_t> any(0, 0xffffffffull);
    std::uniform_int_distribution<int> extra(0, 6);
    for (int i = 0; i < 500; ++i) {
        der::OidValue oid;
        oid.arcs.push_back(static_cast<std::uint64_t>(first(rng)));
        oid.arcs.push_back(oid.arcs[0] < 2 ? small(rng) : any(rng));
        const int n = extra(rng);
        for (int j = 0; j < n; ++j) oid.arcs.push_back(any(rng));
        CHECK(der::decode_oid(der::encode_oid(oid)) == oid);
    }
}

TEST_CASE("parse_time applies the UTCTime pivot") {
    auto utc = [](const char* text) {
        return der::write_tlv(TagClass::universal, der::tag::utc_time, false,
                              to_bytes(text));
    };
    const der::Asn1Time t1 = der::parse_time(node_from(utc("050315120000Z")));
    CHECK(t1.instant == iso("2005-03-15T12:00:00Z"));
    CHECK(t1.source_form == der::TimeForm::utc_time);

    const der::Asn1Time t2 = der::parse_time(node_from(utc("990101000000Z")));
    CHECK(t2.instant == iso("1999-01-01T00:00:00Z"));

    const Bytes gen = der::write_tlv(TagClass::universal, der::tag::generalized_time,
                                     false, to_bytes("20300101000000Z"));
    const der::Asn1Time t3 = der::parse_time(node_from(gen));
    CHECK(t3.instant == iso("2030-01-01T00:00:00Z"));
    CHECK(t3.source_form == der::TimeForm::generalized_time);
}

TEST_CASE("parse_time rejects short and impossible forms") {
    auto utc = [](const char* text) {
        return der::write_tlv(TagClass::universal, der::tag::utc_time, false,
                              to_bytes(text));
    };
    for (const char* bad : {"0503151200Z", "051315120000Z", "050332120000Z",
                            "050315120000", "050229120000Z"}) {
        CAPTURE(bad);
        try {
            der::parse_time(node_from(utc(bad)));
            FAIL("expected der::Error");
        } catch (const der::Error& e) {
            CHECK(e.code() == Errc::malformed_time);
        }
    }
}

TEST_CASE("parse_time output re-renders byte-identically") {
    for (const char* text : {"050315120000Z", "990101000000Z", "491231235959Z",
                             "500101000000Z"}) {
        const Bytes node = der::write_tlv(TagClass::universal, der::tag::utc_time,
                                          false, to_bytes(text));
        CHECK(der::render_time(der::parse_time(node_from(node))) == text);
    }
    const Bytes gen = der::write_tlv(TagClass::universal, der::tag::generalized_time,
                                     false, to_bytes("20550101000000Z"));
    CHECK(der::render_time(der::parse_time(node_from(gen))) == "20550101000000Z");
}

TEST_CASE("write_tlv emits minimal encodings") {
    CHECK(der::write_tlv(TagClass::universal, 16, true, {}) == Bytes{0x30, 0x00});
    CHECK(der::write_tlv(TagClass::universal, 2, false, Bytes{0x05}) ==
          Bytes{0x02, 0x01, 0x05});
}

TEST_CASE("write_tlv then read_tlv reproduces the node, and the parser never "
          "reads past total_length") {
    std::mt19937 rng(42);
    std::uniform_int_distribution<int> class_pick(0, 3);
    std::uniform_int_distribution<std::uint32_t> tag_pick(0, 4000);
    std::uniform_int_distribution<int> size_pick(0, 300);
    std::uniform_int_distribution<int> byte_pick(0, 255);
    std::uniform_int_distribution<int> suffix_pick(0, 16);

    for (int i = 0; i < 400; ++i) {
        const auto tag_class = static_cast<TagClass>(class_pick(rng));
        std::uint32_t tag_number = tag_pick(rng);
        if (tag_class == TagClass::universal && tag_number == 0) tag_number = 1;
        const bool constructed = (byte_pick(rng) & 1) != 0;
        Bytes content(static_cast<std::size_t>(size_pick(rng)));
        for (auto& b : content) b = static_cast<std::uint8_t>(byte_pick(rng));

        Bytes encoded = der::write_tlv(tag_class, tag_number, constructed, content);
        const std::size_t encoded_size = encoded.size();

        // random trailing garbage must not be touched
        const int suffix = suffix_pick(rng);
        for (int j = 0; j < suffix; ++j) {
            encoded.push_back(static_cast<std::uint8_t>(byte_pick(rng)));
        }

        const der::TlvNode node = der::read_tlv(encoded, 0);
        CHECK(node.tag_class == tag_class);
        CHECK(node.tag_number == tag_number);
        CHECK(node.constructed == constructed);
        CHECK(node.content == content);
        CHECK(node.total_length == encoded_size);
        CHECK(der::write_tlv(node) == Bytes(encoded.begin(),
                                            encoded.begin() + static_cast<std::ptrdiff_t>(
                                                                  encoded_size)));
    }
}
