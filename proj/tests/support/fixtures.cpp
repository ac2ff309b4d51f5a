#include "fixtures.hpp"

#include <stdexcept>

#include "dirplan/dn.hpp"
#include "dirplan/timeutil.hpp"

namespace fixtures {

namespace {

namespace der = dirplan::der;
using dirplan::to_bytes;

constexpr const char* kSha256WithRsa = "1.2.840.113549.1.1.11";
constexpr const char* kRsaEncryption = "1.2.840.113549.1.1.1";

Bytes algorithm_identifier(const char* oid) {
    return der::make_sequence({der::make_oid(oid), der::make_null()});
}

Bytes dummy_spki() {
    const Bytes key_bits(16, 0x00);
    return der::make_sequence(
        {algorithm_identifier(kRsaEncryption), der::make_bit_string(key_bits)});
}

Bytes dummy_signature() {
    const Bytes sig_bits(32, 0x00);
    return der::make_bit_string(sig_bits);
}

Bytes name_from_text(const std::string& dn_text) {
    return dirplan::x509::encode_name(dirplan::parse_dn(dn_text));
}

Bytes extension(const char* oid, bool critical, const Bytes& inner) {
    std::vector<Bytes> fields = {der::make_oid(oid)};
    if (critical) fields.push_back(der::make_boolean(true));
    fields.push_back(der::make_octet_string(inner));
    return der::make_sequence(fields);
}

// DER named bit list: trailing zero bits are dropped.
Bytes key_usage_bit_string(std::uint16_t mask) {
    int highest = -1;
    for (int i = 0; i < 16; ++i) {
        if (mask & (1u << i)) highest = i;
    }
    if (highest < 0) throw std::invalid_argument("empty keyUsage mask");
    const int total_bits = highest + 1;
    const int total_bytes = (total_bits + 7) / 8;
    Bytes bits(static_cast<std::size_t>(total_bytes), 0x00);
    for (int i = 0; i <= highest; ++i) {
        if (mask & (1u << i)) {
            bits[static_cast<std::size_t>(i / 8)] |=
                static_cast<std::uint8_t>(0x80u >> (i % 8));
        }
    }
    const unsigned unused = static_cast<unsigned>(total_bytes * 8 - total_bits);
    return der::make_bit_string(bits, unused);
}

}  // namespace

der::Asn1Time time_from_iso(const std::string& iso) {
    const std::optional<std::int64_t> instant = dirplan::timeutil::parse_iso8601_utc(iso);
    if (!instant) throw std::invalid_argument("bad ISO time: " + iso);
    const int year = dirplan::timeutil::civil_from_epoch(*instant).year;
    der::Asn1Time t;
    t.instant = *instant;
    t.source_form = (year >= 1950 && year <= 2049) ? der::TimeForm::utc_time
                                                   : der::TimeForm::generalized_time;
    return t;
}

Bytes make_certificate(const CertSpec& spec) {
    std::vector<Bytes> tbs_fields;
    tbs_fields.push_back(der::make_explicit(0, der::make_integer(2)));  // v3
    if (spec.serial_magnitude) {
        tbs_fields.push_back(der::make_integer_bytes(*spec.serial_magnitude));
    } else {
        tbs_fields.push_back(der::make_integer(static_cast<std::int64_t>(spec.serial)));
    }
    tbs_fields.push_back(algorithm_identifier(kSha256WithRsa));
    tbs_fields.push_back(name_from_text(spec.issuer_dn));
    tbs_fields.push_back(der::make_sequence({der::make_time(time_from_iso(spec.not_before)),
                                             der::make_time(time_from_iso(spec.not_after))}));
    tbs_fields.push_back(name_from_text(spec.subject_dn));
    tbs_fields.push_back(dummy_spki());

    std::vector<Bytes> extensions;
    if (spec.key_usage_bits != 0) {
        extensions.push_back(
            extension("2.5.29.15", true, key_usage_bit_string(spec.key_usage_bits)));
    }
    if (spec.ca.has_value()) {
        std::vector<Bytes> bc;
        if (*spec.ca) bc.push_back(der::make_boolean(true));
        extensions.push_back(extension("2.5.29.19", true, der::make_sequence(bc)));
    }
    if (!spec.crl_dp_urls.empty()) {
        std::vector<Bytes> points;
        for (const std::string& url : spec.crl_dp_urls) {
            const Bytes general_name =
                der::make_context_primitive(6, to_bytes(url));  // uniformResourceIdentifier
            const Bytes full_name = der::write_tlv(der::TagClass::context, 0, true,
                                                   general_name);  // fullName
            const Bytes dp_name = der::make_explicit(0, full_name);
            points.push_back(der::make_sequence({dp_name}));
        }
        extensions.push_back(extension("2.5.29.31", false, der::make_sequence(points)));
    }
    if (spec.add_unknown_critical_extension) {
        extensions.push_back(
            extension("1.3.6.1.4.1.99999.1", true, der::make_octet_string({})));
    }
    if (!extensions.empty()) {
        tbs_fields.push_back(der::make_explicit(3, der::make_sequence(extensions)));
    }

    const Bytes tbs = der::make_sequence(tbs_fields);
    return der::make_sequence({tbs, algorithm_identifier(kSha256WithRsa), dummy_signature()});
}

Bytes make_crl(const CrlSpec& spec) {
    std::vector<Bytes> tbs_fields;
    tbs_fields.push_back(der::make_integer(1));  // v2
    tbs_fields.push_back(algorithm_identifier(kSha256WithRsa));
    tbs_fields.push_back(name_from_text(spec.issuer_dn));
    tbs_fields.push_back(der::make_time(time_from_iso(spec.this_update)));
    if (spec.next_update) {
        tbs_fields.push_back(der::make_time(time_from_iso(*spec.next_update)));
    }

    if (!spec.revoked.empty()) {
        std::vector<Bytes> entries;
        for (const CrlEntrySpec& entry : spec.revoked) {
            std::vector<Bytes> fields;
            fields.push_back(der::make_integer(static_cast<std::int64_t>(entry.serial)));
            fields.push_back(der::make_time(time_from_iso(entry.revocation_date)));
            if (entry.certificate_issuer_dn) {
                const Bytes directory_name = der::write_tlv(
                    der::TagClass::context, 4, true,
                    name_from_text(*entry.certificate_issuer_dn));
                const Bytes general_names = der::make_sequence({directory_name});
                fields.push_back(der::make_sequence(
                    {extension("2.5.29.29", false, general_names)}));
            }
            entries.push_back(der::make_sequence(fields));
        }
        tbs_fields.push_back(der::make_sequence(entries));
    }

    std::vector<Bytes> extensions;
    if (spec.crl_number) {
        extensions.push_back(extension(
            "2.5.29.20", false,
            der::make_integer(static_cast<std::int64_t>(*spec.crl_number))));
    }
    if (spec.base_crl_number) {
        extensions.push_back(extension(
            "2.5.29.27", true,
            der::make_integer(static_cast<std::int64_t>(*spec.base_crl_number))));
    }
    if (spec.indirect) {
        const Bytes flag = {0xff};
        const Bytes idp = der::make_sequence(
            {der::make_context_primitive(4, flag)});  // indirectCRL TRUE
        extensions.push_back(extension("2.5.29.28", true, idp));
    }
    if (spec.add_unknown_critical_extension) {
        extensions.push_back(
            extension("1.3.6.1.4.1.99999.2", true, der::make_octet_string({})));
    }
    if (!extensions.empty()) {
        tbs_fields.push_back(der::make_explicit(0, der::make_sequence(extensions)));
    }

    const Bytes tbs = der::make_sequence(tbs_fields);
    return der::make_sequence({tbs, algorithm_identifier(kSha256WithRsa), dummy_signature()});
}

Bytes user_cert() {
    CertSpec spec;
    spec.subject_dn = "CN=Alice,O=Org,C=DE";
    spec.issuer_dn = "CN=MyCA,O=OrgCA,C=DE";
    spec.serial = 42;
    spec.not_before = "2004-03-15T12:00:00Z";
    spec.not_after = "2005-03-15T12:00:00Z";
    spec.key_usage_bits =
        static_cast<std::uint16_t>(dirplan::x509::KeyUsage::digital_signature) |
        static_cast<std::uint16_t>(dirplan::x509::KeyUsage::non_repudiation);
    spec.crl_dp_urls = {
        "ldap://192.168.0.1:389/CN=MyCA,O=OrgCA,C=DE,DC=MyOrg,DC=DE"
        "?certificateRevocationList?base?objectClass=cRLDistributionPoint"};
    return make_certificate(spec);
}

Bytes ca_cert() {
    CertSpec spec;
    spec.subject_dn = "CN=MyCA,O=OrgCA,C=DE";
    spec.issuer_dn = "CN=MyCA,O=OrgCA,C=DE";
    spec.serial = 1;
    spec.not_before = "2004-01-01T00:00:00Z";
    spec.not_after = "2030-01-01T00:00:00Z";
    spec.key_usage_bits =
        static_cast<std::uint16_t>(dirplan::x509::KeyUsage::key_cert_sign) |
        static_cast<std::uint16_t>(dirplan::x509::KeyUsage::crl_sign);
    spec.ca = true;
    return make_certificate(spec);
}

Bytes direct_crl() {
    CrlSpec spec;
    spec.issuer_dn = "CN=MyCA,O=OrgCA,C=DE";
    spec.this_update = "2005-06-01T00:00:00Z";
    spec.next_update = "2005-07-01T00:00:00Z";
    spec.revoked = {{11, "2005-05-01T00:00:00Z", std::nullopt},
                    {12, "2005-05-02T00:00:00Z", std::nullopt}};
    spec.crl_number = 5;
    return make_crl(spec);
}

Bytes delta_crl() {
    CrlSpec spec;
    spec.issuer_dn = "CN=MyCA,O=OrgCA,C=DE";
    spec.this_update = "2005-06-15T00:00:00Z";
    spec.next_update = "2005-07-15T00:00:00Z";
    spec.revoked = {{13, "2005-06-10T00:00:00Z", std::nullopt}};
    spec.crl_number = 7;
    spec.base_crl_number = 5;
    return make_crl(spec);
}

Bytes indirect_crl() {
    CrlSpec spec;
    spec.issuer_dn = "CN=RootCRLIssuer,O=Root,C=DE";
    spec.this_update = "2005-06-20T00:00:00Z";
    spec.next_update = "2005-07-20T00:00:00Z";
    spec.revoked = {{11, "2005-06-18T00:00:00Z", std::string("CN=MyCA,O=OrgCA,C=DE")}};
    spec.crl_number = 3;
    spec.indirect = true;
    return make_crl(spec);
}

}  // namespace fixtures
