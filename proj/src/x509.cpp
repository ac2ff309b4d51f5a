#include "dirplan/x509.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>

namespace dirplan::x509 {

namespace {

constexpr const char* kOidKeyUsage = "2.5.29.15";
constexpr const char* kOidBasicConstraints = "2.5.29.19";
constexpr const char* kOidCrlDistributionPoints = "2.5.29.31";
constexpr const char* kOidCrlNumber = "2.5.29.20";
constexpr const char* kOidDeltaCrlIndicator = "2.5.29.27";
constexpr const char* kOidIssuingDistributionPoint = "2.5.29.28";
constexpr const char* kOidCertificateIssuer = "2.5.29.29";

struct AttributeOid {
    const char* oid;
    const char* name;
};

// RFC 4514 short names plus the attribute types this toolkit plans around.
constexpr AttributeOid kAttributeOids[] = {
    {"2.5.4.3", "CN"},
    {"2.5.4.4", "SN"},
    {"2.5.4.5", "serialNumber"},
    {"2.5.4.6", "C"},
    {"2.5.4.7", "L"},
    {"2.5.4.8", "ST"},
    {"2.5.4.9", "STREET"},
    {"2.5.4.10", "O"},
    {"2.5.4.11", "OU"},
    {"2.5.4.12", "title"},
    {"0.9.2342.19200300.100.1.25", "DC"},
    {"0.9.2342.19200300.100.1.1", "UID"},
    {"1.2.840.113549.1.9.1", "emailAddress"},
};

std::string attribute_name_for_oid(const std::string& dotted) {
    for (const AttributeOid& a : kAttributeOids) {
        if (dotted == a.oid) return a.name;
    }
    return dotted;
}

std::string ascii_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string oid_for_attribute_name(const std::string& name) {
    const std::string lower = ascii_lower(name);
    for (const AttributeOid& a : kAttributeOids) {
        if (lower == ascii_lower(a.name)) return a.oid;
    }
    // dotted-decimal attribute types pass through
    if (!name.empty() && name.find_first_not_of("0123456789.") == std::string::npos) {
        return name;
    }
    throw std::invalid_argument("no OID known for attribute type: " + name);
}

bool is_printable_string(const std::string& s) {
    static const std::string extra = " '()+,-./:=?";
    return std::all_of(s.begin(), s.end(), [](char c) {
        return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
               (c >= '0' && c <= '9') || extra.find(c) != std::string::npos;
    });
}

[[noreturn]] void fail(Errc errc, const std::string& what) {
    const char* prefix = errc == Errc::malformed_certificate ? "malformed certificate: "
                                                             : "malformed CRL: ";
    throw Error(errc, prefix + what);
}

der::TlvNode expect(der::Reader& reader, std::uint32_t universal_tag,
                    bool constructed, const char* what, Errc errc) {
    if (reader.empty()) fail(errc, std::string("missing ") + what);
    der::TlvNode node = reader.next();
    if (!node.is_universal(universal_tag) || node.constructed != constructed) {
        fail(errc, std::string("unexpected tag where ") + what + " expected");
    }
    return node;
}

bool is_time_node(const der::TlvNode& node) {
    return node.is_universal(der::tag::utc_time) ||
           node.is_universal(der::tag::generalized_time);
}

std::uint64_t small_uint_from_integer(const der::TlvNode& node, Errc errc) {
    const Bytes& c = node.content;
    if (c.empty()) fail(errc, "empty INTEGER");
    if (c[0] & 0x80) fail(errc, "negative INTEGER");
    std::size_t start = 0;
    while (start + 1 < c.size() && c[start] == 0) ++start;
    if (c.size() - start > 8) fail(errc, "INTEGER too large");
    std::uint64_t v = 0;
    for (std::size_t i = start; i < c.size(); ++i) v = v << 8 | c[i];
    return v;
}

KeyUsageSet parse_key_usage_bits(ByteView ext_value, Errc errc) {
    der::TlvNode bits = der::read_tlv(ext_value, 0);
    if (!bits.is_universal(der::tag::bit_string) || bits.constructed) {
        fail(errc, "keyUsage is not a BIT STRING");
    }
    if (bits.content.empty()) fail(errc, "empty keyUsage BIT STRING");
    const unsigned unused = bits.content[0];
    const std::size_t total_bits = (bits.content.size() - 1) * 8 - unused;
    KeyUsageSet usage;
    for (unsigned i = 0; i < 9 && i < total_bits; ++i) {
        const std::uint8_t byte = bits.content[1 + i / 8];
        if (byte & (0x80u >> (i % 8))) {
            usage.bits |= static_cast<std::uint16_t>(1u << i);
        }
    }
    return usage;
}

// DistributionPoint ::= SEQUENCE { distributionPoint [0] DistributionPointName
// OPTIONAL, ... }; fullName [0] GeneralNames; URI GeneralName is [6].
std::vector<std::string> parse_crl_dp_urls(ByteView ext_value, Errc errc) {
    std::vector<std::string> urls;
    der::TlvNode list = der::read_tlv(ext_value, 0);
    if (!list.is_universal(der::tag::sequence)) {
        fail(errc, "cRLDistributionPoints is not a SEQUENCE");
    }
    der::Reader points(list.content);
    while (!points.empty()) {
        der::TlvNode point = points.next();
        if (!point.is_universal(der::tag::sequence)) {
            fail(errc, "DistributionPoint is not a SEQUENCE");
        }
        der::Reader fields(point.content);
        if (fields.empty()) continue;
        if (!fields.peek().is_context(0)) continue;  // no distributionPoint name
        der::TlvNode dp_name = fields.next();
        der::Reader choice(dp_name.content);
        while (!choice.empty()) {
            der::TlvNode full_name = choice.next();
            if (!full_name.is_context(0)) continue;  // not fullName
            der::Reader general_names(full_name.content);
            while (!general_names.empty()) {
                der::TlvNode gn = general_names.next();
                if (gn.is_context(6) && !gn.constructed) {
                    urls.emplace_back(gn.content.begin(), gn.content.end());
                }
            }
        }
    }
    return urls;
}

struct Extension {
    std::string oid;
    bool critical = false;
    Bytes value;
};

std::vector<Extension> parse_extension_list(const der::TlvNode& list, Errc errc) {
    std::vector<Extension> out;
    der::Reader reader(list.content);
    while (!reader.empty()) {
        der::TlvNode ext = reader.next();
        if (!ext.is_universal(der::tag::sequence)) fail(errc, "Extension is not a SEQUENCE");
        der::Reader fields(ext.content);
        Extension e;
        der::TlvNode oid_node = expect(fields, der::tag::oid, false, "extnID", errc);
        e.oid = der::decode_oid(oid_node.content).text();
        if (!fields.empty() && fields.peek().is_universal(der::tag::boolean)) {
            der::TlvNode crit = fields.next();
            e.critical = !crit.content.empty() && crit.content[0] != 0;
        }
        der::TlvNode value = expect(fields, der::tag::octet_string, false, "extnValue", errc);
        e.value = std::move(value.content);
        out.push_back(std::move(e));
    }
    return out;
}

DistinguishedName parse_directory_name_from_general_names(ByteView value, Errc errc) {
    der::TlvNode names = der::read_tlv(value, 0);
    if (!names.is_universal(der::tag::sequence)) fail(errc, "GeneralNames is not a SEQUENCE");
    der::Reader reader(names.content);
    while (!reader.empty()) {
        der::TlvNode gn = reader.next();
        if (gn.is_context(4) && gn.constructed) {
            der::Reader inner(gn.content);
            der::TlvNode name = expect(inner, der::tag::sequence, true, "directoryName", errc);
            return parse_name(name);
        }
    }
    fail(errc, "no directoryName in GeneralNames");
}

Bytes digest(ByteView data, const EVP_MD* md) {
    Bytes out(EVP_MAX_MD_SIZE);
    unsigned len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, md, nullptr) != 1) {
        throw std::runtime_error("digest computation failed");
    }
    out.resize(len);
    return out;
}

}  // namespace

std::vector<std::string> KeyUsageSet::names() const {
    static const char* kNames[] = {
        "digitalSignature", "nonRepudiation",  "keyEncipherment",
        "dataEncipherment", "keyAgreement",    "keyCertSign",
        "cRLSign",          "encipherOnly",    "decipherOnly",
    };
    std::vector<std::string> out;
    for (unsigned i = 0; i < 9; ++i) {
        if (bits & (1u << i)) out.emplace_back(kNames[i]);
    }
    return out;
}

std::string decimal_from_der_integer(ByteView content) {
    if (content.empty()) throw std::invalid_argument("empty INTEGER content");
    if (content[0] & 0x80) throw std::invalid_argument("negative INTEGER");
    if (content.size() > 1 && content[0] == 0 && !(content[1] & 0x80)) {
        throw std::invalid_argument("non-minimal INTEGER encoding");
    }
    Bytes mag(content.begin(), content.end());
    std::size_t start = 0;
    while (start + 1 < mag.size() && mag[start] == 0) ++start;
    mag.erase(mag.begin(), mag.begin() + static_cast<std::ptrdiff_t>(start));

    std::string digits;
    while (!(mag.size() == 1 && mag[0] == 0)) {
        unsigned rem = 0;
        Bytes quotient;
        for (std::uint8_t b : mag) {
            const unsigned cur = rem << 8 | b;
            const std::uint8_t q = static_cast<std::uint8_t>(cur / 10);
            rem = cur % 10;
            if (!quotient.empty() || q != 0) quotient.push_back(q);
        }
        digits += static_cast<char>('0' + rem);
        if (quotient.empty()) quotient.push_back(0);
        mag = std::move(quotient);
    }
    if (digits.empty()) digits = "0";
    std::reverse(digits.begin(), digits.end());
    return digits;
}

DistinguishedName parse_name(const der::TlvNode& name_node) {
    if (!name_node.is_universal(der::tag::sequence)) {
        throw std::invalid_argument("Name is not a SEQUENCE");
    }
    // DER order is root-first; flip to the leaf-first convention.
    std::vector<Rdn> root_first;
    der::Reader rdns(name_node.content);
    while (!rdns.empty()) {
        der::TlvNode set = rdns.next();
        if (!set.is_universal(der::tag::set)) {
            throw std::invalid_argument("RDN is not a SET");
        }
        Rdn rdn;
        der::Reader pairs(set.content);
        while (!pairs.empty()) {
            der::TlvNode atv = pairs.next();
            if (!atv.is_universal(der::tag::sequence)) {
                throw std::invalid_argument("AttributeTypeAndValue is not a SEQUENCE");
            }
            der::Reader fields(atv.content);
            if (fields.empty()) throw std::invalid_argument("empty AttributeTypeAndValue");
            der::TlvNode type = fields.next();
            if (!type.is_universal(der::tag::oid)) {
                throw std::invalid_argument("attribute type is not an OID");
            }
            if (fields.empty()) throw std::invalid_argument("missing attribute value");
            der::TlvNode value = fields.next();
            if (value.constructed) {
                throw std::invalid_argument("constructed attribute value");
            }
            rdn.pairs.emplace_back(attribute_name_for_oid(der::decode_oid(type.content).text()),
                                   std::string(value.content.begin(), value.content.end()));
        }
        if (rdn.pairs.empty()) throw std::invalid_argument("empty RDN");
        root_first.push_back(std::move(rdn));
    }
    DistinguishedName dn;
    dn.rdns.assign(root_first.rbegin(), root_first.rend());
    return dn;
}

Bytes encode_name(const DistinguishedName& dn) {
    std::vector<Bytes> rdns;
    for (auto it = dn.rdns.rbegin(); it != dn.rdns.rend(); ++it) {
        std::vector<Bytes> pairs;
        for (const auto& [type, value] : it->pairs) {
            const std::string oid = oid_for_attribute_name(type);
            Bytes value_der;
            if (oid == "0.9.2342.19200300.100.1.25" || oid == "1.2.840.113549.1.9.1") {
                value_der = der::make_ia5_string(value);
            } else if (is_printable_string(value)) {
                value_der = der::make_printable_string(value);
            } else {
                value_der = der::make_utf8_string(value);
            }
            pairs.push_back(der::make_sequence({der::make_oid(oid), value_der}));
        }
        rdns.push_back(der::make_set(pairs));
    }
    return der::make_sequence(rdns);
}

CertificateInfo parse_certificate(ByteView der_bytes) {
    constexpr Errc errc = Errc::malformed_certificate;
    try {
        der::TlvNode top = der::read_tlv(der_bytes, 0);
        if (!top.is_universal(der::tag::sequence) || top.total_length != der_bytes.size()) {
            fail(errc, "outer structure is not a single SEQUENCE");
        }
        der::Reader outer(top.content);
        der::TlvNode tbs = expect(outer, der::tag::sequence, true, "tbsCertificate", errc);
        expect(outer, der::tag::sequence, true, "signatureAlgorithm", errc);
        expect(outer, der::tag::bit_string, false, "signatureValue", errc);
        if (!outer.empty()) fail(errc, "trailing data after signature");

        CertificateInfo info;
        der::Reader r(tbs.content);
        if (!r.empty() && r.peek().is_context(0) && r.peek().constructed) {
            der::TlvNode version = r.next();
            der::Reader inner(version.content);
            expect(inner, der::tag::integer, false, "version", errc);
        }
        der::TlvNode serial = expect(r, der::tag::integer, false, "serialNumber", errc);
        try {
            info.serial = decimal_from_der_integer(serial.content);
        } catch (const std::invalid_argument& e) {
            fail(errc, std::string("serialNumber: ") + e.what());
        }
        expect(r, der::tag::sequence, true, "signature algorithm", errc);
        der::TlvNode issuer = expect(r, der::tag::sequence, true, "issuer", errc);
        der::TlvNode validity = expect(r, der::tag::sequence, true, "validity", errc);
        der::TlvNode subject = expect(r, der::tag::sequence, true, "subject", errc);
        expect(r, der::tag::sequence, true, "subjectPublicKeyInfo", errc);

        try {
            info.issuer = parse_name(issuer);
            info.subject = parse_name(subject);
        } catch (const std::invalid_argument& e) {
            fail(errc, e.what());
        }

        der::Reader times(validity.content);
        if (times.empty()) fail(errc, "empty validity");
        der::TlvNode nb = times.next();
        if (times.empty()) fail(errc, "missing notAfter");
        der::TlvNode na = times.next();
        if (!is_time_node(nb) || !is_time_node(na)) fail(errc, "validity is not a time pair");
        info.not_before = der::parse_time(nb);
        info.not_after = der::parse_time(na);
        if (info.not_after.instant < info.not_before.instant) {
            fail(errc, "notAfter precedes notBefore");
        }

        while (!r.empty() && (r.peek().is_context(1) || r.peek().is_context(2))) {
            r.next();  // issuerUniqueID / subjectUniqueID, not used here
        }
        if (!r.empty() && r.peek().is_context(3)) {
            der::TlvNode wrapper = r.next();
            der::Reader inner(wrapper.content);
            der::TlvNode list = expect(inner, der::tag::sequence, true, "extensions", errc);
            for (const Extension& ext : parse_extension_list(list, errc)) {
                if (ext.oid == kOidKeyUsage) {
                    info.key_usage = parse_key_usage_bits(ext.value, errc);
                } else if (ext.oid == kOidBasicConstraints) {
                    der::TlvNode bc = der::read_tlv(ext.value, 0);
                    if (!bc.is_universal(der::tag::sequence)) fail(errc, "bad basicConstraints");
                    der::Reader fields(bc.content);
                    if (!fields.empty() && fields.peek().is_universal(der::tag::boolean)) {
                        der::TlvNode ca = fields.next();
                        info.is_ca = !ca.content.empty() && ca.content[0] != 0;
                    }
                } else if (ext.oid == kOidCrlDistributionPoints) {
                    info.crl_dp_urls = parse_crl_dp_urls(ext.value, errc);
                } else if (ext.critical) {
                    // This tool publishes, it does not validate paths.
                    info.warnings.push_back("unknown critical extension " + ext.oid);
                }
            }
        }
        if (!r.empty()) fail(errc, "trailing data in tbsCertificate");

        info.raw_der.assign(der_bytes.begin(), der_bytes.end());
        info.hash_sha1 = cert_hash(der_bytes, HashAlg::sha1).digest;
        info.hash_sha256 = cert_hash(der_bytes, HashAlg::sha256).digest;
        return info;
    } catch (const der::Error& e) {
        fail(errc, e.what());
    }
}

CrlInfo parse_crl(ByteView der_bytes) {
    constexpr Errc errc = Errc::malformed_crl;
    try {
        der::TlvNode top = der::read_tlv(der_bytes, 0);
        if (!top.is_universal(der::tag::sequence) || top.total_length != der_bytes.size()) {
            fail(errc, "outer structure is not a single SEQUENCE");
        }
        der::Reader outer(top.content);
        der::TlvNode tbs = expect(outer, der::tag::sequence, true, "tbsCertList", errc);
        expect(outer, der::tag::sequence, true, "signatureAlgorithm", errc);
        expect(outer, der::tag::bit_string, false, "signatureValue", errc);
        if (!outer.empty()) fail(errc, "trailing data after signature");

        CrlInfo info;
        der::Reader r(tbs.content);
        if (!r.empty() && r.peek().is_universal(der::tag::integer)) {
            r.next();  // version
        }
        expect(r, der::tag::sequence, true, "signature algorithm", errc);
        der::TlvNode issuer = expect(r, der::tag::sequence, true, "issuer", errc);
        try {
            info.issuer = parse_name(issuer);
        } catch (const std::invalid_argument& e) {
            fail(errc, e.what());
        }
        if (r.empty() || !is_time_node(r.peek())) fail(errc, "missing thisUpdate");
        info.this_update = der::parse_time(r.next());
        if (!r.empty() && is_time_node(r.peek())) {
            info.next_update = der::parse_time(r.next());
        }
        if (!r.empty() && r.peek().is_universal(der::tag::sequence)) {
            der::TlvNode revoked_list = r.next();
            der::Reader entries(revoked_list.content);
            // certificateIssuer is sticky: it names the issuer for this and
            // all following entries until replaced (RFC 3280, 5.3.4).
            std::optional<DistinguishedName> current_issuer;
            while (!entries.empty()) {
                der::TlvNode entry = entries.next();
                if (!entry.is_universal(der::tag::sequence)) {
                    fail(errc, "revoked entry is not a SEQUENCE");
                }
                der::Reader fields(entry.content);
                der::TlvNode serial =
                    expect(fields, der::tag::integer, false, "revoked serialNumber", errc);
                RevokedEntry rev;
                try {
                    rev.serial = decimal_from_der_integer(serial.content);
                } catch (const std::invalid_argument& e) {
                    fail(errc, std::string("revoked serialNumber: ") + e.what());
                }
                if (fields.empty() || !is_time_node(fields.peek())) {
                    fail(errc, "missing revocationDate");
                }
                rev.revocation_date = der::parse_time(fields.next());
                if (!fields.empty() && fields.peek().is_universal(der::tag::sequence)) {
                    der::TlvNode ext_list = fields.next();
                    for (const Extension& ext : parse_extension_list(ext_list, errc)) {
                        if (ext.oid == kOidCertificateIssuer) {
                            current_issuer =
                                parse_directory_name_from_general_names(ext.value, errc);
                        }
                    }
                }
                rev.certificate_issuer = current_issuer;
                info.revoked.push_back(std::move(rev));
            }
        }
        if (!r.empty() && r.peek().is_context(0)) {
            der::TlvNode wrapper = r.next();
            der::Reader inner(wrapper.content);
            der::TlvNode list = expect(inner, der::tag::sequence, true, "crlExtensions", errc);
            for (const Extension& ext : parse_extension_list(list, errc)) {
                if (ext.oid == kOidCrlNumber) {
                    der::TlvNode n = der::read_tlv(ext.value, 0);
                    if (!n.is_universal(der::tag::integer)) fail(errc, "bad cRLNumber");
                    info.crl_number = small_uint_from_integer(n, errc);
                } else if (ext.oid == kOidDeltaCrlIndicator) {
                    der::TlvNode n = der::read_tlv(ext.value, 0);
                    if (!n.is_universal(der::tag::integer)) fail(errc, "bad deltaCRLIndicator");
                    info.delta_base_number = small_uint_from_integer(n, errc);
                } else if (ext.oid == kOidIssuingDistributionPoint) {
                    der::TlvNode idp = der::read_tlv(ext.value, 0);
                    if (!idp.is_universal(der::tag::sequence)) {
                        fail(errc, "bad issuingDistributionPoint");
                    }
                    der::Reader fields(idp.content);
                    while (!fields.empty()) {
                        der::TlvNode field = fields.next();
                        if (field.is_context(4) && !field.constructed) {
                            info.is_indirect =
                                !field.content.empty() && field.content[0] != 0;
                        }
                    }
                } else if (ext.critical) {
                    info.warnings.push_back("unknown critical extension " + ext.oid);
                }
            }
        }
        if (!r.empty()) fail(errc, "trailing data in tbsCertList");

        if (info.delta_base_number) {
            if (!info.crl_number) fail(errc, "delta CRL without cRLNumber");
            if (*info.delta_base_number >= *info.crl_number) {
                fail(errc, "BaseCRLNumber not below cRLNumber");
            }
        }
        info.raw_der.assign(der_bytes.begin(), der_bytes.end());
        return info;
    } catch (const der::Error& e) {
        fail(errc, e.what());
    }
}

HashValue cert_hash(ByteView der_bytes, HashAlg algorithm) {
    HashValue out;
    out.algorithm = algorithm;
    out.digest = digest(der_bytes, algorithm == HashAlg::sha1 ? EVP_sha1() : EVP_sha256());
    return out;
}

bool is_crl_signer(const CertificateInfo& info) {
    return info.key_usage.contains(KeyUsage::crl_sign);
}

CrlClass classify_crl(const CrlInfo& info) {
    const bool delta = info.delta_base_number.has_value();
    if (info.is_indirect) {
        return delta ? CrlClass::indirect_delta : CrlClass::indirect;
    }
    return delta ? CrlClass::delta : CrlClass::complete_direct;
}

std::string crl_class_name(CrlClass c) {
    switch (c) {
        case CrlClass::complete_direct: return "complete_direct";
        case CrlClass::delta: return "delta";
        case CrlClass::indirect: return "indirect";
        case CrlClass::indirect_delta: return "indirect_delta";
    }
    return "?";
}

}  // namespace dirplan::x509
