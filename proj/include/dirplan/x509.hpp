#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dirplan/bytes.hpp"
#include "dirplan/der.hpp"
#include "dirplan/dn.hpp"

// Certificate and CRL metadata extraction: the fields the directory plan
// needs, not path validation. Signatures are parsed, never verified here.
namespace dirplan::x509 {

enum class Errc { malformed_certificate, malformed_crl };

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

enum class KeyUsage : std::uint16_t {
    digital_signature = 1u << 0,
    non_repudiation = 1u << 1,
    key_encipherment = 1u << 2,
    data_encipherment = 1u << 3,
    key_agreement = 1u << 4,
    key_cert_sign = 1u << 5,
    crl_sign = 1u << 6,
    encipher_only = 1u << 7,
    decipher_only = 1u << 8,
};

struct KeyUsageSet {
    std::uint16_t bits = 0;

    bool contains(KeyUsage flag) const {
        return (bits & static_cast<std::uint16_t>(flag)) != 0;
    }
    void insert(KeyUsage flag) { bits |= static_cast<std::uint16_t>(flag); }
    bool empty() const { return bits == 0; }
    std::vector<std::string> names() const;
    bool operator==(const KeyUsageSet&) const = default;
};

enum class HashAlg { sha1, sha256 };

struct HashValue {
    HashAlg algorithm = HashAlg::sha256;
    Bytes digest;

    bool operator==(const HashValue&) const = default;
};

struct CertificateInfo {
    std::string serial;  // canonical decimal, unbounded
    DistinguishedName issuer;
    DistinguishedName subject;
    der::Asn1Time not_before;
    der::Asn1Time not_after;
    KeyUsageSet key_usage;
    std::vector<std::string> crl_dp_urls;
    bool is_ca = false;
    Bytes raw_der;
    Bytes hash_sha1;
    Bytes hash_sha256;
    std::vector<std::string> warnings;  // unknown critical extensions etc.
};

struct RevokedEntry {
    std::string serial;  // decimal
    der::Asn1Time revocation_date;
    std::optional<DistinguishedName> certificate_issuer;  // indirect CRLs
};

struct CrlInfo {
    DistinguishedName issuer;
    der::Asn1Time this_update;
    std::optional<der::Asn1Time> next_update;
    std::optional<std::uint64_t> crl_number;
    std::optional<std::uint64_t> delta_base_number;  // BaseCRLNumber when delta
    bool is_indirect = false;
    std::vector<RevokedEntry> revoked;  // order preserved
    Bytes raw_der;
    std::vector<std::string> warnings;
};

enum class CrlClass { complete_direct, delta, indirect, indirect_delta };

CertificateInfo parse_certificate(ByteView der_bytes);
CrlInfo parse_crl(ByteView der_bytes);

// Digest of exactly the bytes given (the full DER encoding).
HashValue cert_hash(ByteView der_bytes, HashAlg algorithm);

// true iff cRLSign is asserted in keyUsage
bool is_crl_signer(const CertificateInfo& info);

CrlClass classify_crl(const CrlInfo& info);
std::string crl_class_name(CrlClass c);

// X.501 Name <-> DistinguishedName. DER names are root-first; the result is
// leaf-first. Unknown attribute OIDs render as dotted decimals.
DistinguishedName parse_name(const der::TlvNode& name_node);
Bytes encode_name(const DistinguishedName& dn);

// Canonical decimal rendering of a non-negative DER INTEGER content.
std::string decimal_from_der_integer(ByteView content);

}  // namespace dirplan::x509
