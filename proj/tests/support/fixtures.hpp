#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dirplan/bytes.hpp"
#include "dirplan/der.hpp"
#include "dirplan/x509.hpp"

// Structurally valid X.509 certificate and CRL fixtures with dummy all-zero
// signatures, assembled from the DER writer. Deterministic: the same spec
// always yields the same bytes.
namespace fixtures {

using dirplan::Bytes;

struct CertSpec {
    std::string subject_dn = "CN=Alice,O=Org,C=DE";
    std::string issuer_dn = "CN=MyCA,O=OrgCA,C=DE";
    std::uint64_t serial = 42;
    std::optional<Bytes> serial_magnitude;  // overrides serial when set
    std::string not_before = "2004-03-15T12:00:00Z";
    std::string not_after = "2005-03-15T12:00:00Z";
    std::uint16_t key_usage_bits = 0;  // x509::KeyUsage mask; 0 = no extension
    std::optional<bool> ca;            // basicConstraints when set
    std::vector<std::string> crl_dp_urls;
    bool add_unknown_critical_extension = false;
};

struct CrlEntrySpec {
    std::uint64_t serial = 0;
    std::string revocation_date = "2005-05-01T00:00:00Z";
    std::optional<std::string> certificate_issuer_dn;
};

struct CrlSpec {
    std::string issuer_dn = "CN=MyCA,O=OrgCA,C=DE";
    std::string this_update = "2005-06-01T00:00:00Z";
    std::optional<std::string> next_update = "2005-07-01T00:00:00Z";
    std::vector<CrlEntrySpec> revoked;
    std::optional<std::uint64_t> crl_number;
    std::optional<std::uint64_t> base_crl_number;
    bool indirect = false;
    bool add_unknown_critical_extension = false;
};

dirplan::der::Asn1Time time_from_iso(const std::string& iso);

Bytes make_certificate(const CertSpec& spec);
Bytes make_crl(const CrlSpec& spec);

// The canonical fixture set used for golden-file comparison.
Bytes user_cert();
Bytes ca_cert();
Bytes direct_crl();
Bytes delta_crl();
Bytes indirect_crl();

}  // namespace fixtures
