#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dirplan/directory.hpp"
#include "dirplan/dn.hpp"
#include "dirplan/x509.hpp"

// Executable publication planning: object-class choices for users, CAs and
// CRL distribution points, the dc-rooted naming plan, certificate
// subentries with searchable metadata, and LDAP URLs for the
// cRLDistributionPoints extension.
namespace dirplan::plan {

enum class Errc { empty_domain, missing_name, bad_scheme, bad_dn, bad_scope };

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

// pki_only keeps the directory lean ({person, pkiUser}); org_directory uses
// inetOrgPerson so the same entry can carry organisational data.
enum class UserPlanMode { pki_only, org_directory };

std::optional<UserPlanMode> user_plan_mode_from_name(const std::string& name);
std::string user_plan_mode_name(UserPlanMode mode);

struct LdapUrl {
    std::string host;
    int port = 389;
    DistinguishedName dn;
    std::vector<std::string> attributes;
    core::SearchScope scope = core::SearchScope::base;
    std::string filter = "(objectClass=*)";

    std::string to_string() const;
};

// dc-rooted tree for a dotted domain, deepest label outermost:
// "MyOrg.DE" yields DC=DE, then DC=MyOrg,DC=DE beneath it. Entries are
// returned parents first.
std::vector<core::Entry> plan_root(const std::string& domain,
                                   const std::string& organization);

// User entry without any certificate attribute; publication is the
// lifecycle engine's job. Never emits strongAuthenticationUser.
core::Entry plan_user_entry(const std::string& cn, const std::string& sn,
                            const DistinguishedName& parent_dn, UserPlanMode mode);

// CA entry as the hybrid of pkiCA with a cRLDistributionPoint structural
// host. Never emits certificationAuthority.
core::Entry plan_ca_entry(const std::string& cn, const DistinguishedName& parent_dn,
                          const std::optional<x509::CertificateInfo>& ca_cert);

// Pure CRL distribution point; colocate_ca adds pkiCA. Indirect issuers
// must pass colocate_ca = false (they are not CAs).
core::Entry plan_crl_point_entry(const std::string& cn,
                                 const DistinguishedName& parent_dn, bool colocate_ca);

// Certificate subentry beneath the owner entry. The multi-valued RDN
// issuer+serial makes the DN unique per certificate.
core::Entry plan_cert_subentry(const DistinguishedName& owner_dn,
                               const x509::CertificateInfo& info);

// Scaffolding entry for one path level, derived from the leaf RDN type
// (c, o or dc); nullopt when no structural class fits.
std::optional<core::Entry> plan_path_entry(const DistinguishedName& dn);

// ldap://host:port/<dn>?certificateRevocationList?base?objectClass=cRLDistributionPoint
std::string make_crl_dp_url(const std::string& host, int port,
                            const DistinguishedName& dp_dn);

// RFC 2255 subset. Missing port defaults to 389, missing scope to base,
// missing filter to (objectClass=*).
LdapUrl parse_ldap_url(const std::string& text);

}  // namespace dirplan::plan
