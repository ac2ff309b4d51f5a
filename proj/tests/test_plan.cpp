#include <doctest.h>

#include <random>
#include <set>

#include "dirplan/directory.hpp"
#include "dirplan/plan.hpp"
#include "dirplan/x509.hpp"
#include "fixtures.hpp"

using namespace dirplan;
using core::Entry;
using plan::UserPlanMode;

namespace {

std::set<std::string> class_set(const Entry& entry) {
    std::set<std::string> out;
    for (const std::string& c : entry.object_classes()) out.insert(c);
    return out;
}

plan::Errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const plan::Error& e) {
        return e.code();
    }
    throw std::logic_error("expected plan::Error");
}

const char* kDpUrl =
    "ldap://192.168.0.1:389/CN=MyCA,O=OrgCA,C=DE,DC=MyOrg,DC=DE"
    "?certificateRevocationList?base?objectClass=cRLDistributionPoint";

}  // namespace

TEST_CASE("plan_root builds the dc-rooted chain, deepest label outermost") {
    const std::vector<Entry> entries = plan::plan_root("MyOrg.DE", "My Organization");
    REQUIRE(entries.size() == 2);
    CHECK(format_dn(entries[0].dn()) == "DC=DE");
    CHECK(format_dn(entries[1].dn()) == "DC=MyOrg,DC=DE");
    CHECK(entries[1].has_value("o", "My Organization"));
    CHECK(entries[1].has_value("dc", "MyOrg"));

    core::Directory dir;
    for (const Entry& e : entries) CHECK(dir.check_schema(e).empty());
}

TEST_CASE("plan_root chains every label onto its parent") {
    const std::vector<Entry> entries = plan::plan_root("a.b.c", "");
    REQUIRE(entries.size() == 3);
    // brute-force parent check: each entry's parent is the previous one
    for (std::size_t i = 1; i < entries.size(); ++i) {
        CHECK(same_dn(entries[i].dn().parent(), entries[i - 1].dn()));
    }
    CHECK(format_dn(entries[2].dn()) == "DC=a,DC=b,DC=c");
}

TEST_CASE("plan_root rejects empty domains and labels") {
    CHECK(code_of([] { plan::plan_root("", "x"); }) == plan::Errc::empty_domain);
    CHECK(code_of([] { plan::plan_root("a..b", "x"); }) == plan::Errc::empty_domain);
}

TEST_CASE("plan_user_entry picks the object classes by mode") {
    const DistinguishedName parent = parse_dn("O=Org,C=DE");
    const Entry lean = plan::plan_user_entry("Alice", "Alice", parent,
                                             UserPlanMode::pki_only);
    CHECK(format_dn(lean.dn()) == "CN=Alice,O=Org,C=DE");
    CHECK(class_set(lean) == std::set<std::string>{"person", "pkiUser"});
    CHECK_FALSE(lean.has_attribute("userCertificate"));

    const Entry rich = plan::plan_user_entry("Alice", "Alice", parent,
                                             UserPlanMode::org_directory);
    CHECK(class_set(rich) == std::set<std::string>{"inetOrgPerson", "pkiUser"});

    CHECK(code_of([&] { plan::plan_user_entry("", "x", parent, UserPlanMode::pki_only); }) ==
          plan::Errc::missing_name);
}

TEST_CASE("plan_ca_entry emits the pkiCA hybrid, never certificationAuthority") {
    const DistinguishedName parent = parse_dn("O=OrgCA,C=DE");
    const x509::CertificateInfo ca = x509::parse_certificate(fixtures::ca_cert());

    const Entry with_cert = plan::plan_ca_entry("MyCA", parent, ca);
    CHECK(class_set(with_cert) ==
          std::set<std::string>{"cRLDistributionPoint", "pkiCA"});
    CHECK(with_cert.has_attribute("cACertificate"));

    const Entry bare = plan::plan_ca_entry("MyCA", parent, std::nullopt);
    CHECK_FALSE(bare.has_attribute("cACertificate"));
    CHECK_FALSE(bare.has_attribute("authorityRevocationList"));

    std::mt19937 rng(17);
    for (int i = 0; i < 1000; ++i) {
        const std::string cn = "CA" + std::to_string(rng() % 1000);
        const Entry e = plan::plan_ca_entry(cn, parent,
                                            (rng() % 2) ? std::optional(ca) : std::nullopt);
        for (const std::string& oc : e.object_classes()) {
            CHECK(oc != "certificationAuthority");
        }
    }
}

TEST_CASE("plan_crl_point_entry stays lean for indirect issuers") {
    const DistinguishedName parent = parse_dn("O=Root,C=DE");
    const Entry hybrid = plan::plan_crl_point_entry("MyCA", parent, true);
    CHECK(class_set(hybrid) == std::set<std::string>{"cRLDistributionPoint", "pkiCA"});

    const Entry indirect = plan::plan_crl_point_entry("RootCRLIssuer", parent, false);
    CHECK(class_set(indirect) == std::set<std::string>{"cRLDistributionPoint"});
    CHECK(indirect.has_value("cn", "RootCRLIssuer"));

    CHECK(code_of([&] { plan::plan_crl_point_entry("", parent, false); }) ==
          plan::Errc::missing_name);
}

TEST_CASE("plan_cert_subentry keys the DN on issuer and serial") {
    const DistinguishedName owner = parse_dn("CN=Alice,O=Org,C=DE");
    const x509::CertificateInfo cert = x509::parse_certificate(fixtures::user_cert());

    const Entry sub = plan::plan_cert_subentry(owner, cert);
    REQUIRE(sub.dn().depth() == 4);
    REQUIRE(sub.dn().rdns[0].pairs.size() == 2);
    CHECK(sub.dn().rdns[0].pairs[0].first == "x509issuerDN");
    CHECK(sub.dn().rdns[0].pairs[1] == std::pair<std::string, std::string>{
                                           "x509serialNumber", "42"});
    CHECK(sub.has_value("x509serialNumber", "42"));
    CHECK(sub.has_value("x509issuerDN", "CN=MyCA,O=OrgCA,C=DE"));
    CHECK(sub.has_value("x509keyUsage", "digitalSignature"));
    CHECK(sub.has_attribute("userCertificate"));

    core::Directory dir;
    CHECK(dir.check_schema(sub).empty());

    // distinct serial, same issuer: sibling with a distinct DN
    fixtures::CertSpec other;
    other.serial = 43;
    const Entry sibling = plan::plan_cert_subentry(
        owner, x509::parse_certificate(fixtures::make_certificate(other)));
    CHECK_FALSE(same_dn(sub.dn(), sibling.dn()));
    CHECK(same_dn(sub.dn().parent(), sibling.dn().parent()));

    // planning twice is stable
    CHECK(same_dn(sub.dn(), plan::plan_cert_subentry(owner, cert).dn()));
}

TEST_CASE("subentry DNs are unique exactly when issuer+serial pairs are") {
    const DistinguishedName owner = parse_dn("CN=Alice,O=Org,C=DE");
    std::mt19937 rng(23);
    std::set<std::string> pair_keys;
    std::set<std::string> dn_keys;
    for (int i = 0; i < 200; ++i) {
        fixtures::CertSpec spec;
        spec.serial = rng() % 40;
        spec.issuer_dn = (rng() % 2) ? "CN=MyCA,O=OrgCA,C=DE" : "CN=OtherCA,C=DE";
        const x509::CertificateInfo cert =
            x509::parse_certificate(fixtures::make_certificate(spec));
        pair_keys.insert(dn_key(cert.issuer) + "|" + cert.serial);
        dn_keys.insert(dn_key(plan::plan_cert_subentry(owner, cert).dn()));
    }
    CHECK(pair_keys.size() == dn_keys.size());
}

TEST_CASE("planner outputs always pass check_schema") {
    core::Directory dir;
    std::mt19937 rng(29);
    const DistinguishedName parent = parse_dn("O=Org,C=DE");
    for (int i = 0; i < 300; ++i) {
        const std::string name = "N" + std::to_string(rng());
        const Entry user = plan::plan_user_entry(
            name, name, parent,
            (rng() % 2) ? UserPlanMode::pki_only : UserPlanMode::org_directory);
        CHECK(dir.check_schema(user).empty());
        CHECK_FALSE(user.has_value("objectClass", "strongAuthenticationUser"));

        const Entry dp = plan::plan_crl_point_entry(name, parent, rng() % 2 == 0);
        CHECK(dir.check_schema(dp).empty());
    }
}

TEST_CASE("make_crl_dp_url emits the documented URL format byte for byte") {
    const std::string url = plan::make_crl_dp_url(
        "192.168.0.1", 389, parse_dn("CN=MyCA,O=OrgCA,C=DE,DC=MyOrg,DC=DE"));
    CHECK(url == kDpUrl);
}

TEST_CASE("parse_ldap_url recovers the URL components") {
    const plan::LdapUrl url = plan::parse_ldap_url(kDpUrl);
    CHECK(url.host == "192.168.0.1");
    CHECK(url.port == 389);
    CHECK(format_dn(url.dn) == "CN=MyCA,O=OrgCA,C=DE,DC=MyOrg,DC=DE");
    REQUIRE(url.attributes.size() == 1);
    CHECK(url.attributes[0] == "certificateRevocationList");
    CHECK(url.scope == core::SearchScope::base);
    CHECK(url.filter == "objectClass=cRLDistributionPoint");
}

TEST_CASE("parse_ldap_url applies RFC 2255 defaults") {
    const plan::LdapUrl url = plan::parse_ldap_url("ldap://h/DC=DE");
    CHECK(url.host == "h");
    CHECK(url.port == 389);
    CHECK(url.attributes.empty());
    CHECK(url.scope == core::SearchScope::base);
    CHECK(url.filter == "(objectClass=*)");
}

TEST_CASE("parse_ldap_url error cases") {
    CHECK(code_of([] { plan::parse_ldap_url("http://h/DC=DE"); }) ==
          plan::Errc::bad_scheme);
    CHECK(code_of([] { plan::parse_ldap_url("ldap://h:notaport/DC=DE"); }) ==
          plan::Errc::bad_scheme);
    CHECK(code_of([] { plan::parse_ldap_url("ldap://h/DC=DE?crl?upside-down"); }) ==
          plan::Errc::bad_scope);
    CHECK(code_of([] { plan::parse_ldap_url("ldap://h/=broken"); }) == plan::Errc::bad_dn);
    CHECK(code_of([] { plan::parse_ldap_url("ldap://h"); }) == plan::Errc::bad_dn);
}

TEST_CASE("DNs with spaces percent-encode and round-trip") {
    const DistinguishedName dn = parse_dn("CN=My CA,O=Org CA,C=DE");
    const std::string url = plan::make_crl_dp_url("h", 389, dn);
    // space encodes as %20 (cross-checked with python urllib.parse.quote)
    CHECK(url.find("CN=My%20CA") != std::string::npos);
    const plan::LdapUrl parsed = plan::parse_ldap_url(url);
    CHECK(same_dn(parsed.dn, dn));
}

TEST_CASE("make then parse is the identity on components") {
    std::mt19937 rng(31);
    const char* hosts[] = {"ldap.example.de", "192.168.0.1", "h"};
    for (int i = 0; i < 200; ++i) {
        DistinguishedName dn;
        const int depth = 1 + static_cast<int>(rng() % 4);
        for (int level = 0; level < depth; ++level) {
            Rdn rdn;
            std::string value = "v" + std::to_string(rng() % 100);
            if (rng() % 3 == 0) value += " spaced";
            if (rng() % 5 == 0) value += ",comma";
            rdn.pairs.emplace_back("CN", value);
            dn.rdns.push_back(std::move(rdn));
        }
        const int port = 1 + static_cast<int>(rng() % 65535);
        const std::string host = hosts[rng() % 3];
        const plan::LdapUrl parsed =
            plan::parse_ldap_url(plan::make_crl_dp_url(host, port, dn));
        CHECK(parsed.host == host);
        CHECK(parsed.port == port);
        CHECK(same_dn(parsed.dn, dn));
    }
}
