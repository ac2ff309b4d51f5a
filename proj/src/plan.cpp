#include "dirplan/plan.hpp"

#include <algorithm>
#include <cctype>

#include "dirplan/timeutil.hpp"

namespace dirplan::plan {

namespace {

[[noreturn]] void fail(Errc code, const std::string& what) {
    throw Error(code, what);
}

bool url_safe_char(char c) {
    if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
        return true;
    }
    static const std::string keep = ",=+-._:@&()'*!$;~";
    return keep.find(c) != std::string::npos;
}

std::string percent_encode(const std::string& s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (char c : s) {
        const auto byte = static_cast<unsigned char>(c);
        if (url_safe_char(c)) {
            out += c;
        } else {
            out += '%';
            out += hex[byte >> 4];
            out += hex[byte & 0x0f];
        }
    }
    return out;
}

std::string percent_decode(const std::string& s) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%') {
            if (i + 2 >= s.size()) fail(Errc::bad_dn, "truncated percent escape");
            const int hi = nibble(s[i + 1]);
            const int lo = nibble(s[i + 2]);
            if (hi < 0 || lo < 0) fail(Errc::bad_dn, "bad percent escape");
            out += static_cast<char>(hi << 4 | lo);
            i += 2;
        } else {
            out += s[i];
        }
    }
    return out;
}

}  // namespace

std::optional<UserPlanMode> user_plan_mode_from_name(const std::string& name) {
    if (name == "pki_only") return UserPlanMode::pki_only;
    if (name == "org_directory") return UserPlanMode::org_directory;
    return std::nullopt;
}

std::string user_plan_mode_name(UserPlanMode mode) {
    return mode == UserPlanMode::pki_only ? "pki_only" : "org_directory";
}

std::string LdapUrl::to_string() const {
    std::string out = "ldap://" + host + ":" + std::to_string(port) + "/";
    out += percent_encode(format_dn(dn));
    out += '?';
    for (std::size_t i = 0; i < attributes.size(); ++i) {
        if (i > 0) out += ',';
        out += attributes[i];
    }
    out += '?';
    out += core::scope_name(scope);
    out += '?';
    out += filter;
    return out;
}

std::vector<core::Entry> plan_root(const std::string& domain,
                                   const std::string& organization) {
    std::vector<std::string> labels;
    std::string current;
    for (char c : domain) {
        if (c == '.') {
            if (current.empty()) fail(Errc::empty_domain, "empty domain label");
            labels.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    if (!current.empty()) labels.push_back(current);
    if (labels.empty()) fail(Errc::empty_domain, "domain has no labels");

    // deepest (leftmost) label ends up outermost in the tree
    std::vector<core::Entry> out;
    DistinguishedName parent;
    for (auto it = labels.rbegin(); it != labels.rend(); ++it) {
        Rdn rdn;
        rdn.pairs.emplace_back("DC", *it);
        const DistinguishedName dn = parent.child(rdn);
        core::Entry entry(dn);
        entry.add_value("objectClass", "organization");
        entry.add_value("objectClass", "dcObject");
        entry.add_value("dc", *it);
        const bool deepest = std::next(it) == labels.rend();
        entry.add_value("o", deepest && !organization.empty() ? organization : *it);
        out.push_back(std::move(entry));
        parent = dn;
    }
    return out;
}

core::Entry plan_user_entry(const std::string& cn, const std::string& sn,
                            const DistinguishedName& parent_dn, UserPlanMode mode) {
    if (cn.empty() || sn.empty()) fail(Errc::missing_name, "user entry needs cn and sn");
    Rdn rdn;
    rdn.pairs.emplace_back("CN", cn);
    core::Entry entry(parent_dn.child(rdn));
    if (mode == UserPlanMode::pki_only) {
        entry.add_value("objectClass", "person");
    } else {
        entry.add_value("objectClass", "inetOrgPerson");
    }
    entry.add_value("objectClass", "pkiUser");
    entry.add_value("cn", cn);
    entry.add_value("sn", sn);
    return entry;
}

core::Entry plan_ca_entry(const std::string& cn, const DistinguishedName& parent_dn,
                          const std::optional<x509::CertificateInfo>& ca_cert) {
    if (cn.empty()) fail(Errc::missing_name, "CA entry needs cn");
    core::Entry entry = plan_crl_point_entry(cn, parent_dn, true);
    if (ca_cert) {
        entry.add_value("cACertificate", to_string(ca_cert->raw_der));
    }
    return entry;
}

core::Entry plan_crl_point_entry(const std::string& cn,
                                 const DistinguishedName& parent_dn, bool colocate_ca) {
    if (cn.empty()) fail(Errc::missing_name, "CRL distribution point needs cn");
    Rdn rdn;
    rdn.pairs.emplace_back("CN", cn);
    core::Entry entry(parent_dn.child(rdn));
    entry.add_value("objectClass", "cRLDistributionPoint");
    if (colocate_ca) entry.add_value("objectClass", "pkiCA");
    entry.add_value("cn", cn);
    return entry;
}

core::Entry plan_cert_subentry(const DistinguishedName& owner_dn,
                               const x509::CertificateInfo& info) {
    const std::string issuer_text = format_dn(info.issuer);
    Rdn rdn;
    rdn.pairs.emplace_back(core::subentry_attr::issuer_dn, issuer_text);
    rdn.pairs.emplace_back(core::subentry_attr::serial, info.serial);
    core::Entry entry(owner_dn.child(rdn));
    entry.add_value("objectClass", "x509certificate");
    entry.add_value(core::subentry_attr::serial, info.serial);
    entry.add_value(core::subentry_attr::issuer_dn, issuer_text);
    entry.add_value(core::subentry_attr::subject_dn, format_dn(info.subject));
    entry.add_value(core::subentry_attr::not_before, info.not_before.iso8601());
    entry.add_value(core::subentry_attr::not_after, info.not_after.iso8601());
    for (const std::string& flag : info.key_usage.names()) {
        entry.add_value(core::subentry_attr::key_usage, flag);
    }
    entry.add_value("userCertificate", to_string(info.raw_der));
    return entry;
}

std::optional<core::Entry> plan_path_entry(const DistinguishedName& dn) {
    if (dn.empty() || dn.rdns.front().pairs.size() != 1) return std::nullopt;
    const auto& [type, value] = dn.rdns.front().pairs.front();
    std::string key = type;
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    core::Entry entry(dn);
    if (key == "c") {
        entry.add_value("objectClass", "country");
        entry.add_value("c", value);
    } else if (key == "o") {
        entry.add_value("objectClass", "organization");
        entry.add_value("o", value);
    } else if (key == "dc") {
        entry.add_value("objectClass", "organization");
        entry.add_value("objectClass", "dcObject");
        entry.add_value("dc", value);
        entry.add_value("o", value);
    } else {
        return std::nullopt;
    }
    return entry;
}

std::string make_crl_dp_url(const std::string& host, int port,
                            const DistinguishedName& dp_dn) {
    LdapUrl url;
    url.host = host;
    url.port = port;
    url.dn = dp_dn;
    url.attributes = {"certificateRevocationList"};
    url.scope = core::SearchScope::base;
    url.filter = "objectClass=cRLDistributionPoint";
    return url.to_string();
}

LdapUrl parse_ldap_url(const std::string& text) {
    static const std::string scheme = "ldap://";
    if (text.compare(0, scheme.size(), scheme) != 0) {
        fail(Errc::bad_scheme, "URL scheme is not ldap");
    }
    LdapUrl url;
    std::string rest = text.substr(scheme.size());

    const std::size_t slash = rest.find('/');
    if (slash == std::string::npos) fail(Errc::bad_dn, "URL has no DN part");
    std::string authority = rest.substr(0, slash);
    rest = rest.substr(slash + 1);

    const std::size_t colon = authority.find(':');
    if (colon == std::string::npos) {
        url.host = authority;
    } else {
        url.host = authority.substr(0, colon);
        const std::string port_text = authority.substr(colon + 1);
        if (port_text.empty() ||
            port_text.find_first_not_of("0123456789") != std::string::npos) {
            fail(Errc::bad_scheme, "non-numeric port");
        }
        const long port = std::stol(port_text);
        if (port < 1 || port > 65535) fail(Errc::bad_scheme, "port out of range");
        url.port = static_cast<int>(port);
    }
    if (url.host.empty()) fail(Errc::bad_scheme, "empty host");

    // dn ? attributes ? scope ? filter
    std::vector<std::string> parts;
    std::string current;
    for (char c : rest) {
        if (c == '?' && parts.size() < 3) {
            parts.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    parts.push_back(current);

    try {
        url.dn = parse_dn(percent_decode(parts[0]));
    } catch (const DnError& e) {
        fail(Errc::bad_dn, std::string("bad DN in URL: ") + e.what());
    }
    if (parts.size() > 1 && !parts[1].empty()) {
        std::string attr;
        for (char c : parts[1]) {
            if (c == ',') {
                url.attributes.push_back(attr);
                attr.clear();
            } else {
                attr += c;
            }
        }
        url.attributes.push_back(attr);
    }
    if (parts.size() > 2 && !parts[2].empty()) {
        const std::optional<core::SearchScope> scope = core::scope_from_name(parts[2]);
        if (!scope) fail(Errc::bad_scope, "bad scope: " + parts[2]);
        url.scope = *scope;
    }
    if (parts.size() > 3 && !parts[3].empty()) {
        url.filter = parts[3];
    }
    return url;
}

}  // namespace dirplan::plan
