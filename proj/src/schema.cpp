#include "dirplan/schema.hpp"

#include <algorithm>
#include <cctype>

namespace dirplan::core {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

}  // namespace

std::string attribute_key(const std::string& name) {
    std::string s = name;
    const std::size_t semi = s.find(';');
    if (semi != std::string::npos) s.resize(semi);
    return lower(s);
}

SchemaRegistry::SchemaRegistry() {
    auto add = [this](std::string name, ClassKind kind, std::set<std::string> must,
                      std::set<std::string> may, std::string superior = "") {
        classes_.push_back(ObjectClassDef{std::move(name), kind, std::move(must),
                                          std::move(may), std::move(superior)});
    };

    add("person", ClassKind::structural, {"cn", "sn"},
        {"userpassword", "telephonenumber", "seealso", "description"});
    add("inetOrgPerson", ClassKind::structural, {},
        {"mail", "displayname", "usercertificate"}, "person");
    add("pkiUser", ClassKind::auxiliary, {}, {"usercertificate"});
    add("pkiCA", ClassKind::auxiliary, {},
        {"cacertificate", "certificaterevocationlist", "authorityrevocationlist",
         "crosscertificatepair"});
    add("certificationAuthority", ClassKind::auxiliary,
        {"cacertificate", "certificaterevocationlist", "authorityrevocationlist"},
        {"crosscertificatepair"});
    add("strongAuthenticationUser", ClassKind::auxiliary, {"usercertificate"}, {});
    add("cRLDistributionPoint", ClassKind::structural, {"cn"},
        {"certificaterevocationlist", "authorityrevocationlist", "deltarevocationlist"});
    add("deltaCRL", ClassKind::auxiliary, {}, {"deltarevocationlist"});
    add("dcObject", ClassKind::auxiliary, {"dc"}, {});
    add("organization", ClassKind::structural, {"o"},
        {"description", "telephonenumber", "seealso"});
    add("country", ClassKind::structural, {"c"}, {"description"});
    add("x509certificate", ClassKind::structural,
        {attribute_key(subentry_attr::serial), attribute_key(subentry_attr::issuer_dn),
         "usercertificate"},
        {attribute_key(subentry_attr::subject_dn), attribute_key(subentry_attr::not_before),
         attribute_key(subentry_attr::not_after), attribute_key(subentry_attr::key_usage)});

    attribute_names_ = {
        "objectClass", "cn", "sn", "o", "c", "dc", "mail", "displayName",
        "description", "telephoneNumber", "seeAlso", "userPassword",
        "userCertificate", "cACertificate", "certificateRevocationList",
        "authorityRevocationList", "deltaRevocationList", "crossCertificatePair",
        subentry_attr::serial, subentry_attr::issuer_dn, subentry_attr::subject_dn,
        subentry_attr::not_before, subentry_attr::not_after, subentry_attr::key_usage,
    };

    binary_attributes_ = {
        "usercertificate", "cacertificate", "certificaterevocationlist",
        "authorityrevocationlist", "deltarevocationlist", "crosscertificatepair",
    };
}

const ObjectClassDef* SchemaRegistry::find(const std::string& name) const {
    const std::string key = lower(name);
    for (const ObjectClassDef& def : classes_) {
        if (lower(def.name) == key) return &def;
    }
    return nullptr;
}

std::set<std::string> SchemaRegistry::effective_must(const ObjectClassDef& def) const {
    std::set<std::string> out = def.must;
    const ObjectClassDef* cur = &def;
    while (!cur->superior.empty()) {
        cur = find(cur->superior);
        if (!cur) break;
        out.insert(cur->must.begin(), cur->must.end());
    }
    return out;
}

std::set<std::string> SchemaRegistry::effective_may(const ObjectClassDef& def) const {
    std::set<std::string> out = def.may;
    const ObjectClassDef* cur = &def;
    while (!cur->superior.empty()) {
        cur = find(cur->superior);
        if (!cur) break;
        out.insert(cur->may.begin(), cur->may.end());
    }
    return out;
}

bool SchemaRegistry::same_structural_chain(const ObjectClassDef& a,
                                           const ObjectClassDef& b) const {
    auto derives_from = [this](const ObjectClassDef& from, const ObjectClassDef& to) {
        const ObjectClassDef* cur = &from;
        while (cur) {
            if (lower(cur->name) == lower(to.name)) return true;
            cur = cur->superior.empty() ? nullptr : find(cur->superior);
        }
        return false;
    };
    return derives_from(a, b) || derives_from(b, a);
}

std::optional<std::string> SchemaRegistry::canonical_attribute(const std::string& name) const {
    const std::string key = attribute_key(name);
    for (const std::string& canonical : attribute_names_) {
        if (lower(canonical) == key) return canonical;
    }
    return std::nullopt;
}

bool SchemaRegistry::is_binary_attribute(const std::string& name) const {
    return binary_attributes_.count(attribute_key(name)) > 0;
}

const SchemaRegistry& schema() {
    static const SchemaRegistry registry;
    return registry;
}

}  // namespace dirplan::core
