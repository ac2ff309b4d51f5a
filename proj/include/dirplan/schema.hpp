#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dirplan::core {

enum class ClassKind { structural, auxiliary };

struct ObjectClassDef {
    std::string name;
    ClassKind kind = ClassKind::structural;
    std::set<std::string> must;  // lowercase attribute keys
    std::set<std::string> may;
    std::string superior;  // structural parent, empty for none
};

// The seeded object-class registry: the PKI publication classes from
// RFC 2587/2256, the dc-naming classes from RFC 2247, and the certificate
// subentry class with its searchable metadata attributes.
class SchemaRegistry {
public:
    SchemaRegistry();

    const ObjectClassDef* find(const std::string& name) const;  // case-insensitive

    // Effective MUST/MAY including the structural superior chain.
    std::set<std::string> effective_must(const ObjectClassDef& def) const;
    std::set<std::string> effective_may(const ObjectClassDef& def) const;

    // true if both classes sit on one structural chain (one derives from
    // the other).
    bool same_structural_chain(const ObjectClassDef& a, const ObjectClassDef& b) const;

    // Canonical display spelling for a known attribute; nullopt if the
    // attribute is not in the registry.
    std::optional<std::string> canonical_attribute(const std::string& name) const;

    // Attributes holding raw DER values; matched byte-exact and rendered
    // base64 with a ";binary" option in LDIF.
    bool is_binary_attribute(const std::string& name) const;

    const std::vector<ObjectClassDef>& classes() const { return classes_; }

private:
    std::vector<ObjectClassDef> classes_;
    std::vector<std::string> attribute_names_;
    std::set<std::string> binary_attributes_;  // lowercase
};

const SchemaRegistry& schema();

// Lowercased attribute key with any ";binary" transfer option stripped.
std::string attribute_key(const std::string& name);

// The searchable certificate subentry attribute names live in one place so
// a future standard can remap them.
namespace subentry_attr {
inline constexpr const char* serial = "x509serialNumber";
inline constexpr const char* issuer_dn = "x509issuerDN";
inline constexpr const char* subject_dn = "x509subjectDN";
inline constexpr const char* not_before = "x509notBefore";
inline constexpr const char* not_after = "x509notAfter";
inline constexpr const char* key_usage = "x509keyUsage";
}  // namespace subentry_attr

}  // namespace dirplan::core
