#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dirplan {

enum class DnErrc {
    empty_rdn,
    unterminated_escape,
    missing_separator,
    duplicate_type,
};

class DnError : public std::runtime_error {
public:
    DnError(DnErrc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    DnErrc code() const { return code_; }

private:
    DnErrc code_;
};

// One relative distinguished name, possibly multi-valued:
// "attribute1=value1+attribute2=value2". Types within one RDN are distinct.
struct Rdn {
    std::vector<std::pair<std::string, std::string>> pairs;

    bool operator==(const Rdn& other) const = default;
};

// Leaf-first: rdns[0] is the entry's own RDN, rdns.back() the root-most.
struct DistinguishedName {
    std::vector<Rdn> rdns;

    bool empty() const { return rdns.empty(); }
    std::size_t depth() const { return rdns.size(); }

    DistinguishedName parent() const;

    // DN of `leaf` placed beneath this DN.
    DistinguishedName child(Rdn leaf) const;

    // Suffix test on normalized RDNs; every DN is within itself.
    bool within(const DistinguishedName& subtree) const;

    bool operator==(const DistinguishedName& other) const = default;
};

// Splits on unescaped commas into RDNs and unescaped '+' into pairs.
// Backslash escapes the next character (used for , + = \ " and spaces).
DistinguishedName parse_dn(const std::string& text);

// Canonical form: no spaces after commas, specials escaped.
// parse_dn(format_dn(d)) normalizes equal to d.
std::string format_dn(const DistinguishedName& dn);

// Attribute types lowercased, values trimmed and case-folded, multi-valued
// RDN pairs sorted by type. The result is a comparison key, not a display
// form.
DistinguishedName normalize_dn(const DistinguishedName& dn);

// format_dn(normalize_dn(dn)) — the canonical map key for DN equality.
std::string dn_key(const DistinguishedName& dn);

// Root-first ordering key: a parent's key is a strict prefix of every
// descendant's key, so sorting puts parents before children.
std::string dn_sort_key(const DistinguishedName& dn);

bool same_dn(const DistinguishedName& a, const DistinguishedName& b);

// Concatenation: result = head RDNs, then suffix RDNs.
DistinguishedName dn_concat(const DistinguishedName& head,
                            const DistinguishedName& suffix);

}  // namespace dirplan
