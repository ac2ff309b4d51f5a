#include "dirplan/dn.hpp"

#include <algorithm>
#include <cctype>

namespace dirplan {

namespace {

[[noreturn]] void fail(DnErrc code, const std::string& what) {
    throw DnError(code, what);
}

std::string ascii_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && s[b] == ' ') ++b;
    while (e > b && s[e - 1] == ' ') --e;
    return s.substr(b, e - b);
}

bool needs_escape(char c) {
    return c == ',' || c == '+' || c == '=' || c == '\\' || c == '"';
}

std::string escape_value(const std::string& value) {
    std::string out;
    for (std::size_t i = 0; i < value.size(); ++i) {
        const char c = value[i];
        const bool edge_space = c == ' ' && (i == 0 || i + 1 == value.size());
        if (needs_escape(c) || edge_space) out += '\\';
        out += c;
    }
    return out;
}

// Splits on an unescaped separator; escapes survive into the pieces.
std::vector<std::string> split_unescaped(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string current;
    bool escaped = false;
    for (char c : text) {
        if (escaped) {
            current += '\\';
            current += c;
            escaped = false;
        } else if (c == '\\') {
            escaped = true;
        } else if (c == sep) {
            out.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    if (escaped) fail(DnErrc::unterminated_escape, "trailing backslash");
    out.push_back(current);
    return out;
}

// Resolves backslash escapes and trims unescaped edge whitespace.
std::string unescape_token(const std::string& raw) {
    std::string out;
    std::vector<bool> literal;  // true where the char came from an escape
    bool escaped = false;
    for (char c : raw) {
        if (escaped) {
            out += c;
            literal.push_back(true);
            escaped = false;
        } else if (c == '\\') {
            escaped = true;
        } else {
            out += c;
            literal.push_back(false);
        }
    }
    if (escaped) fail(DnErrc::unterminated_escape, "trailing backslash");

    std::size_t b = 0;
    std::size_t e = out.size();
    while (b < e && out[b] == ' ' && !literal[b]) ++b;
    while (e > b && out[e - 1] == ' ' && !literal[e - 1]) --e;
    return out.substr(b, e - b);
}

Rdn parse_rdn(const std::string& text) {
    Rdn rdn;
    for (const std::string& pair_text : split_unescaped(text, '+')) {
        // first unescaped '=' separates type from value
        std::size_t eq = std::string::npos;
        bool escaped = false;
        for (std::size_t i = 0; i < pair_text.size(); ++i) {
            if (escaped) {
                escaped = false;
            } else if (pair_text[i] == '\\') {
                escaped = true;
            } else if (pair_text[i] == '=') {
                eq = i;
                break;
            }
        }
        if (eq == std::string::npos) {
            fail(DnErrc::missing_separator, "RDN pair without '=': " + pair_text);
        }
        const std::string type = trim(unescape_token(pair_text.substr(0, eq)));
        const std::string value = unescape_token(pair_text.substr(eq + 1));
        if (type.empty() || value.empty()) {
            fail(DnErrc::empty_rdn, "empty attribute type or value in RDN");
        }
        const std::string type_key = ascii_lower(type);
        for (const auto& [t, v] : rdn.pairs) {
            if (ascii_lower(t) == type_key) {
                fail(DnErrc::duplicate_type, "duplicate type in RDN: " + type);
            }
        }
        rdn.pairs.emplace_back(type, value);
    }
    return rdn;
}

}  // namespace

DistinguishedName DistinguishedName::parent() const {
    DistinguishedName p;
    if (rdns.size() > 1) {
        p.rdns.assign(rdns.begin() + 1, rdns.end());
    }
    return p;
}

DistinguishedName DistinguishedName::child(Rdn leaf) const {
    DistinguishedName c;
    c.rdns.reserve(rdns.size() + 1);
    c.rdns.push_back(std::move(leaf));
    c.rdns.insert(c.rdns.end(), rdns.begin(), rdns.end());
    return c;
}

bool DistinguishedName::within(const DistinguishedName& subtree) const {
    if (subtree.rdns.size() > rdns.size()) return false;
    const DistinguishedName a = normalize_dn(*this);
    const DistinguishedName b = normalize_dn(subtree);
    return std::equal(b.rdns.rbegin(), b.rdns.rend(), a.rdns.rbegin());
}

DistinguishedName parse_dn(const std::string& text) {
    if (trim(text).empty()) fail(DnErrc::empty_rdn, "empty DN");
    DistinguishedName dn;
    for (const std::string& rdn_text : split_unescaped(text, ',')) {
        if (trim(rdn_text).empty()) fail(DnErrc::empty_rdn, "empty RDN in DN");
        dn.rdns.push_back(parse_rdn(rdn_text));
    }
    return dn;
}

std::string format_dn(const DistinguishedName& dn) {
    std::string out;
    for (std::size_t i = 0; i < dn.rdns.size(); ++i) {
        if (i > 0) out += ',';
        const Rdn& rdn = dn.rdns[i];
        for (std::size_t j = 0; j < rdn.pairs.size(); ++j) {
            if (j > 0) out += '+';
            out += escape_value(rdn.pairs[j].first);
            out += '=';
            out += escape_value(rdn.pairs[j].second);
        }
    }
    return out;
}

DistinguishedName normalize_dn(const DistinguishedName& dn) {
    DistinguishedName out;
    out.rdns.reserve(dn.rdns.size());
    for (const Rdn& rdn : dn.rdns) {
        Rdn n;
        n.pairs.reserve(rdn.pairs.size());
        for (const auto& [type, value] : rdn.pairs) {
            n.pairs.emplace_back(ascii_lower(type), ascii_lower(trim(value)));
        }
        std::sort(n.pairs.begin(), n.pairs.end());
        out.rdns.push_back(std::move(n));
    }
    return out;
}

std::string dn_key(const DistinguishedName& dn) {
    return format_dn(normalize_dn(dn));
}

std::string dn_sort_key(const DistinguishedName& dn) {
    const DistinguishedName n = normalize_dn(dn);
    std::string out;
    for (auto it = n.rdns.rbegin(); it != n.rdns.rend(); ++it) {
        DistinguishedName one;
        one.rdns.push_back(*it);
        // 0x01 terminates each level; stuff raw 0x01/0x02 bytes so values
        // cannot forge an ancestry prefix
        for (char c : format_dn(one)) {
            if (c == '\x01' || c == '\x02') out += '\x02';
            out += c;
        }
        out += '\x01';
    }
    return out;
}

bool same_dn(const DistinguishedName& a, const DistinguishedName& b) {
    return normalize_dn(a) == normalize_dn(b);
}

DistinguishedName dn_concat(const DistinguishedName& head,
                            const DistinguishedName& suffix) {
    DistinguishedName out = head;
    out.rdns.insert(out.rdns.end(), suffix.rdns.begin(), suffix.rdns.end());
    return out;
}

}  // namespace dirplan
