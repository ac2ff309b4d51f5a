#include "dirplan/directory.hpp"

#include <algorithm>
#include <cctype>
#include <ctime>

namespace dirplan::core {

namespace {

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

OpOutcome outcome_for(DirErrc code) {
    switch (code) {
        case DirErrc::denied:
            return OpOutcome::denied;
        case DirErrc::schema_violation:
        case DirErrc::unknown_object_class:
            return OpOutcome::schema_violation;
        case DirErrc::no_such_parent:
        case DirErrc::no_such_entry:
            return OpOutcome::not_found;
        default:
            return OpOutcome::other_error;
    }
}

}  // namespace

bool attribute_values_equal(const std::string& attribute, const std::string& a,
                            const std::string& b) {
    if (schema().is_binary_attribute(attribute)) return a == b;
    return ascii_lower(trim(a)) == ascii_lower(trim(b));
}

void Entry::add_value(const std::string& attribute, std::string value) {
    const std::string key = attribute_key(attribute);
    Attribute& attr = attributes_[key];
    if (attr.display.empty()) {
        attr.display = schema().canonical_attribute(attribute).value_or(attribute);
    }
    for (const std::string& existing : attr.values) {
        if (attribute_values_equal(key, existing, value)) return;
    }
    attr.values.push_back(std::move(value));
}

void Entry::set_values(const std::string& attribute, std::vector<std::string> values) {
    const std::string key = attribute_key(attribute);
    if (values.empty()) {
        attributes_.erase(key);
        return;
    }
    Attribute& attr = attributes_[key];
    if (attr.display.empty()) {
        attr.display = schema().canonical_attribute(attribute).value_or(attribute);
    }
    attr.values = std::move(values);
}

void Entry::remove_attribute(const std::string& attribute) {
    attributes_.erase(attribute_key(attribute));
}

bool Entry::has_attribute(const std::string& attribute) const {
    return attributes_.count(attribute_key(attribute)) > 0;
}

bool Entry::has_value(const std::string& attribute, const std::string& value) const {
    const std::string key = attribute_key(attribute);
    auto it = attributes_.find(key);
    if (it == attributes_.end()) return false;
    return std::any_of(it->second.values.begin(), it->second.values.end(),
                       [&](const std::string& v) {
                           return attribute_values_equal(key, v, value);
                       });
}

const std::vector<std::string>* Entry::values(const std::string& attribute) const {
    auto it = attributes_.find(attribute_key(attribute));
    return it == attributes_.end() ? nullptr : &it->second.values;
}

std::string Entry::display_name(const std::string& attribute) const {
    auto it = attributes_.find(attribute_key(attribute));
    if (it != attributes_.end()) return it->second.display;
    return schema().canonical_attribute(attribute).value_or(attribute);
}

std::vector<std::string> Entry::attribute_names() const {
    std::vector<std::string> out;
    out.reserve(attributes_.size());
    for (const auto& [key, attr] : attributes_) out.push_back(attr.display);
    return out;
}

std::vector<std::string> Entry::object_classes() const {
    const std::vector<std::string>* v = values("objectClass");
    return v ? *v : std::vector<std::string>{};
}

bool Entry::operator==(const Entry& other) const {
    return same_dn(dn_, other.dn_) && attributes_ == other.attributes_;
}

std::string permission_name(Permission p) {
    switch (p) {
        case Permission::add_entry: return "add_entry";
        case Permission::delete_entry: return "delete_entry";
        case Permission::modify_attr: return "modify_attr";
        case Permission::read: return "read";
    }
    return "?";
}

std::optional<Permission> permission_from_name(const std::string& name) {
    if (name == "add_entry") return Permission::add_entry;
    if (name == "delete_entry") return Permission::delete_entry;
    if (name == "modify_attr") return Permission::modify_attr;
    if (name == "read") return Permission::read;
    return std::nullopt;
}

std::string op_kind_name(OpKind k) {
    switch (k) {
        case OpKind::add: return "add";
        case OpKind::modify: return "modify";
        case OpKind::del: return "delete";
        case OpKind::search: return "search";
    }
    return "?";
}

std::string op_outcome_name(OpOutcome o) {
    switch (o) {
        case OpOutcome::ok: return "ok";
        case OpOutcome::denied: return "denied";
        case OpOutcome::schema_violation: return "schema_violation";
        case OpOutcome::not_found: return "not_found";
        case OpOutcome::other_error: return "other_error";
    }
    return "?";
}

std::optional<SearchScope> scope_from_name(const std::string& name) {
    if (name == "base") return SearchScope::base;
    if (name == "one") return SearchScope::one;
    if (name == "sub") return SearchScope::sub;
    return std::nullopt;
}

std::string scope_name(SearchScope s) {
    switch (s) {
        case SearchScope::base: return "base";
        case SearchScope::one: return "one";
        case SearchScope::sub: return "sub";
    }
    return "?";
}

namespace {

Filter parse_filter_at(const std::string& text, std::size_t& pos) {
    if (pos >= text.size() || text[pos] != '(') {
        throw DirError(DirErrc::bad_filter, "expected '(' in filter");
    }
    ++pos;
    Filter f;
    if (pos < text.size() && text[pos] == '&') {
        ++pos;
        f.kind = Filter::Kind::conjunction;
        while (pos < text.size() && text[pos] == '(') {
            f.children.push_back(parse_filter_at(text, pos));
        }
        if (pos >= text.size() || text[pos] != ')') {
            throw DirError(DirErrc::bad_filter, "unterminated conjunction");
        }
        ++pos;
        if (f.children.empty()) {
            throw DirError(DirErrc::bad_filter, "empty conjunction");
        }
        return f;
    }
    const std::size_t eq = text.find('=', pos);
    const std::size_t close = text.find(')', pos);
    if (eq == std::string::npos || close == std::string::npos || eq > close) {
        throw DirError(DirErrc::bad_filter, "expected attr=value");
    }
    f.attribute = text.substr(pos, eq - pos);
    f.value = text.substr(eq + 1, close - eq - 1);
    if (f.attribute.empty()) {
        throw DirError(DirErrc::bad_filter, "empty attribute in filter");
    }
    if (f.attribute.find_first_of("()&") != std::string::npos) {
        throw DirError(DirErrc::bad_filter, "bad attribute in filter");
    }
    f.kind = f.value == "*" ? Filter::Kind::presence : Filter::Kind::equality;
    pos = close + 1;
    return f;
}

}  // namespace

Filter Filter::parse(const std::string& text) {
    std::size_t pos = 0;
    Filter f = parse_filter_at(text, pos);
    if (pos != text.size()) {
        throw DirError(DirErrc::bad_filter, "trailing characters in filter");
    }
    return f;
}

bool Filter::matches(const Entry& entry) const {
    switch (kind) {
        case Kind::presence:
            return entry.has_attribute(attribute);
        case Kind::equality:
            return entry.has_value(attribute, value);
        case Kind::conjunction:
            return std::all_of(children.begin(), children.end(),
                               [&](const Filter& c) { return c.matches(entry); });
    }
    return false;
}

std::vector<std::string> Filter::referenced_attributes() const {
    std::vector<std::string> out;
    if (kind == Kind::conjunction) {
        for (const Filter& c : children) {
            for (std::string& a : c.referenced_attributes()) {
                out.push_back(std::move(a));
            }
        }
    } else {
        out.push_back(attribute);
    }
    return out;
}

Directory::Directory(Clock clock) : clock_(std::move(clock)) {
    if (!clock_) {
        clock_ = [] { return static_cast<std::int64_t>(std::time(nullptr)); };
    }
}

void Directory::add_suffix(const DistinguishedName& suffix) {
    std::unique_lock lock(entries_mutex_);
    const std::string key = dn_key(suffix);
    if (std::find(suffix_keys_.begin(), suffix_keys_.end(), key) == suffix_keys_.end()) {
        suffix_keys_.push_back(key);
        suffixes_.push_back(suffix);
    }
}

std::vector<DistinguishedName> Directory::suffixes() const {
    std::shared_lock lock(entries_mutex_);
    return suffixes_;
}

void Directory::set_acl(std::vector<AclRule> rules) {
    std::unique_lock lock(entries_mutex_);
    acl_ = std::move(rules);
}

std::vector<AclRule> Directory::acl() const {
    std::shared_lock lock(entries_mutex_);
    return acl_;
}

void Directory::log_operation(const std::string& principal, OpKind kind,
                              const std::string& target_dn,
                              std::vector<std::string> attributes,
                              OpOutcome outcome) const {
    std::lock_guard lock(log_mutex_);
    OperationRecord record;
    record.sequence_number = next_sequence_++;
    record.principal = principal;
    record.kind = kind;
    record.target_dn = target_dn;
    record.attributes_touched = std::move(attributes);
    record.outcome = outcome;
    record.timestamp = clock_();
    log_.push_back(std::move(record));
}

bool Directory::suffix_registered(const DistinguishedName& dn) const {
    const std::string key = dn_key(dn);
    return std::find(suffix_keys_.begin(), suffix_keys_.end(), key) != suffix_keys_.end();
}

void Directory::check_schema_or_throw(const Entry& entry) const {
    const std::vector<Violation> violations = check_schema(entry);
    if (!violations.empty()) {
        std::string what = "schema violation:";
        for (const Violation& v : violations) {
            what += " [" + v.detail + "]";
        }
        throw DirError(DirErrc::schema_violation, what);
    }
}

void Directory::add_entry(const std::string& principal, const Entry& entry) {
    const std::string dn_text = format_dn(entry.dn());
    std::vector<std::string> attrs = entry.attribute_names();
    try {
        if (!check_acl(principal, Permission::add_entry, entry.dn(), attrs)) {
            throw DirError(DirErrc::denied, "add denied for " + principal);
        }
        check_schema_or_throw(entry);
        std::unique_lock lock(entries_mutex_);
        const std::string key = dn_sort_key(entry.dn());
        std::string parent_key;
        if (!suffix_registered(entry.dn())) {
            if (entry.dn().depth() < 2 || !entries_.count(dn_sort_key(entry.dn().parent()))) {
                throw DirError(DirErrc::no_such_parent,
                               "no parent entry for " + dn_text);
            }
            parent_key = dn_sort_key(entry.dn().parent());
        }
        if (entries_.count(key)) {
            throw DirError(DirErrc::already_exists, "entry exists: " + dn_text);
        }
        if (write_fault_hook_) write_fault_hook_(OpKind::add, entry.dn());
        entries_.emplace(key, Stored{entry, parent_key});
        log_operation(principal, OpKind::add, dn_text, std::move(attrs), OpOutcome::ok);
    } catch (const DirError& e) {
        log_operation(principal, OpKind::add, dn_text, std::move(attrs),
                      outcome_for(e.code()));
        throw;
    }
}

void Directory::modify_entry(const std::string& principal, const DistinguishedName& dn,
                             const std::vector<Change>& changes) {
    const std::string dn_text = format_dn(dn);
    std::vector<std::string> attrs;
    attrs.reserve(changes.size());
    for (const Change& c : changes) attrs.push_back(c.attribute);
    try {
        if (!check_acl(principal, Permission::modify_attr, dn, attrs)) {
            throw DirError(DirErrc::denied, "modify denied for " + principal);
        }
        std::unique_lock lock(entries_mutex_);
        auto it = entries_.find(dn_sort_key(dn));
        if (it == entries_.end()) {
            throw DirError(DirErrc::no_such_entry, "no such entry: " + dn_text);
        }
        Entry updated = it->second.entry;
        for (const Change& change : changes) {
            switch (change.op) {
                case Change::Op::add_values:
                    for (const std::string& v : change.values) {
                        updated.add_value(change.attribute, v);
                    }
                    break;
                case Change::Op::delete_values: {
                    const std::vector<std::string>* existing = updated.values(change.attribute);
                    if (!existing) {
                        throw DirError(DirErrc::no_such_attribute,
                                       "no such attribute: " + change.attribute);
                    }
                    if (change.values.empty()) {
                        updated.remove_attribute(change.attribute);
                        break;
                    }
                    std::vector<std::string> kept = *existing;
                    for (const std::string& v : change.values) {
                        auto found = std::find_if(kept.begin(), kept.end(),
                                                  [&](const std::string& have) {
                                                      return attribute_values_equal(
                                                          change.attribute, have, v);
                                                  });
                        if (found == kept.end()) {
                            throw DirError(DirErrc::no_such_attribute,
                                           "no such value on " + change.attribute);
                        }
                        kept.erase(found);
                    }
                    updated.set_values(change.attribute, std::move(kept));
                    break;
                }
                case Change::Op::replace_values:
                    updated.set_values(change.attribute, change.values);
                    break;
            }
        }
        check_schema_or_throw(updated);
        if (write_fault_hook_) write_fault_hook_(OpKind::modify, dn);
        it->second.entry = std::move(updated);
        log_operation(principal, OpKind::modify, dn_text, std::move(attrs), OpOutcome::ok);
    } catch (const DirError& e) {
        log_operation(principal, OpKind::modify, dn_text, std::move(attrs),
                      outcome_for(e.code()));
        throw;
    }
}

void Directory::delete_entry(const std::string& principal, const DistinguishedName& dn) {
    const std::string dn_text = format_dn(dn);
    try {
        if (!check_acl(principal, Permission::delete_entry, dn, {})) {
            throw DirError(DirErrc::denied, "delete denied for " + principal);
        }
        std::unique_lock lock(entries_mutex_);
        const std::string key = dn_sort_key(dn);
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            throw DirError(DirErrc::no_such_entry, "no such entry: " + dn_text);
        }
        auto next = std::next(it);
        if (next != entries_.end() && next->first.compare(0, key.size(), key) == 0) {
            throw DirError(DirErrc::not_leaf, "entry has children: " + dn_text);
        }
        if (write_fault_hook_) write_fault_hook_(OpKind::del, dn);
        entries_.erase(it);
        log_operation(principal, OpKind::del, dn_text, {}, OpOutcome::ok);
    } catch (const DirError& e) {
        log_operation(principal, OpKind::del, dn_text, {}, outcome_for(e.code()));
        throw;
    }
}

std::vector<Entry> Directory::collect(const DistinguishedName& base, SearchScope scope,
                                      const Filter& filter) const {
    std::vector<Entry> out;
    const std::string base_key = dn_sort_key(base);
    auto base_it = entries_.find(base_key);
    if (base_it == entries_.end()) {
        throw DirError(DirErrc::no_such_entry, "search base not found: " + format_dn(base));
    }
    if (scope == SearchScope::base) {
        if (filter.matches(base_it->second.entry)) out.push_back(base_it->second.entry);
        return out;
    }
    for (auto it = base_it; it != entries_.end(); ++it) {
        if (it->first.compare(0, base_key.size(), base_key) != 0) break;
        if (scope == SearchScope::one && it->second.parent_key != base_key) continue;
        // sub scope includes the base entry itself
        if (filter.matches(it->second.entry)) out.push_back(it->second.entry);
    }
    return out;
}

std::vector<Entry> Directory::search(const DistinguishedName& base, SearchScope scope,
                                     const Filter& filter,
                                     const std::string& principal) const {
    const std::string dn_text = format_dn(base);
    try {
        std::shared_lock lock(entries_mutex_);
        std::vector<Entry> out = collect(base, scope, filter);
        log_operation(principal, OpKind::search, dn_text,
                      filter.referenced_attributes(), OpOutcome::ok);
        return out;
    } catch (const DirError& e) {
        log_operation(principal, OpKind::search, dn_text,
                      filter.referenced_attributes(), outcome_for(e.code()));
        throw;
    }
}

std::vector<Entry> Directory::search(const DistinguishedName& base, SearchScope scope,
                                     const std::string& filter_text,
                                     const std::string& principal) const {
    Filter filter;
    try {
        filter = Filter::parse(filter_text);
    } catch (const DirError& e) {
        log_operation(principal, OpKind::search, format_dn(base), {},
                      outcome_for(e.code()));
        throw;
    }
    return search(base, scope, filter, principal);
}

std::vector<Violation> Directory::check_schema(const Entry& entry) const {
    std::vector<Violation> violations;
    const std::vector<std::string> classes = entry.object_classes();
    if (classes.empty()) {
        violations.push_back({Violation::Kind::missing_must, "objectClass",
                              "entry has no objectClass values"});
        return violations;
    }

    std::vector<const ObjectClassDef*> defs;
    defs.reserve(classes.size());
    for (const std::string& name : classes) {
        const ObjectClassDef* def = schema().find(name);
        if (!def) {
            throw DirError(DirErrc::unknown_object_class, "unknown object class: " + name);
        }
        defs.push_back(def);
    }

    for (std::size_t i = 0; i < defs.size(); ++i) {
        for (std::size_t j = i + 1; j < defs.size(); ++j) {
            if (defs[i]->kind == ClassKind::structural &&
                defs[j]->kind == ClassKind::structural &&
                !schema().same_structural_chain(*defs[i], *defs[j])) {
                violations.push_back({Violation::Kind::structural_conflict,
                                      defs[i]->name + "/" + defs[j]->name,
                                      "unrelated structural classes " + defs[i]->name +
                                          " and " + defs[j]->name});
            }
        }
    }

    std::set<std::string> must;
    std::set<std::string> allowed = {"objectclass"};
    for (const ObjectClassDef* def : defs) {
        for (const std::string& m : schema().effective_must(*def)) {
            must.insert(m);
            allowed.insert(m);
        }
        for (const std::string& m : schema().effective_may(*def)) {
            allowed.insert(m);
        }
    }

    for (const std::string& m : must) {
        if (!entry.has_attribute(m)) {
            const std::string display = schema().canonical_attribute(m).value_or(m);
            violations.push_back({Violation::Kind::missing_must, display,
                                  "missing mandatory attribute " + display});
        }
    }
    for (const std::string& name : entry.attribute_names()) {
        if (!allowed.count(attribute_key(name))) {
            violations.push_back({Violation::Kind::attribute_not_allowed, name,
                                  "attribute " + name + " not permitted by object classes"});
        }
    }
    return violations;
}

bool Directory::check_acl(const std::string& principal, Permission permission,
                          const DistinguishedName& dn,
                          const std::vector<std::string>& attributes) const {
    for (const AclRule& rule : acl_) {
        if (rule.principal != principal) continue;
        if (rule.permission != permission) continue;
        if (!dn.within(rule.subtree)) continue;
        if (!rule.any_attribute) {
            const bool all_in_scope =
                std::all_of(attributes.begin(), attributes.end(), [&](const std::string& a) {
                    return rule.attribute_scope.count(attribute_key(a)) > 0;
                });
            if (!all_in_scope) continue;
        }
        return true;
    }
    return false;
}

std::vector<OperationRecord> Directory::operation_log() const {
    std::lock_guard lock(log_mutex_);
    return log_;
}

std::size_t Directory::entry_count() const {
    std::shared_lock lock(entries_mutex_);
    return entries_.size();
}

bool Directory::has_entry(const DistinguishedName& dn) const {
    std::shared_lock lock(entries_mutex_);
    return entries_.count(dn_sort_key(dn)) > 0;
}

std::optional<Entry> Directory::find_entry(const DistinguishedName& dn) const {
    std::shared_lock lock(entries_mutex_);
    auto it = entries_.find(dn_sort_key(dn));
    if (it == entries_.end()) return std::nullopt;
    return it->second.entry;
}

std::vector<Entry> Directory::all_entries() const {
    std::shared_lock lock(entries_mutex_);
    std::vector<Entry> out;
    out.reserve(entries_.size());
    for (const auto& [key, stored] : entries_) out.push_back(stored.entry);
    return out;
}

void Directory::set_write_fault_hook(WriteFaultHook hook) {
    std::unique_lock lock(entries_mutex_);
    write_fault_hook_ = std::move(hook);
}

void Directory::load_entry(const Entry& entry) {
    check_schema_or_throw(entry);
    std::unique_lock lock(entries_mutex_);
    const std::string key = dn_sort_key(entry.dn());
    std::string parent_key;
    if (!suffix_registered(entry.dn())) {
        if (entry.dn().depth() < 2 || !entries_.count(dn_sort_key(entry.dn().parent()))) {
            throw DirError(DirErrc::no_such_parent,
                           "no parent entry for " + format_dn(entry.dn()));
        }
        parent_key = dn_sort_key(entry.dn().parent());
    }
    if (entries_.count(key)) {
        throw DirError(DirErrc::already_exists, "entry exists: " + format_dn(entry.dn()));
    }
    entries_.emplace(key, Stored{entry, parent_key});
}

}  // namespace dirplan::core
