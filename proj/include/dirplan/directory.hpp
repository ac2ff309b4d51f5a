#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "dirplan/dn.hpp"
#include "dirplan/schema.hpp"

// Embedded directory information tree with object-class schema enforcement,
// deny-by-default access control, a small RFC 2254 filter subset, and an
// append-only operation log.
namespace dirplan::core {

enum class DirErrc {
    denied,
    schema_violation,
    already_exists,
    no_such_parent,
    no_such_entry,
    not_leaf,
    no_such_attribute,
    bad_filter,
    unknown_object_class,
    write_fault,
};

class DirError : public std::runtime_error {
public:
    DirError(DirErrc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    DirErrc code() const { return code_; }

private:
    DirErrc code_;
};

// Attribute values are byte strings; whether they are matched byte-exact or
// case-insensitively is decided by the attribute's syntax (schema registry).
class Entry {
public:
    Entry() = default;
    explicit Entry(DistinguishedName dn) : dn_(std::move(dn)) {}

    const DistinguishedName& dn() const { return dn_; }
    void set_dn(DistinguishedName dn) { dn_ = std::move(dn); }

    void add_value(const std::string& attribute, std::string value);
    void set_values(const std::string& attribute, std::vector<std::string> values);
    void remove_attribute(const std::string& attribute);

    bool has_attribute(const std::string& attribute) const;
    bool has_value(const std::string& attribute, const std::string& value) const;
    const std::vector<std::string>* values(const std::string& attribute) const;
    std::string display_name(const std::string& attribute) const;

    // canonical display names ordered by lowercase key
    std::vector<std::string> attribute_names() const;
    std::size_t attribute_count() const { return attributes_.size(); }

    std::vector<std::string> object_classes() const;

    bool operator==(const Entry& other) const;

private:
    struct Attribute {
        std::string display;
        std::vector<std::string> values;
        bool operator==(const Attribute&) const = default;
    };

    DistinguishedName dn_;
    std::map<std::string, Attribute> attributes_;  // key: attribute_key(name)
};

// Case-insensitive comparison with edge trimming for string syntaxes,
// byte-exact for binary attributes.
bool attribute_values_equal(const std::string& attribute, const std::string& a,
                            const std::string& b);

enum class Permission { add_entry, delete_entry, modify_attr, read };

std::string permission_name(Permission p);
std::optional<Permission> permission_from_name(const std::string& name);

// Deny-by-default: an operation is allowed only if some rule matches the
// principal, the permission, every touched attribute, and the target
// subtree.
struct AclRule {
    std::string principal;
    Permission permission = Permission::read;
    bool any_attribute = false;
    std::set<std::string> attribute_scope;  // lowercase keys, ignored when any
    DistinguishedName subtree;
};

enum class OpKind { add, modify, del, search };
enum class OpOutcome { ok, denied, schema_violation, not_found, other_error };

std::string op_kind_name(OpKind k);
std::string op_outcome_name(OpOutcome o);

struct OperationRecord {
    std::uint64_t sequence_number = 0;
    std::string principal;
    OpKind kind = OpKind::add;
    std::string target_dn;
    std::vector<std::string> attributes_touched;
    OpOutcome outcome = OpOutcome::ok;
    std::int64_t timestamp = 0;
};

enum class SearchScope { base, one, sub };

std::optional<SearchScope> scope_from_name(const std::string& name);
std::string scope_name(SearchScope s);

// Equality "(attr=value)", presence "(attr=*)", conjunction "(&(f)(g))".
struct Filter {
    enum class Kind { equality, presence, conjunction };

    Kind kind = Kind::presence;
    std::string attribute;
    std::string value;
    std::vector<Filter> children;

    static Filter parse(const std::string& text);  // throws DirError(bad_filter)
    bool matches(const Entry& entry) const;
    std::vector<std::string> referenced_attributes() const;
};

struct Violation {
    enum class Kind { missing_must, attribute_not_allowed, structural_conflict };

    Kind kind = Kind::missing_must;
    std::string subject;  // attribute or object class
    std::string detail;
};

struct Change {
    enum class Op { add_values, delete_values, replace_values };

    Op op = Op::replace_values;
    std::string attribute;
    std::vector<std::string> values;
};

class Directory {
public:
    using Clock = std::function<std::int64_t()>;
    using WriteFaultHook = std::function<void(OpKind, const DistinguishedName&)>;

    explicit Directory(Clock clock = {});

    // configuration, not logged
    void add_suffix(const DistinguishedName& suffix);
    std::vector<DistinguishedName> suffixes() const;
    void set_acl(std::vector<AclRule> rules);
    std::vector<AclRule> acl() const;

    // Mutating operations run ACL check, then schema check, then commit;
    // an OperationRecord is appended with the outcome either way.
    void add_entry(const std::string& principal, const Entry& entry);
    void modify_entry(const std::string& principal, const DistinguishedName& dn,
                      const std::vector<Change>& changes);
    void delete_entry(const std::string& principal, const DistinguishedName& dn);

    std::vector<Entry> search(const DistinguishedName& base, SearchScope scope,
                              const Filter& filter,
                              const std::string& principal = "anonymous") const;
    std::vector<Entry> search(const DistinguishedName& base, SearchScope scope,
                              const std::string& filter_text,
                              const std::string& principal = "anonymous") const;

    std::vector<Violation> check_schema(const Entry& entry) const;
    bool check_acl(const std::string& principal, Permission permission,
                   const DistinguishedName& dn,
                   const std::vector<std::string>& attributes) const;

    std::vector<OperationRecord> operation_log() const;
    std::size_t entry_count() const;
    bool has_entry(const DistinguishedName& dn) const;
    std::optional<Entry> find_entry(const DistinguishedName& dn) const;

    // all entries, parents before children, deterministic order
    std::vector<Entry> all_entries() const;

    // Invoked after checks pass, before a mutation commits; a throwing hook
    // turns the operation into a logged failure. Used for fault injection.
    void set_write_fault_hook(WriteFaultHook hook);

    // Bulk load for restore paths: schema- and tree-checked, no ACL, no log.
    void load_entry(const Entry& entry);

private:
    struct Stored {
        Entry entry;
        std::string parent_key;
    };

    void log_operation(const std::string& principal, OpKind kind,
                       const std::string& target_dn,
                       std::vector<std::string> attributes, OpOutcome outcome) const;
    bool suffix_registered(const DistinguishedName& dn) const;
    void check_schema_or_throw(const Entry& entry) const;
    std::vector<Entry> collect(const DistinguishedName& base, SearchScope scope,
                               const Filter& filter) const;

    Clock clock_;
    mutable std::shared_mutex entries_mutex_;
    std::map<std::string, Stored> entries_;  // key: dn_sort_key
    std::vector<std::string> suffix_keys_;   // dn_key form
    std::vector<DistinguishedName> suffixes_;
    std::vector<AclRule> acl_;
    WriteFaultHook write_fault_hook_;

    mutable std::mutex log_mutex_;
    mutable std::vector<OperationRecord> log_;
    mutable std::uint64_t next_sequence_ = 1;
};

}  // namespace dirplan::core
