#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>

#include "dirplan/directory.hpp"

// RFC 2849 content records, used for whole-directory backup, restore and
// on-disk snapshots. Export is canonical: fixed ordering, LF line ends,
// 76-column folding — export(import(export(d))) is byte-identical.
namespace dirplan::ldif {

enum class Errc {
    bad_version,
    malformed_line,
    schema_violation,
    orphan_entry,
    duplicate_entry,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what),
          code_(code),
          line_(line) {}
    Errc code() const { return code_; }
    std::size_t line() const { return line_; }

private:
    Errc code_;
    std::size_t line_;
};

std::string export_ldif(const core::Directory& directory);

// One content record (dn line, objectClass values, remaining attributes),
// folded and base64-encoded like a full export.
std::string format_entry_record(const core::Entry& entry);

// Reconstructs a directory from LDIF text; entries are schema-checked and
// parents must be present (top-level records become suffixes).
std::unique_ptr<core::Directory> import_ldif(const std::string& text);

// Same, loading into a prepared empty directory (keeps its clock and ACLs).
void import_ldif_into(const std::string& text, core::Directory& directory);

// RFC 2849 SAFE-STRING: ASCII without NUL/CR/LF, first char not space,
// colon or '<'. Anything else is base64-encoded on export.
bool is_safe_string(const std::string& value);

}  // namespace dirplan::ldif
