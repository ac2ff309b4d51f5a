#include "dirplan/ldif.hpp"

#include <algorithm>
#include <map>
#include <memory>

#include "dirplan/bytes.hpp"

namespace dirplan::ldif {

namespace {

constexpr std::size_t kMaxLine = 76;

void append_folded(std::string& out, const std::string& logical) {
    if (logical.size() <= kMaxLine) {
        out += logical;
        out += '\n';
        return;
    }
    out.append(logical, 0, kMaxLine);
    out += '\n';
    std::size_t pos = kMaxLine;
    while (pos < logical.size()) {
        const std::size_t take = std::min<std::size_t>(kMaxLine - 1, logical.size() - pos);
        out += ' ';
        out.append(logical, pos, take);
        out += '\n';
        pos += take;
    }
}

void append_attribute_line(std::string& out, const std::string& display,
                           const std::string& value) {
    const std::string key = core::attribute_key(display);
    if (core::schema().is_binary_attribute(key)) {
        append_folded(out, display + ";binary:: " + base64_encode(to_bytes(value)));
    } else if (is_safe_string(value)) {
        append_folded(out, display + ": " + value);
    } else {
        append_folded(out, display + ":: " + base64_encode(to_bytes(value)));
    }
}

struct LogicalLine {
    std::string text;
    std::size_t number = 0;  // first physical line
};

std::vector<LogicalLine> unfold(const std::string& text) {
    std::vector<LogicalLine> lines;
    std::string current;
    std::size_t line_number = 0;
    std::size_t current_number = 0;
    bool have_current = false;

    auto flush = [&] {
        if (have_current) {
            lines.push_back({current, current_number});
            current.clear();
            have_current = false;
        }
    };

    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string physical = text.substr(start, end - start);
        if (!physical.empty() && physical.back() == '\r') physical.pop_back();
        ++line_number;

        if (!physical.empty() && physical.front() == ' ' && have_current) {
            current += physical.substr(1);
        } else {
            flush();
            // blank lines are significant separators, keep them
            current = physical;
            current_number = line_number;
            have_current = true;
        }
        if (end == text.size()) break;
        start = end + 1;
    }
    flush();
    return lines;
}

struct ParsedRecord {
    core::Entry entry;
    std::size_t line = 0;
};

std::pair<std::string, std::string> split_attr_line(const LogicalLine& line) {
    const std::size_t colon = line.text.find(':');
    if (colon == std::string::npos || colon == 0) {
        throw Error(Errc::malformed_line, line.number, "expected attribute line");
    }
    const std::string name = line.text.substr(0, colon);
    std::string rest = line.text.substr(colon + 1);
    bool base64 = false;
    if (!rest.empty() && rest.front() == ':') {
        base64 = true;
        rest.erase(rest.begin());
    }
    if (!rest.empty() && rest.front() == '<') {
        throw Error(Errc::malformed_line, line.number, "URL value references unsupported");
    }
    if (!rest.empty() && rest.front() == ' ') rest.erase(rest.begin());
    if (base64) {
        try {
            return {name, to_string(base64_decode(rest))};
        } catch (const std::invalid_argument& e) {
            throw Error(Errc::malformed_line, line.number, e.what());
        }
    }
    return {name, rest};
}

std::vector<ParsedRecord> parse_records(const std::string& text) {
    std::vector<LogicalLine> lines = unfold(text);
    std::vector<ParsedRecord> records;

    std::size_t i = 0;
    // optional version line
    bool version_seen = false;
    while (i < lines.size()) {
        const LogicalLine& line = lines[i];
        if (line.text.empty() || line.text.front() == '#') {
            ++i;
            continue;
        }
        if (!version_seen && line.text.compare(0, 8, "version:") == 0) {
            std::string v = line.text.substr(8);
            while (!v.empty() && v.front() == ' ') v.erase(v.begin());
            if (v != "1") {
                throw Error(Errc::bad_version, line.number, "unsupported LDIF version " + v);
            }
            version_seen = true;
            ++i;
            continue;
        }
        break;
    }

    while (i < lines.size()) {
        if (lines[i].text.empty() || lines[i].text.front() == '#') {
            ++i;
            continue;
        }
        // start of a record: must be the dn line
        auto [name, value] = split_attr_line(lines[i]);
        if (core::attribute_key(name) != "dn") {
            throw Error(Errc::malformed_line, lines[i].number, "record does not start with dn");
        }
        ParsedRecord record;
        record.line = lines[i].number;
        try {
            record.entry.set_dn(parse_dn(value));
        } catch (const DnError& e) {
            throw Error(Errc::malformed_line, lines[i].number,
                        std::string("bad dn: ") + e.what());
        }
        ++i;
        while (i < lines.size() && !lines[i].text.empty()) {
            if (lines[i].text.front() == '#') {
                ++i;
                continue;
            }
            auto [attr, attr_value] = split_attr_line(lines[i]);
            if (core::attribute_key(attr) == "dn") {
                throw Error(Errc::malformed_line, lines[i].number, "dn line inside record");
            }
            if (core::attribute_key(attr) == "changetype") {
                throw Error(Errc::malformed_line, lines[i].number,
                            "change records are not supported");
            }
            record.entry.add_value(attr, attr_value);
            ++i;
        }
        records.push_back(std::move(record));
    }
    return records;
}

}  // namespace

bool is_safe_string(const std::string& value) {
    if (value.empty()) return true;
    const unsigned char first = static_cast<unsigned char>(value.front());
    if (first == ' ' || first == ':' || first == '<') return false;
    return std::all_of(value.begin(), value.end(), [](char c) {
        const auto b = static_cast<unsigned char>(c);
        return b != 0 && b != '\n' && b != '\r' && b < 0x80;
    });
}

std::string format_entry_record(const core::Entry& entry) {
    std::string out;
    const std::string dn_text = format_dn(entry.dn());
    if (is_safe_string(dn_text)) {
        append_folded(out, "dn: " + dn_text);
    } else {
        append_folded(out, "dn:: " + base64_encode(to_bytes(dn_text)));
    }

    std::vector<std::string> classes = entry.object_classes();
    std::sort(classes.begin(), classes.end());
    for (const std::string& oc : classes) {
        append_attribute_line(out, entry.display_name("objectClass"), oc);
    }
    for (const std::string& name : entry.attribute_names()) {
        if (core::attribute_key(name) == "objectclass") continue;
        std::vector<std::string> values = *entry.values(name);
        std::sort(values.begin(), values.end());
        for (const std::string& value : values) {
            append_attribute_line(out, name, value);
        }
    }
    return out;
}

std::string export_ldif(const core::Directory& directory) {
    std::string out = "version: 1\n";
    bool first = true;
    for (const core::Entry& entry : directory.all_entries()) {
        if (!first) out += '\n';
        first = false;
        out += format_entry_record(entry);
    }
    return out;
}

void import_ldif_into(const std::string& text, core::Directory& directory) {
    std::vector<ParsedRecord> records = parse_records(text);

    std::map<std::string, std::size_t> present;  // dn_key -> record line
    for (const ParsedRecord& r : records) {
        const std::string key = dn_key(r.entry.dn());
        auto [it, inserted] = present.emplace(key, r.line);
        if (!inserted) {
            throw Error(Errc::duplicate_entry, r.line,
                        "duplicate dn: " + format_dn(r.entry.dn()));
        }
    }

    // A record whose parent is missing is a suffix when no proper ancestor
    // exists in the file, and an orphan otherwise.
    for (const ParsedRecord& r : records) {
        DistinguishedName ancestor = r.entry.dn().parent();
        if (ancestor.empty() || present.count(dn_key(ancestor))) continue;
        bool has_deeper_ancestor = false;
        for (DistinguishedName walk = ancestor.parent(); !walk.empty();
             walk = walk.parent()) {
            if (present.count(dn_key(walk))) {
                has_deeper_ancestor = true;
                break;
            }
        }
        if (has_deeper_ancestor) {
            throw Error(Errc::orphan_entry, r.line,
                        "parent missing for " + format_dn(r.entry.dn()));
        }
        directory.add_suffix(r.entry.dn());
    }
    for (const ParsedRecord& r : records) {
        if (r.entry.dn().depth() == 1) directory.add_suffix(r.entry.dn());
    }

    std::vector<const ParsedRecord*> ordered;
    ordered.reserve(records.size());
    for (const ParsedRecord& r : records) ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(),
              [](const ParsedRecord* a, const ParsedRecord* b) {
                  return dn_sort_key(a->entry.dn()) < dn_sort_key(b->entry.dn());
              });

    for (const ParsedRecord* r : ordered) {
        try {
            directory.load_entry(r->entry);
        } catch (const core::DirError& e) {
            if (e.code() == core::DirErrc::no_such_parent) {
                throw Error(Errc::orphan_entry, r->line, e.what());
            }
            throw Error(Errc::schema_violation, r->line, e.what());
        }
    }
}

std::unique_ptr<core::Directory> import_ldif(const std::string& text) {
    auto directory = std::make_unique<core::Directory>();
    import_ldif_into(text, *directory);
    return directory;
}

}  // namespace dirplan::ldif
