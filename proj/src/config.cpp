#include "dirplan/config.hpp"

#include <fstream>
#include <sstream>

namespace dirplan::config {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    std::size_t e = s.find_last_not_of(" \t");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& value, std::size_t line) {
    if (value == "true" || value == "yes" || value == "1") return true;
    if (value == "false" || value == "no" || value == "0") return false;
    throw ConfigError(line, "expected true/false, got '" + value + "'");
}

core::AclRule parse_acl_row(const std::string& row, std::size_t line) {
    // principal, permission, attributes, subtree — the subtree keeps its
    // commas, so only the first three fields are split off.
    std::vector<std::string> fields;
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
        const std::size_t comma = row.find(',', pos);
        if (comma == std::string::npos) {
            throw ConfigError(line, "acl row needs 4 fields: " + row);
        }
        fields.push_back(trim(row.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    fields.push_back(trim(row.substr(pos)));

    core::AclRule rule;
    rule.principal = fields[0];
    if (rule.principal.empty()) throw ConfigError(line, "empty principal");
    const std::optional<core::Permission> permission = core::permission_from_name(fields[1]);
    if (!permission) throw ConfigError(line, "unknown permission '" + fields[1] + "'");
    rule.permission = *permission;
    if (fields[2] == "any" || fields[2] == "*") {
        rule.any_attribute = true;
    } else {
        std::istringstream attrs(fields[2]);
        std::string attr;
        while (attrs >> attr) rule.attribute_scope.insert(core::attribute_key(attr));
        if (rule.attribute_scope.empty()) {
            throw ConfigError(line, "empty attribute scope");
        }
    }
    try {
        rule.subtree = parse_dn(fields[3]);
    } catch (const DnError& e) {
        throw ConfigError(line, std::string("bad subtree dn: ") + e.what());
    }
    return rule;
}

}  // namespace

Config parse_config(const std::string& text) {
    Config cfg;
    bool in_acl = false;
    std::size_t line_number = 0;
    std::istringstream stream(text);
    std::string raw;
    while (std::getline(stream, raw)) {
        ++line_number;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        const std::string line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (line == "[acl]") {
            in_acl = true;
            continue;
        }
        if (line.front() == '[') {
            throw ConfigError(line_number, "unknown section " + line);
        }
        if (in_acl) {
            cfg.acl.push_back(parse_acl_row(line, line_number));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(line_number, "expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "root_domain") {
            cfg.root_domain = value;
        } else if (key == "organization") {
            cfg.organization = value;
        } else if (key == "accredited") {
            cfg.accredited = parse_bool(value, line_number);
        } else if (key == "ldap_host") {
            cfg.ldap_host = value;
        } else if (key == "ldap_port") {
            try {
                cfg.ldap_port = std::stoi(value);
            } catch (const std::exception&) {
                throw ConfigError(line_number, "bad port '" + value + "'");
            }
            if (cfg.ldap_port < 1 || cfg.ldap_port > 65535) {
                throw ConfigError(line_number, "port out of range");
            }
        } else if (key == "user_plan_mode") {
            const std::optional<plan::UserPlanMode> mode = plan::user_plan_mode_from_name(value);
            if (!mode) throw ConfigError(line_number, "unknown user_plan_mode '" + value + "'");
            cfg.user_plan_mode = *mode;
        } else if (key == "snapshot_path") {
            cfg.snapshot_path = value;
        } else if (key == "audit_log_path") {
            cfg.audit_log_path = value;
        } else if (key == "ca_dn") {
            cfg.ca_dn = value;
        } else if (key == "suffix") {
            cfg.extra_suffixes.push_back(value);
        } else {
            throw ConfigError(line_number, "unknown key '" + key + "'");
        }
    }
    if (cfg.root_domain.empty()) throw ConfigError(0, "root_domain is required");
    if (cfg.snapshot_path.empty()) throw ConfigError(0, "snapshot_path is required");
    if (cfg.audit_log_path.empty()) throw ConfigError(0, "audit_log_path is required");
    return cfg;
}

Config load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

}  // namespace dirplan::config
