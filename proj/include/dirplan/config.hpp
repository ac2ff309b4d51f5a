#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dirplan/directory.hpp"
#include "dirplan/plan.hpp"

// Plain "key = value" configuration with an [acl] section of
// "principal, permission, attributes, subtree" rows.
namespace dirplan::config {

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::size_t line, const std::string& what)
        : std::runtime_error("config line " + std::to_string(line) + ": " + what),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct Config {
    std::string root_domain;
    std::string organization;
    bool accredited = false;
    std::string ldap_host = "localhost";
    int ldap_port = 389;
    plan::UserPlanMode user_plan_mode = plan::UserPlanMode::pki_only;
    std::string snapshot_path;
    std::string audit_log_path;
    std::optional<std::string> ca_dn;          // hybrid CA/CRL-DP entry seeded by init
    std::vector<std::string> extra_suffixes;   // besides the dc root
    std::vector<core::AclRule> acl;
};

Config parse_config(const std::string& text);
Config load_config_file(const std::string& path);

}  // namespace dirplan::config
