// Administrator command surface for the publication toolkit: plan and seed
// the tree, register and activate certificates, publish CRLs, answer status
// queries, run monitored deletes, back up and restore, retry failed
// operations, and audit compliance.
#include <CLI11.hpp>

#include <sys/file.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dirplan/bytes.hpp"
#include "dirplan/config.hpp"
#include "dirplan/directory.hpp"
#include "dirplan/ldif.hpp"
#include "dirplan/lifecycle.hpp"
#include "dirplan/plan.hpp"
#include "dirplan/state_io.hpp"
#include "dirplan/timeutil.hpp"
#include "dirplan/x509.hpp"

namespace {

using namespace dirplan;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

Bytes read_der_file(const std::string& path) {
    return to_bytes(read_file(path));
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw std::runtime_error("cannot replace " + path);
    }
}

bool file_exists(const std::string& path) {
    std::ifstream in(path);
    return in.good();
}

DistinguishedName dn_arg(const std::string& text) {
    try {
        return parse_dn(text);
    } catch (const DnError& e) {
        throw CLI::ValidationError("dn", std::string("bad DN '") + text + "': " + e.what());
    }
}

const CLI::Validator kDnValidator = CLI::Validator(
    [](std::string& input) -> std::string {
        try {
            parse_dn(input);
            return {};
        } catch (const DnError& e) {
            return std::string("bad DN: ") + e.what();
        }
    },
    "DN");

// one mutating command at a time per snapshot
class LockFile {
public:
    explicit LockFile(const std::string& path) : path_(path + ".lock") {
        fd_ = ::open(path_.c_str(), O_CREAT | O_RDWR, 0644);
        if (fd_ < 0 || ::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
            throw std::runtime_error(
                "another dirplan invocation holds the lock " + path_);
        }
    }
    ~LockFile() {
        if (fd_ >= 0) {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }
    LockFile(const LockFile&) = delete;
    LockFile& operator=(const LockFile&) = delete;

private:
    std::string path_;
    int fd_ = -1;
};

struct App {
    config::Config cfg;
    std::int64_t now = 0;
    std::unique_ptr<core::Directory> dir;
    std::unique_ptr<lifecycle::Engine> engine;
    std::ofstream audit_stream;

    std::string state_path() const { return cfg.snapshot_path + ".state.json"; }

    void open(bool fresh) {
        audit_stream.open(cfg.audit_log_path, std::ios::app);
        if (!audit_stream) {
            throw std::runtime_error("cannot open audit log " + cfg.audit_log_path);
        }

        dir = std::make_unique<core::Directory>([this] { return now; });
        dir->set_acl(cfg.acl);
        const std::vector<core::Entry> root = plan::plan_root(cfg.root_domain,
                                                              cfg.organization);
        dir->add_suffix(root.front().dn());
        for (const std::string& suffix : cfg.extra_suffixes) {
            dir->add_suffix(parse_dn(suffix));
        }

        if (!fresh) {
            if (!file_exists(cfg.snapshot_path)) {
                throw std::runtime_error("no snapshot at " + cfg.snapshot_path +
                                         "; run 'dirplan init' first");
            }
            ldif::import_ldif_into(read_file(cfg.snapshot_path), *dir);
        }

        lifecycle::Options options;
        options.clock = [this] { return now; };
        options.audit_sink = [this](const lifecycle::AuditEvent& e) {
            audit_stream << e.line() << '\n';
            audit_stream.flush();
        };
        options.notifier = [](const std::string& message) {
            std::cerr << "NOTIFY: " << message << '\n';
        };
        options.user_plan_mode = cfg.user_plan_mode;
        engine = std::make_unique<lifecycle::Engine>(*dir, options);

        if (!fresh && file_exists(state_path())) {
            engine->restore_state(state_io::load_engine_state(read_file(state_path())));
        }
    }

    void persist() {
        write_file_atomic(cfg.snapshot_path, ldif::export_ldif(*dir));
        write_file_atomic(state_path(), state_io::save_engine_state(engine->snapshot_state()));
    }

    void audit_cli(const std::string& event, const std::string& target,
                   const std::string& outcome, const std::string& detail) {
        lifecycle::AuditEvent e;
        e.timestamp = now;
        e.principal = "cli";
        e.event = event;
        e.target = target;
        e.outcome = outcome;
        e.detail = detail;
        audit_stream << e.line() << '\n';
        audit_stream.flush();
    }
};

// missing path levels between the suffixes and the configured subtrees
void seed_scaffolding(App& app) {
    std::vector<DistinguishedName> targets;
    for (const core::AclRule& rule : app.cfg.acl) targets.push_back(rule.subtree);
    std::optional<DistinguishedName> ca_dn;
    if (app.cfg.ca_dn) {
        ca_dn = parse_dn(*app.cfg.ca_dn);
        targets.push_back(*ca_dn);
    }

    for (const DistinguishedName& target : targets) {
        for (std::size_t i = 1; i <= target.depth(); ++i) {
            DistinguishedName partial;
            partial.rdns.assign(target.rdns.end() - static_cast<std::ptrdiff_t>(i),
                                target.rdns.end());
            if (app.dir->has_entry(partial)) continue;
            if (ca_dn && same_dn(partial, *ca_dn)) {
                const auto& leaf = partial.rdns.front().pairs.front();
                app.dir->add_entry("admin", plan::plan_ca_entry(leaf.second,
                                                                partial.parent(),
                                                                std::nullopt));
                continue;
            }
            const std::optional<core::Entry> entry = plan::plan_path_entry(partial);
            if (entry) app.dir->add_entry("admin", *entry);
        }
    }
}

int cmd_init(App& app, bool force) {
    if (file_exists(app.cfg.snapshot_path) && !force) {
        std::cerr << "error: snapshot " << app.cfg.snapshot_path
                  << " already exists (use --force to reinitialize)\n";
        return 1;
    }
    app.open(true);
    for (const core::Entry& entry : plan::plan_root(app.cfg.root_domain,
                                                    app.cfg.organization)) {
        if (!app.dir->has_entry(entry.dn())) app.dir->add_entry("admin", entry);
    }
    seed_scaffolding(app);
    app.persist();
    app.audit_cli("init", app.cfg.root_domain, "ok",
                  "entries=" + std::to_string(app.dir->entry_count()));
    std::cout << "initialized " << app.dir->entry_count() << " entries under "
              << format_dn(plan::plan_root(app.cfg.root_domain, app.cfg.organization)
                               .front()
                               .dn())
              << "\n";
    return 0;
}

int cmd_register(App& app, const std::string& cert_path, bool consent) {
    const x509::CertificateInfo info = x509::parse_certificate(read_der_file(cert_path));
    const lifecycle::PublicationRecord record =
        app.engine->register_certificate(info, consent, app.cfg.accredited);
    app.persist();
    std::cout << "registered " << format_dn(info.subject) << " serial " << info.serial
              << "\n"
              << "retention until " << timeutil::iso8601_utc(record.retention_deadline)
              << "\n";
    return 0;
}

int cmd_activate(App& app, const std::string& issuer_text, const std::string& serial) {
    const DistinguishedName issuer = dn_arg(issuer_text);
    try {
        app.engine->activate(issuer, serial);
    } catch (...) {
        app.persist();
        throw;
    }
    app.persist();
    const auto record = app.engine->find_record(issuer, serial);
    std::cout << "activated serial " << serial << " of " << format_dn(issuer) << "\n";
    if (record && record->directory_dn) {
        std::cout << "published " << format_dn(*record->directory_dn) << "\n";
    } else if (record && record->consent_to_publish) {
        std::cout << "publication queued for retry\n";
    } else {
        std::cout << "not published (no consent)\n";
    }
    return 0;
}

int cmd_publish_crl(App& app, const std::string& crl_path, const std::string& dp_text) {
    const DistinguishedName dp = dn_arg(dp_text);
    const Bytes der = read_der_file(crl_path);
    try {
        app.engine->publish_crl(der, dp);
    } catch (...) {
        app.persist();  // queue and status knowledge must survive the failure
        throw;
    }
    app.persist();
    const x509::CrlInfo info = x509::parse_crl(der);
    std::cout << "published " << x509::crl_class_name(x509::classify_crl(info))
              << " CRL on " << format_dn(dp) << "\n";
    return 0;
}

int cmd_status(App& app, const std::string& issuer_text, const std::string& serial,
               const std::string& hash_hex, const std::string& alg) {
    const DistinguishedName issuer = dn_arg(issuer_text);
    std::optional<x509::HashValue> presented;
    if (!hash_hex.empty()) {
        x509::HashValue h;
        h.algorithm = alg == "sha1" ? x509::HashAlg::sha1 : x509::HashAlg::sha256;
        try {
            h.digest = hex_decode(hash_hex);
        } catch (const std::invalid_argument& e) {
            throw CLI::ValidationError("--hash", e.what());
        }
        presented = std::move(h);
    }
    const lifecycle::StatusResult result =
        app.engine->query_status(issuer, serial, presented);
    std::cout << lifecycle::status_answer_name(result.answer) << "\n";
    if (presented) {
        std::cout << "hash match: "
                  << (result.hash_match ? (*result.hash_match ? "yes" : "no") : "n/a")
                  << "\n";
    }
    return 0;
}

int cmd_search(App& app, const std::string& base_text, const std::string& scope_text,
               const std::string& filter) {
    const DistinguishedName base = dn_arg(base_text);
    const std::optional<core::SearchScope> scope = core::scope_from_name(scope_text);
    if (!scope) throw CLI::ValidationError("scope", "expected base, one, or sub");
    const std::vector<core::Entry> hits = app.dir->search(base, *scope, filter, "cli");
    bool first = true;
    for (const core::Entry& entry : hits) {
        if (!first) std::cout << "\n";
        first = false;
        std::cout << ldif::format_entry_record(entry);
    }
    std::cerr << hits.size() << " entries found\n";
    return 0;
}

int cmd_crl_url(App& app, const std::string& dp_text) {
    std::cout << plan::make_crl_dp_url(app.cfg.ldap_host, app.cfg.ldap_port,
                                       dn_arg(dp_text))
              << "\n";
    return 0;
}

int cmd_delete(App& app, const std::string& dn_text, bool yes_flag, bool unattended) {
    const DistinguishedName dn = dn_arg(dn_text);
    const lifecycle::DeleteTicket ticket = app.engine->request_delete("admin", dn);

    std::cout << "about to delete: " << format_dn(ticket.target_dn) << "\n";
    const Bytes der = to_bytes(ticket.fetched_certificate);
    try {
        const x509::CertificateInfo info = x509::parse_certificate(der);
        std::cout << "  subject:  " << format_dn(info.subject) << "\n"
                  << "  issuer:   " << format_dn(info.issuer) << "\n"
                  << "  serial:   " << info.serial << "\n"
                  << "  validity: " << info.not_before.iso8601() << " .. "
                  << info.not_after.iso8601() << "\n";
    } catch (const x509::Error&) {
        std::cout << "  (certificate bytes do not parse)\n";
    }
    std::cout << "  sha256:   " << hex_encode(x509::cert_hash(der, x509::HashAlg::sha256).digest)
              << "\n";

    bool acknowledged = false;
    if (unattended && yes_flag) {
        acknowledged = true;
    } else {
        std::cout << "type 'yes' to confirm: " << std::flush;
        std::string answer;
        std::getline(std::cin, answer);
        acknowledged = answer == "yes";
    }

    try {
        app.engine->confirm_delete(ticket.ticket_id, acknowledged);
    } catch (...) {
        app.persist();
        throw;
    }
    app.persist();
    std::cout << "deleted " << format_dn(dn) << "\n";
    return 0;
}

int cmd_backup(App& app, const std::string& out_path) {
    write_file_atomic(out_path, ldif::export_ldif(*app.dir));
    app.audit_cli("backup", out_path, "ok",
                  "entries=" + std::to_string(app.dir->entry_count()));
    std::cout << "backed up " << app.dir->entry_count() << " entries to " << out_path
              << "\n";
    return 0;
}

int cmd_restore(App& app, const std::string& in_path) {
    auto restored = std::make_unique<core::Directory>();
    restored->set_acl(app.cfg.acl);
    restored->add_suffix(
        plan::plan_root(app.cfg.root_domain, app.cfg.organization).front().dn());
    for (const std::string& suffix : app.cfg.extra_suffixes) {
        restored->add_suffix(parse_dn(suffix));
    }
    ldif::import_ldif_into(read_file(in_path), *restored);
    write_file_atomic(app.cfg.snapshot_path, ldif::export_ldif(*restored));
    app.audit_cli("restore", in_path, "ok",
                  "entries=" + std::to_string(restored->entry_count()));
    std::cout << "restored " << restored->entry_count() << " entries from " << in_path
              << "\n";
    return 0;
}

int cmd_retry_queue(App& app) {
    const std::vector<lifecycle::RetryResult> results = app.engine->retry_out_of_band();
    app.persist();
    for (const lifecycle::RetryResult& r : results) {
        if (r.ok) {
            std::cout << "ok: " << r.description << "\n";
        } else {
            std::cout << "failed: " << r.description << " (" << r.error_text << ")\n";
        }
    }
    std::cout << results.size() << " item(s) processed, "
              << app.engine->pending_queue().size() << " still queued\n";
    return 0;
}

int cmd_audit(App& app) {
    const lifecycle::ComplianceReport report = app.engine->audit_compliance();
    for (const lifecycle::ComplianceCheck& check : report.checks) {
        std::cout << (check.passed ? "PASS" : "FAIL") << " " << check.name << ": "
                  << check.detail << "\n";
    }
    return report.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli("PKI directory publication planner and lifecycle tool", "dirplan");
    cli.require_subcommand(1);

    std::string config_path;
    cli.add_option("--config", config_path, "configuration file")
        ->envname("DIRPLAN_CONFIG");
    std::string clock_text;
    cli.add_option("--clock", clock_text,
                   "fixed UTC clock (YYYY-MM-DDTHH:MM:SSZ) for deterministic runs")
        ->envname("DIRPLAN_CLOCK");

    // subcommand wiring: parse first, then run the selected action
    auto* init = cli.add_subcommand("init", "plan the tree, seed ACL scaffolding, write the snapshot");
    bool init_force = false;
    init->add_flag("--force", init_force, "reinitialize over an existing snapshot");

    auto* reg = cli.add_subcommand("register", "register a certificate (no publication yet)");
    std::string reg_cert;
    bool reg_consent = false;
    reg->add_option("cert", reg_cert, "DER certificate file")->required();
    reg->add_flag("--consent", reg_consent, "the owner consents to directory publication");

    auto* act = cli.add_subcommand("activate", "activate a registered certificate");
    std::string act_issuer, act_serial;
    act->add_option("issuer-dn", act_issuer)->required()->check(kDnValidator);
    act->add_option("serial", act_serial)->required();

    auto* pub = cli.add_subcommand("publish-crl", "publish a CRL on a distribution point");
    std::string pub_crl, pub_dp;
    pub->add_option("crl", pub_crl, "DER CRL file")->required();
    pub->add_option("--dp", pub_dp, "distribution point DN")
        ->required()
        ->check(kDnValidator);

    auto* status = cli.add_subcommand("status", "query certificate status (good/revoked/unknown)");
    std::string status_issuer, status_serial, status_hash, status_alg = "sha256";
    status->add_option("issuer-dn", status_issuer)->required()->check(kDnValidator);
    status->add_option("serial", status_serial)->required();
    status->add_option("--hash", status_hash, "presented certificate hash, hex");
    status->add_option("--alg", status_alg, "hash algorithm (sha1|sha256)")
        ->check(CLI::IsMember({"sha1", "sha256"}));

    auto* search = cli.add_subcommand("search", "search the directory, LDIF output");
    std::string search_base, search_scope, search_filter;
    search->add_option("base-dn", search_base)->required()->check(kDnValidator);
    search->add_option("scope", search_scope, "base|one|sub")
        ->required()
        ->check(CLI::IsMember({"base", "one", "sub"}));
    search->add_option("filter", search_filter)->required();

    auto* del = cli.add_subcommand("delete", "monitored delete with acknowledgement");
    std::string del_dn;
    bool del_yes = false, del_unattended = false;
    del->add_option("dn", del_dn)->required()->check(kDnValidator);
    del->add_flag("--yes-i-confirm", del_yes,
                  "acknowledge without prompting (test mode only)");
    del->add_flag("--unattended-test-mode", del_unattended,
                  "allow --yes-i-confirm (for CI)");

    auto* crl_url = cli.add_subcommand("crl-url", "print the cRLDistributionPoints LDAP URL");
    std::string crl_url_dp;
    crl_url->add_option("--dp", crl_url_dp, "distribution point DN")
        ->required()
        ->check(kDnValidator);

    auto* backup = cli.add_subcommand("backup", "export the whole directory as LDIF");
    std::string backup_out;
    backup->add_option("out", backup_out, "output LDIF file")->required();

    auto* restore = cli.add_subcommand("restore", "replace the snapshot from an LDIF backup");
    std::string restore_in;
    restore->add_option("in", restore_in, "input LDIF file")->required();

    auto* retry = cli.add_subcommand("retry-queue", "retry failed operations out of band");
    auto* audit = cli.add_subcommand("audit", "run the compliance checks");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return cli.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return cli.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        App app;
        if (config_path.empty()) {
            std::cerr << "usage error: --config (or DIRPLAN_CONFIG) is required\n";
            return 2;
        }
        app.cfg = config::load_config_file(config_path);

        if (!clock_text.empty()) {
            const std::optional<std::int64_t> fixed =
                timeutil::parse_iso8601_utc(clock_text);
            if (!fixed) {
                std::cerr << "usage error: bad --clock value " << clock_text << "\n";
                return 2;
            }
            app.now = *fixed;
        } else {
            app.now = static_cast<std::int64_t>(std::time(nullptr));
        }

        const bool mutating = init->parsed() || reg->parsed() || act->parsed() ||
                              pub->parsed() || del->parsed() || restore->parsed() ||
                              retry->parsed();
        std::optional<LockFile> lock;
        if (mutating) lock.emplace(app.cfg.snapshot_path);

        if (init->parsed()) return cmd_init(app, init_force);
        app.open(false);
        if (reg->parsed()) return cmd_register(app, reg_cert, reg_consent);
        if (act->parsed()) return cmd_activate(app, act_issuer, act_serial);
        if (pub->parsed()) return cmd_publish_crl(app, pub_crl, pub_dp);
        if (status->parsed())
            return cmd_status(app, status_issuer, status_serial, status_hash, status_alg);
        if (search->parsed()) return cmd_search(app, search_base, search_scope, search_filter);
        if (del->parsed()) return cmd_delete(app, del_dn, del_yes, del_unattended);
        if (crl_url->parsed()) return cmd_crl_url(app, crl_url_dp);
        if (backup->parsed()) return cmd_backup(app, backup_out);
        if (restore->parsed()) return cmd_restore(app, restore_in);
        if (retry->parsed()) return cmd_retry_queue(app);
        if (audit->parsed()) return cmd_audit(app);
        std::cerr << "usage error: no command\n";
        return 2;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const config::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
