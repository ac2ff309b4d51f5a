#include "dirplan/lifecycle.hpp"

#include <algorithm>
#include <cctype>
#include <ctime>

#include "dirplan/timeutil.hpp"

namespace dirplan::lifecycle {

namespace {

[[noreturn]] void fail(Errc code, const std::string& what) {
    throw Error(code, what);
}

std::string sanitize(std::string s) {
    for (char& c : s) {
        if (c == '|' || c == '\n' || c == '\r') c = '/';
    }
    return s;
}

std::string normalize_serial(const std::string& serial) {
    std::size_t start = 0;
    while (start + 1 < serial.size() && serial[start] == '0') ++start;
    return serial.substr(start);
}

std::string find_leaf_cn(const DistinguishedName& dn) {
    if (dn.empty()) return "";
    for (const auto& [type, value] : dn.rdns.front().pairs) {
        std::string key = type;
        std::transform(key.begin(), key.end(), key.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (key == "cn") return value;
    }
    return dn.rdns.front().pairs.front().second;
}

}  // namespace

std::string pub_state_name(PubState s) {
    switch (s) {
        case PubState::registered: return "registered";
        case PubState::activated: return "activated";
        case PubState::deleted: return "deleted";
    }
    return "?";
}

std::string status_answer_name(StatusAnswer a) {
    switch (a) {
        case StatusAnswer::good: return "good";
        case StatusAnswer::revoked: return "revoked";
        case StatusAnswer::unknown: return "unknown";
    }
    return "?";
}

std::string AuditEvent::line() const {
    return timeutil::iso8601_utc(timestamp) + "|" + sanitize(principal) + "|" +
           sanitize(event) + "|" + sanitize(target) + "|" + sanitize(outcome) + "|" +
           sanitize(detail);
}

bool ComplianceReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const ComplianceCheck& c) { return c.passed; });
}

std::string record_key(const DistinguishedName& issuer, const std::string& serial) {
    return dn_key(issuer) + "|" + normalize_serial(serial);
}

std::int64_t retention_deadline_for(const der::Asn1Time& not_after, bool accredited) {
    const timeutil::CivilTime expiry = timeutil::civil_from_epoch(not_after.instant);
    timeutil::CivilTime deadline;
    deadline.year = expiry.year + (accredited ? 30 : 5) + 1;
    deadline.month = 1;
    deadline.day = 1;
    return timeutil::epoch_from_civil(deadline);
}

Engine::Engine(core::Directory& directory, Options options)
    : directory_(directory), options_(std::move(options)) {
    if (!options_.clock) {
        options_.clock = [] { return static_cast<std::int64_t>(std::time(nullptr)); };
    }
    if (!options_.signature_verifier) {
        options_.signature_verifier = [](ByteView, std::string& why) {
            why = "structural checks only, no cryptographic verification";
            return true;
        };
    }
}

void Engine::audit(const std::string& principal, const std::string& event,
                   const std::string& target, const std::string& outcome,
                   const std::string& detail) const {
    if (!options_.audit_sink) return;
    AuditEvent e;
    e.timestamp = now();
    e.principal = principal;
    e.event = event;
    e.target = target;
    e.outcome = outcome;
    e.detail = detail;
    options_.audit_sink(e);
}

void Engine::verify_signature_or_throw(ByteView der_bytes, const std::string& what) {
    std::string why;
    if (!options_.signature_verifier(der_bytes, why)) {
        audit("engine", "signature_check", what, "rejected", why);
        fail(Errc::signature_rejected, "signature rejected for " + what + ": " + why);
    }
    if (!why.empty()) {
        audit("engine", "signature_check", what, "warning", why);
    }
}

PublicationRecord Engine::register_certificate(const x509::CertificateInfo& info,
                                               bool consent_to_publish, bool accredited) {
    std::lock_guard lock(mutex_);
    const std::string key = record_key(info.issuer, info.serial);
    if (state_.records.count(key)) {
        fail(Errc::duplicate_registration, "already registered: " + key);
    }
    verify_signature_or_throw(info.raw_der, "certificate " + key);

    PublicationRecord record;
    record.cert = info;
    record.state = PubState::registered;
    record.consent_to_publish = consent_to_publish;
    record.accredited = accredited;
    record.registered_at = now();
    record.retention_deadline = retention_deadline_for(info.not_after, accredited);

    StatusEntry status;
    status.hash_sha1 = info.hash_sha1;
    status.hash_sha256 = info.hash_sha256;
    status.activated = false;
    state_.status.known[key] = std::move(status);

    state_.records[key] = record;
    audit("engine", "register", format_dn(info.subject), "ok",
          "serial=" + info.serial + " consent=" + (consent_to_publish ? "yes" : "no") +
              " retention_until=" + timeutil::iso8601_utc(record.retention_deadline));
    return record;
}

DistinguishedName Engine::subentry_dn(const PublicationRecord& record) const {
    return plan::plan_cert_subentry(record.cert.subject, record.cert).dn();
}

void Engine::publish_subentry(PublicationRecord& record) {
    const DistinguishedName& owner = record.cert.subject;
    const std::size_t depth = owner.depth();
    // create missing path entries top-down, then the owner, then the subentry
    for (std::size_t i = 1; i <= depth; ++i) {
        DistinguishedName partial;
        partial.rdns.assign(owner.rdns.end() - static_cast<std::ptrdiff_t>(i),
                            owner.rdns.end());
        if (directory_.has_entry(partial)) continue;
        core::Entry entry;
        if (i == depth) {
            const std::string cn = find_leaf_cn(owner);
            entry = plan::plan_user_entry(cn, cn, partial.parent(),
                                          options_.user_plan_mode);
        } else {
            std::optional<core::Entry> planned = plan::plan_path_entry(partial);
            if (!planned) {
                throw core::DirError(core::DirErrc::no_such_parent,
                                     "no structural plan for " + format_dn(partial));
            }
            entry = std::move(*planned);
        }
        directory_.add_entry(options_.roles.cert_publisher, entry);
    }

    const core::Entry subentry = plan::plan_cert_subentry(owner, record.cert);
    try {
        directory_.add_entry(options_.roles.cert_publisher, subentry);
    } catch (const core::DirError& e) {
        if (e.code() != core::DirErrc::already_exists) throw;
    }
    record.directory_dn = subentry.dn();
}

void Engine::activate(const DistinguishedName& issuer, const std::string& serial) {
    std::lock_guard lock(mutex_);
    const std::string key = record_key(issuer, serial);
    auto it = state_.records.find(key);
    if (it == state_.records.end()) {
        fail(Errc::no_such_record, "not registered: " + key);
    }
    PublicationRecord& record = it->second;
    if (record.state != PubState::registered) {
        fail(Errc::already_activated,
             "record is " + pub_state_name(record.state) + ": " + key);
    }

    record.state = PubState::activated;
    record.activated_at = now();
    state_.status.known[key].activated = true;
    audit("engine", "activate", format_dn(record.cert.subject), "ok",
          "serial=" + record.cert.serial +
              " publish=" + (record.consent_to_publish ? "yes" : "no"));

    if (!record.consent_to_publish) return;
    try {
        publish_subentry(record);
        audit(options_.roles.cert_publisher, "publish_certificate",
              format_dn(*record.directory_dn), "ok", "serial=" + record.cert.serial);
    } catch (const core::DirError& e) {
        PendingOp op;
        op.kind = PendingOp::Kind::publish_subentry;
        op.record_key = key;
        handle_failure_locked("publish certificate subentry " + format_dn(subentry_dn(record)),
                              e.what(), std::move(op));
    }
}

StatusResult Engine::query_status(const DistinguishedName& issuer,
                                  const std::string& serial,
                                  const std::optional<x509::HashValue>& presented_hash) const {
    std::lock_guard lock(mutex_);
    const std::string key = record_key(issuer, serial);
    StatusResult result;
    auto it = state_.status.known.find(key);
    if (it == state_.status.known.end() || !it->second.activated) {
        result.answer = StatusAnswer::unknown;
        return result;  // unknown certificates yield no hash evidence
    }
    result.answer = state_.status.revoked.count(key) ? StatusAnswer::revoked
                                                     : StatusAnswer::good;
    if (presented_hash) {
        const Bytes& stored = presented_hash->algorithm == x509::HashAlg::sha1
                                  ? it->second.hash_sha1
                                  : it->second.hash_sha256;
        result.hash_match = stored == presented_hash->digest;
    }
    return result;
}

void Engine::publish_crl(ByteView crl_der, const DistinguishedName& dp_dn) {
    std::lock_guard lock(mutex_);
    x509::CrlInfo crl;
    try {
        crl = x509::parse_crl(crl_der);
    } catch (const x509::Error& e) {
        fail(Errc::malformed_crl, e.what());
    }
    verify_signature_or_throw(crl_der, "crl " + dn_key(crl.issuer));

    const bool is_delta = crl.delta_base_number.has_value();
    const std::string scope_key = dn_key(crl.issuer) + "|" + dn_key(dp_dn) + "|" +
                                  (is_delta ? "delta" : "complete");
    auto slot_it = state_.slots.find(scope_key);
    if (slot_it != state_.slots.end() &&
        crl.this_update.instant <= slot_it->second.current.this_update.instant) {
        audit(options_.roles.crl_publisher, "publish_crl", format_dn(dp_dn), "rejected",
              "stale thisUpdate " + crl.this_update.iso8601());
        fail(Errc::stale_crl,
             "thisUpdate " + crl.this_update.iso8601() + " not newer than published CRL");
    }

    const std::string attribute = is_delta ? "deltaRevocationList"
                                           : "certificateRevocationList";
    if (is_delta) {
        // the base must already sit on the DP entry and keep sitting there
        bool base_present = false;
        if (std::optional<core::Entry> dp = directory_.find_entry(dp_dn)) {
            if (const std::vector<std::string>* values =
                    dp->values("certificateRevocationList")) {
                for (const std::string& value : *values) {
                    try {
                        const x509::CrlInfo base = x509::parse_crl(to_bytes(value));
                        if (base.crl_number &&
                            *base.crl_number == *crl.delta_base_number) {
                            base_present = true;
                            break;
                        }
                    } catch (const x509::Error&) {
                        // ignore unparseable directory content here; the
                        // compliance audit reports it
                    }
                }
            }
        }
        if (!base_present) {
            audit(options_.roles.crl_publisher, "publish_crl", format_dn(dp_dn),
                  "rejected",
                  "base CRL number " + std::to_string(*crl.delta_base_number) +
                      " not in directory");
            fail(Errc::missing_base_crl,
                 "base CRL " + std::to_string(*crl.delta_base_number) +
                     " missing on " + format_dn(dp_dn));
        }
    }

    // Revocation knowledge lands in the status store before the directory
    // write; a failed write is retried out of band.
    for (const x509::RevokedEntry& entry : crl.revoked) {
        const DistinguishedName& issuer =
            entry.certificate_issuer ? *entry.certificate_issuer : crl.issuer;
        const std::string key = record_key(issuer, entry.serial);
        state_.status.revoked.emplace(key, entry.revocation_date.instant);
    }

    CrlSlot& slot = state_.slots[scope_key];
    if (!slot.scope_key.empty()) {
        slot.history.push_back({slot.current.this_update.instant,
                                slot.current.crl_number,
                                slot.current.delta_base_number.has_value()});
    }
    slot.scope_key = scope_key;
    slot.current = crl;

    std::vector<core::Change> changes;
    changes.push_back({core::Change::Op::replace_values, attribute,
                       {to_string(crl_der)}});
    try {
        directory_.modify_entry(options_.roles.crl_publisher, dp_dn, changes);
        audit(options_.roles.crl_publisher, "publish_crl", format_dn(dp_dn), "ok",
              x509::crl_class_name(x509::classify_crl(crl)) + " thisUpdate=" +
                  crl.this_update.iso8601());
    } catch (const core::DirError& e) {
        PendingOp op;
        op.kind = PendingOp::Kind::directory_modify;
        op.record_key = scope_key;
        op.principal = options_.roles.crl_publisher;
        op.target_dn = dp_dn;
        op.changes = changes;
        handle_failure_locked("publish " + attribute + " on " + format_dn(dp_dn),
                              e.what(), std::move(op));
        fail(Errc::directory_error, e.what());
    }
}

DeleteTicket Engine::request_delete(const std::string& principal,
                                    const DistinguishedName& target_dn) {
    std::lock_guard lock(mutex_);
    std::vector<core::Entry> found;
    try {
        found = directory_.search(target_dn, core::SearchScope::base,
                                  "(objectClass=*)", principal);
    } catch (const core::DirError&) {
        fail(Errc::no_such_entry, "no such entry: " + format_dn(target_dn));
    }
    if (found.empty()) {
        fail(Errc::no_such_entry, "no such entry: " + format_dn(target_dn));
    }
    const std::vector<std::string>* certs = found.front().values("userCertificate");
    if (!certs || certs->empty()) {
        fail(Errc::not_a_certificate_entry,
             "entry holds no certificate: " + format_dn(target_dn));
    }

    DeleteTicket ticket;
    ticket.ticket_id = "T" + std::to_string(state_.next_ticket++);
    ticket.target_dn = target_dn;
    ticket.fetched_certificate = certs->front();
    ticket.issued_at = now();
    state_.tickets[ticket.ticket_id] = ticket;
    audit(principal, "request_delete", format_dn(target_dn), "ok",
          "ticket=" + ticket.ticket_id);
    return ticket;
}

void Engine::confirm_delete(const std::string& ticket_id, bool acknowledged) {
    std::lock_guard lock(mutex_);
    auto it = state_.tickets.find(ticket_id);
    if (it == state_.tickets.end() || it->second.confirmed) {
        fail(Errc::no_such_ticket, "no unconfirmed ticket " + ticket_id);
    }
    DeleteTicket& ticket = it->second;
    const std::string dn_text = format_dn(ticket.target_dn);
    if (!acknowledged) {
        audit(options_.roles.admin, "confirm_delete", dn_text, "refused",
              "ticket=" + ticket_id);
        fail(Errc::not_acknowledged, "delete not acknowledged for " + dn_text);
    }

    std::optional<core::Entry> entry = directory_.find_entry(ticket.target_dn);
    if (!entry) fail(Errc::no_such_entry, "no such entry: " + dn_text);
    const std::vector<std::string>* certs = entry->values("userCertificate");
    if (!certs || certs->empty() || certs->front() != ticket.fetched_certificate) {
        fail(Errc::entry_changed_since_fetch,
             "certificate changed since ticket was issued: " + dn_text);
    }

    // retention clock: find the record owning these bytes
    const PublicationRecord* matching = nullptr;
    std::string matching_key;
    for (const auto& [key, record] : state_.records) {
        if (to_string(record.cert.raw_der) == ticket.fetched_certificate) {
            matching = &record;
            matching_key = key;
            break;
        }
    }
    if (!matching) {
        fail(Errc::retention_not_expired,
             "no publication record for the fetched certificate; retention unknown");
    }
    if (now() < matching->retention_deadline) {
        audit(options_.roles.admin, "confirm_delete", dn_text, "rejected",
              "retention until " + timeutil::iso8601_utc(matching->retention_deadline));
        fail(Errc::retention_not_expired,
             "retention runs until " +
                 timeutil::iso8601_utc(matching->retention_deadline));
    }

    try {
        directory_.delete_entry(options_.roles.admin, ticket.target_dn);
    } catch (const core::DirError& e) {
        PendingOp op;
        op.kind = PendingOp::Kind::directory_delete;
        op.principal = options_.roles.admin;
        op.target_dn = ticket.target_dn;
        op.record_key = matching_key;
        ticket.confirmed = true;  // acknowledged; completion is queued
        handle_failure_locked("delete " + dn_text, e.what(), std::move(op));
        fail(Errc::directory_error, e.what());
    }
    ticket.confirmed = true;
    state_.confirmed_delete_dns.push_back(dn_key(ticket.target_dn));
    state_.records[matching_key].state = PubState::deleted;
    audit(options_.roles.admin, "confirm_delete", dn_text, "ok",
          "ticket=" + ticket_id);
}

OutOfBandItem Engine::handle_failure(const std::string& description,
                                     const std::string& error_text, PendingOp op) {
    std::lock_guard lock(mutex_);
    return handle_failure_locked(description, error_text, std::move(op));
}

OutOfBandItem Engine::handle_failure_locked(const std::string& description,
                                            const std::string& error_text,
                                            PendingOp op) {
    OutOfBandItem item;
    item.description = description;
    item.error_text = error_text;
    item.enqueued_at = now();
    item.attempts = 0;
    item.op = std::move(op);
    state_.queue.push_back(item);
    audit("engine", "failure", description, "queued", error_text);
    if (options_.notifier) {
        options_.notifier("operation failed: " + description + " (" + error_text +
                          "); queued for out-of-band retry");
    }
    return item;
}

void Engine::replay(const PendingOp& op) {
    switch (op.kind) {
        case PendingOp::Kind::publish_subentry: {
            auto it = state_.records.find(op.record_key);
            if (it == state_.records.end() || it->second.state != PubState::activated ||
                !it->second.consent_to_publish) {
                return;  // nothing left to publish
            }
            publish_subentry(it->second);
            return;
        }
        case PendingOp::Kind::directory_modify: {
            // a queued CRL write must not roll back a newer list that made
            // it to the directory in the meantime
            if (!op.record_key.empty()) {
                auto slot = state_.slots.find(op.record_key);
                if (slot != state_.slots.end() && op.changes.size() == 1 &&
                    op.changes[0].values.size() == 1) {
                    try {
                        const x509::CrlInfo queued =
                            x509::parse_crl(to_bytes(op.changes[0].values[0]));
                        if (queued.this_update.instant <
                            slot->second.current.this_update.instant) {
                            return;  // superseded, nothing to publish
                        }
                    } catch (const x509::Error&) {
                    }
                }
            }
            directory_.modify_entry(op.principal, op.target_dn, op.changes);
            return;
        }
        case PendingOp::Kind::directory_delete:
            directory_.delete_entry(op.principal, op.target_dn);
            state_.confirmed_delete_dns.push_back(dn_key(op.target_dn));
            if (auto it = state_.records.find(op.record_key); it != state_.records.end()) {
                it->second.state = PubState::deleted;
            }
            return;
    }
}

std::vector<RetryResult> Engine::retry_out_of_band() {
    std::lock_guard lock(mutex_);
    std::vector<RetryResult> results;
    std::deque<OutOfBandItem> pending;
    std::swap(pending, state_.queue);
    for (OutOfBandItem& item : pending) {
        RetryResult result;
        result.description = item.description;
        try {
            replay(item.op);
            result.ok = true;
            audit("engine", "retry", item.description, "ok",
                  "attempts=" + std::to_string(item.attempts + 1));
        } catch (const core::DirError& e) {
            result.ok = false;
            result.error_text = e.what();
            item.attempts += 1;
            item.error_text = e.what();
            state_.queue.push_back(item);
            audit("engine", "retry", item.description, "failed", e.what());
        }
        results.push_back(std::move(result));
    }
    return results;
}

ComplianceReport Engine::audit_compliance() const {
    std::lock_guard lock(mutex_);
    ComplianceReport report;

    const std::vector<std::string> engine_principals = {
        options_.roles.cert_publisher, options_.roles.crl_publisher,
        options_.roles.admin};
    auto is_engine_principal = [&](const std::string& p) {
        return std::find(engine_principals.begin(), engine_principals.end(), p) !=
               engine_principals.end();
    };

    // (a) add-only: no unticketed deletes, no certificate-modifying modifies
    {
        ComplianceCheck check;
        check.name = "add-only operation log";
        check.passed = true;
        for (const core::OperationRecord& record : directory_.operation_log()) {
            if (record.outcome != core::OpOutcome::ok) continue;
            if (!is_engine_principal(record.principal)) continue;
            if (record.kind == core::OpKind::del) {
                std::string key;
                try {
                    key = dn_key(parse_dn(record.target_dn));
                } catch (const DnError&) {
                    key = record.target_dn;
                }
                if (std::find(state_.confirmed_delete_dns.begin(),
                              state_.confirmed_delete_dns.end(),
                              key) == state_.confirmed_delete_dns.end()) {
                    check.passed = false;
                    check.detail = "unticketed delete of " + record.target_dn;
                    break;
                }
            }
            if (record.kind == core::OpKind::modify) {
                for (const std::string& attr : record.attributes_touched) {
                    if (core::attribute_key(attr) == "usercertificate") {
                        check.passed = false;
                        check.detail = "modify touched userCertificate on " +
                                       record.target_dn;
                        break;
                    }
                }
            }
            if (!check.passed) break;
        }
        if (check.passed) check.detail = "no forbidden delete/modify operations";
        report.checks.push_back(std::move(check));
    }

    // (b) every delta CRL in the tree has its base beside it
    {
        ComplianceCheck check;
        check.name = "delta CRLs have bases";
        check.passed = true;
        for (const core::Entry& entry : directory_.all_entries()) {
            const std::vector<std::string>* deltas = entry.values("deltaRevocationList");
            if (!deltas) continue;
            for (const std::string& value : *deltas) {
                std::optional<std::uint64_t> base_number;
                try {
                    base_number = x509::parse_crl(to_bytes(value)).delta_base_number;
                } catch (const x509::Error&) {
                    check.passed = false;
                    check.detail = "unparseable delta CRL on " + format_dn(entry.dn());
                    break;
                }
                if (!base_number) continue;
                bool base_present = false;
                if (const std::vector<std::string>* bases =
                        entry.values("certificateRevocationList")) {
                    for (const std::string& base_value : *bases) {
                        try {
                            const x509::CrlInfo base = x509::parse_crl(to_bytes(base_value));
                            if (base.crl_number && *base.crl_number == *base_number) {
                                base_present = true;
                                break;
                            }
                        } catch (const x509::Error&) {
                        }
                    }
                }
                if (!base_present) {
                    check.passed = false;
                    check.detail = "base CRL " + std::to_string(*base_number) +
                                   " missing on " + format_dn(entry.dn());
                    break;
                }
            }
            if (!check.passed) break;
        }
        if (check.passed) check.detail = "all delta CRLs have their base present";
        report.checks.push_back(std::move(check));
    }

    // (c) activated-with-consent records are published or pending
    {
        ComplianceCheck check;
        check.name = "consented activations published";
        check.passed = true;
        std::size_t pending_count = 0;
        for (const auto& [key, record] : state_.records) {
            if (record.state != PubState::activated || !record.consent_to_publish) {
                continue;
            }
            const DistinguishedName dn = subentry_dn(record);
            if (directory_.has_entry(dn)) continue;
            const bool queued = std::any_of(
                state_.queue.begin(), state_.queue.end(), [&](const OutOfBandItem& item) {
                    return item.op.kind == PendingOp::Kind::publish_subentry &&
                           item.op.record_key == key;
                });
            if (queued) {
                ++pending_count;
                continue;
            }
            check.passed = false;
            check.detail = "subentry missing and not queued for " + format_dn(dn);
            break;
        }
        if (check.passed) {
            check.detail = pending_count == 0
                               ? "all consented activations are published"
                               : "pending: " + std::to_string(pending_count) +
                                     " publication(s) queued for retry";
        }
        report.checks.push_back(std::move(check));
    }

    // (d) per-scope CRL thisUpdate never went backwards
    {
        ComplianceCheck check;
        check.name = "CRL monotonicity";
        check.passed = true;
        for (const auto& [scope, slot] : state_.slots) {
            std::int64_t last = 0;
            bool first = true;
            for (const CrlHistoryItem& item : slot.history) {
                if (!first && item.this_update < last) {
                    check.passed = false;
                    check.detail = "scope " + scope + " regressed";
                    break;
                }
                last = item.this_update;
                first = false;
            }
            if (!first && slot.current.this_update.instant < last) {
                check.passed = false;
                check.detail = "scope " + scope + " regressed";
            }
            if (!check.passed) break;
        }
        if (check.passed) check.detail = "per-scope thisUpdate is non-decreasing";
        report.checks.push_back(std::move(check));
    }

    return report;
}

std::optional<PublicationRecord> Engine::find_record(const DistinguishedName& issuer,
                                                     const std::string& serial) const {
    std::lock_guard lock(mutex_);
    auto it = state_.records.find(record_key(issuer, serial));
    if (it == state_.records.end()) return std::nullopt;
    return it->second;
}

EngineState Engine::snapshot_state() const {
    std::lock_guard lock(mutex_);
    return state_;
}

void Engine::restore_state(EngineState state) {
    std::lock_guard lock(mutex_);
    state_ = std::move(state);
}

}  // namespace dirplan::lifecycle
