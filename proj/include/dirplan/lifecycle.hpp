#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dirplan/directory.hpp"
#include "dirplan/dn.hpp"
#include "dirplan/plan.hpp"
#include "dirplan/x509.hpp"

// The signature-law publication engine: registration, activation gating,
// conditional directory publication, unconditional status knowledge, CRL
// publication with delta/base and anti-replay rules, retention clocks,
// monitored deletes, failure notification with out-of-band retry, and
// compliance auditing. The engine only ever issues add requests for
// certificates; deletes happen solely through acknowledged tickets.
namespace dirplan::lifecycle {

enum class Errc {
    duplicate_registration,
    no_such_record,
    already_activated,
    malformed_crl,
    stale_crl,
    missing_base_crl,
    no_such_entry,
    not_a_certificate_entry,
    no_such_ticket,
    not_acknowledged,
    retention_not_expired,
    entry_changed_since_fetch,
    signature_rejected,
    directory_error,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

enum class PubState { registered, activated, deleted };

std::string pub_state_name(PubState s);

struct PublicationRecord {
    x509::CertificateInfo cert;
    PubState state = PubState::registered;
    bool consent_to_publish = false;
    bool accredited = false;
    std::int64_t registered_at = 0;
    std::optional<std::int64_t> activated_at;
    std::int64_t retention_deadline = 0;  // earliest deletion instant
    std::optional<DistinguishedName> directory_dn;
};

struct StatusEntry {
    Bytes hash_sha1;
    Bytes hash_sha256;
    bool activated = false;
};

// Revocations may name certificates this store never saw (indirect CRLs);
// such queries still answer unknown.
struct StatusStore {
    std::map<std::string, StatusEntry> known;        // key: issuer|serial
    std::map<std::string, std::int64_t> revoked;     // key -> revocation date
};

enum class StatusAnswer { good, revoked, unknown };

std::string status_answer_name(StatusAnswer a);

struct StatusResult {
    StatusAnswer answer = StatusAnswer::unknown;
    std::optional<bool> hash_match;
};

struct CrlHistoryItem {
    std::int64_t this_update = 0;
    std::optional<std::uint64_t> crl_number;
    bool is_delta = false;
};

struct CrlSlot {
    std::string scope_key;  // issuer | dp | completeness
    x509::CrlInfo current;
    std::vector<CrlHistoryItem> history;  // superseded, publication order
};

struct DeleteTicket {
    std::string ticket_id;
    DistinguishedName target_dn;
    std::string fetched_certificate;  // raw DER bytes for display
    std::int64_t issued_at = 0;
    bool confirmed = false;
};

// Replayable description of a failed directory operation. publish_subentry
// re-derives the full plan from the publication record so a retry also
// recreates missing path entries.
struct PendingOp {
    enum class Kind { publish_subentry, directory_modify, directory_delete };

    Kind kind = Kind::publish_subentry;
    std::string record_key;  // publish_subentry / directory_delete
    std::string principal;   // directory_modify / directory_delete
    DistinguishedName target_dn;
    std::vector<core::Change> changes;  // directory_modify
};

struct OutOfBandItem {
    std::string description;
    std::string error_text;
    std::int64_t enqueued_at = 0;
    int attempts = 0;
    PendingOp op;
};

struct RetryResult {
    std::string description;
    bool ok = false;
    std::string error_text;
};

struct AuditEvent {
    std::int64_t timestamp = 0;
    std::string principal;
    std::string event;
    std::string target;  // dn or scope
    std::string outcome;
    std::string detail;

    // <ISO-8601 UTC>|<principal>|<event>|<dn or scope>|<outcome>|<detail>
    std::string line() const;
};

struct ComplianceCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ComplianceReport {
    std::vector<ComplianceCheck> checks;

    bool all_passed() const;
};

struct Roles {
    std::string cert_publisher = "cert-publisher";
    std::string crl_publisher = "crl-publisher";
    std::string admin = "admin";
};

// Everything an engine needs to resume after a restart.
struct EngineState {
    std::map<std::string, PublicationRecord> records;
    StatusStore status;
    std::map<std::string, CrlSlot> slots;
    std::map<std::string, DeleteTicket> tickets;
    std::deque<OutOfBandItem> queue;
    std::uint64_t next_ticket = 1;
    std::vector<std::string> confirmed_delete_dns;  // dn keys removed via tickets
};

struct Options {
    std::function<std::int64_t()> clock;                  // defaults to wall clock
    std::function<void(const AuditEvent&)> audit_sink;    // optional
    std::function<void(const std::string&)> notifier;     // failure notifications
    // Returns false to reject; default accepts structurally and logs a
    // warning that no cryptographic check ran.
    std::function<bool(ByteView, std::string&)> signature_verifier;
    Roles roles;
    plan::UserPlanMode user_plan_mode = plan::UserPlanMode::pki_only;
};

std::string record_key(const DistinguishedName& issuer, const std::string& serial);

class Engine {
public:
    Engine(core::Directory& directory, Options options);

    // Nothing is written to the directory; the status store learns the
    // hashes but still answers unknown until activation.
    PublicationRecord register_certificate(const x509::CertificateInfo& info,
                                           bool consent_to_publish, bool accredited);

    // Marks the certificate good in the status store; with consent, adds
    // the certificate subentry (add requests only). Directory failures are
    // queued; activation itself still succeeds.
    void activate(const DistinguishedName& issuer, const std::string& serial);

    StatusResult query_status(const DistinguishedName& issuer, const std::string& serial,
                              const std::optional<x509::HashValue>& presented_hash =
                                  std::nullopt) const;

    // Complete CRLs replace certificateRevocationList on the DP entry;
    // deltas require their base in the directory and replace
    // deltaRevocationList. Older-or-equal thisUpdate per scope is rejected.
    void publish_crl(ByteView crl_der, const DistinguishedName& dp_dn);

    DeleteTicket request_delete(const std::string& principal,
                                const DistinguishedName& target_dn);
    void confirm_delete(const std::string& ticket_id, bool acknowledged);

    OutOfBandItem handle_failure(const std::string& description,
                                 const std::string& error_text, PendingOp op);
    std::vector<RetryResult> retry_out_of_band();

    ComplianceReport audit_compliance() const;

    // state access
    std::optional<PublicationRecord> find_record(const DistinguishedName& issuer,
                                                 const std::string& serial) const;
    const std::map<std::string, PublicationRecord>& records() const { return state_.records; }
    const StatusStore& status_store() const { return state_.status; }
    const std::map<std::string, CrlSlot>& crl_slots() const { return state_.slots; }
    const std::map<std::string, DeleteTicket>& tickets() const { return state_.tickets; }
    const std::deque<OutOfBandItem>& pending_queue() const { return state_.queue; }

    EngineState snapshot_state() const;
    void restore_state(EngineState state);

    core::Directory& directory() { return directory_; }
    const Roles& roles() const { return options_.roles; }

private:
    std::int64_t now() const { return options_.clock(); }
    void audit(const std::string& principal, const std::string& event,
               const std::string& target, const std::string& outcome,
               const std::string& detail) const;
    void verify_signature_or_throw(ByteView der, const std::string& what);
    void publish_subentry(PublicationRecord& record);
    OutOfBandItem handle_failure_locked(const std::string& description,
                                        const std::string& error_text, PendingOp op);
    void replay(const PendingOp& op);
    DistinguishedName subentry_dn(const PublicationRecord& record) const;

    core::Directory& directory_;
    Options options_;
    mutable std::mutex mutex_;
    EngineState state_;
};

// Retention: "N years after the expiration year" reads as the first instant
// of year(not_after) + N + 1; N is 30 for accredited providers, 5 otherwise.
std::int64_t retention_deadline_for(const der::Asn1Time& not_after, bool accredited);

}  // namespace dirplan::lifecycle
