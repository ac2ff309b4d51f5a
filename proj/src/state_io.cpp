#include "dirplan/state_io.hpp"

#include <json.hpp>

#include "dirplan/bytes.hpp"

namespace dirplan::state_io {

namespace {

using nlohmann::json;

json dn_to_json(const DistinguishedName& dn) { return format_dn(dn); }

DistinguishedName dn_from_json(const json& j) {
    return parse_dn(j.get<std::string>());
}

json changes_to_json(const std::vector<core::Change>& changes) {
    json out = json::array();
    for (const core::Change& c : changes) {
        json values = json::array();
        for (const std::string& v : c.values) values.push_back(base64_encode(to_bytes(v)));
        out.push_back({{"op", static_cast<int>(c.op)},
                       {"attribute", c.attribute},
                       {"values", values}});
    }
    return out;
}

std::vector<core::Change> changes_from_json(const json& j) {
    std::vector<core::Change> out;
    for (const json& c : j) {
        core::Change change;
        change.op = static_cast<core::Change::Op>(c.at("op").get<int>());
        change.attribute = c.at("attribute").get<std::string>();
        for (const json& v : c.at("values")) {
            change.values.push_back(to_string(base64_decode(v.get<std::string>())));
        }
        out.push_back(std::move(change));
    }
    return out;
}

json record_to_json(const lifecycle::PublicationRecord& r) {
    json out = {
        {"cert_der", base64_encode(r.cert.raw_der)},
        {"state", lifecycle::pub_state_name(r.state)},
        {"consent", r.consent_to_publish},
        {"accredited", r.accredited},
        {"registered_at", r.registered_at},
        {"retention_deadline", r.retention_deadline},
    };
    if (r.activated_at) out["activated_at"] = *r.activated_at;
    if (r.directory_dn) out["directory_dn"] = dn_to_json(*r.directory_dn);
    return out;
}

lifecycle::PublicationRecord record_from_json(const json& j) {
    lifecycle::PublicationRecord r;
    r.cert = x509::parse_certificate(base64_decode(j.at("cert_der").get<std::string>()));
    const std::string state = j.at("state").get<std::string>();
    r.state = state == "activated" ? lifecycle::PubState::activated
              : state == "deleted" ? lifecycle::PubState::deleted
                                   : lifecycle::PubState::registered;
    r.consent_to_publish = j.at("consent").get<bool>();
    r.accredited = j.at("accredited").get<bool>();
    r.registered_at = j.at("registered_at").get<std::int64_t>();
    r.retention_deadline = j.at("retention_deadline").get<std::int64_t>();
    if (j.contains("activated_at")) r.activated_at = j.at("activated_at").get<std::int64_t>();
    if (j.contains("directory_dn")) r.directory_dn = dn_from_json(j.at("directory_dn"));
    return r;
}

json op_to_json(const lifecycle::PendingOp& op) {
    return {{"kind", static_cast<int>(op.kind)},
            {"record_key", op.record_key},
            {"principal", op.principal},
            {"target_dn", op.target_dn.empty() ? json() : dn_to_json(op.target_dn)},
            {"changes", changes_to_json(op.changes)}};
}

lifecycle::PendingOp op_from_json(const json& j) {
    lifecycle::PendingOp op;
    op.kind = static_cast<lifecycle::PendingOp::Kind>(j.at("kind").get<int>());
    op.record_key = j.at("record_key").get<std::string>();
    op.principal = j.at("principal").get<std::string>();
    if (!j.at("target_dn").is_null()) op.target_dn = dn_from_json(j.at("target_dn"));
    op.changes = changes_from_json(j.at("changes"));
    return op;
}

}  // namespace

std::string save_engine_state(const lifecycle::EngineState& state) {
    json records = json::object();
    for (const auto& [key, record] : state.records) {
        records[key] = record_to_json(record);
    }

    json known = json::object();
    for (const auto& [key, entry] : state.status.known) {
        known[key] = {{"sha1", hex_encode(entry.hash_sha1)},
                      {"sha256", hex_encode(entry.hash_sha256)},
                      {"activated", entry.activated}};
    }
    json revoked = json::object();
    for (const auto& [key, when] : state.status.revoked) revoked[key] = when;

    json slots = json::object();
    for (const auto& [key, slot] : state.slots) {
        json history = json::array();
        for (const lifecycle::CrlHistoryItem& item : slot.history) {
            json h = {{"this_update", item.this_update}, {"is_delta", item.is_delta}};
            if (item.crl_number) h["crl_number"] = *item.crl_number;
            history.push_back(std::move(h));
        }
        slots[key] = {{"current_der", base64_encode(slot.current.raw_der)},
                      {"history", history}};
    }

    json tickets = json::object();
    for (const auto& [id, ticket] : state.tickets) {
        tickets[id] = {{"target_dn", dn_to_json(ticket.target_dn)},
                       {"certificate", base64_encode(to_bytes(ticket.fetched_certificate))},
                       {"issued_at", ticket.issued_at},
                       {"confirmed", ticket.confirmed}};
    }

    json queue = json::array();
    for (const lifecycle::OutOfBandItem& item : state.queue) {
        queue.push_back({{"description", item.description},
                         {"error_text", item.error_text},
                         {"enqueued_at", item.enqueued_at},
                         {"attempts", item.attempts},
                         {"op", op_to_json(item.op)}});
    }

    const json out = {
        {"records", records},
        {"status", {{"known", known}, {"revoked", revoked}}},
        {"slots", slots},
        {"tickets", tickets},
        {"queue", queue},
        {"next_ticket", state.next_ticket},
        {"confirmed_delete_dns", state.confirmed_delete_dns},
    };
    return out.dump(2) + "\n";
}

lifecycle::EngineState load_engine_state(const std::string& text) {
    const json j = json::parse(text);
    lifecycle::EngineState state;

    for (const auto& [key, value] : j.at("records").items()) {
        state.records[key] = record_from_json(value);
    }
    for (const auto& [key, value] : j.at("status").at("known").items()) {
        lifecycle::StatusEntry entry;
        entry.hash_sha1 = hex_decode(value.at("sha1").get<std::string>());
        entry.hash_sha256 = hex_decode(value.at("sha256").get<std::string>());
        entry.activated = value.at("activated").get<bool>();
        state.status.known[key] = std::move(entry);
    }
    for (const auto& [key, value] : j.at("status").at("revoked").items()) {
        state.status.revoked[key] = value.get<std::int64_t>();
    }
    for (const auto& [key, value] : j.at("slots").items()) {
        lifecycle::CrlSlot slot;
        slot.scope_key = key;
        slot.current = x509::parse_crl(base64_decode(value.at("current_der").get<std::string>()));
        for (const json& h : value.at("history")) {
            lifecycle::CrlHistoryItem item;
            item.this_update = h.at("this_update").get<std::int64_t>();
            item.is_delta = h.at("is_delta").get<bool>();
            if (h.contains("crl_number")) item.crl_number = h.at("crl_number").get<std::uint64_t>();
            slot.history.push_back(item);
        }
        state.slots[key] = std::move(slot);
    }
    for (const auto& [id, value] : j.at("tickets").items()) {
        lifecycle::DeleteTicket ticket;
        ticket.ticket_id = id;
        ticket.target_dn = dn_from_json(value.at("target_dn"));
        ticket.fetched_certificate =
            to_string(base64_decode(value.at("certificate").get<std::string>()));
        ticket.issued_at = value.at("issued_at").get<std::int64_t>();
        ticket.confirmed = value.at("confirmed").get<bool>();
        state.tickets[id] = std::move(ticket);
    }
    for (const json& item_json : j.at("queue")) {
        lifecycle::OutOfBandItem item;
        item.description = item_json.at("description").get<std::string>();
        item.error_text = item_json.at("error_text").get<std::string>();
        item.enqueued_at = item_json.at("enqueued_at").get<std::int64_t>();
        item.attempts = item_json.at("attempts").get<int>();
        item.op = op_from_json(item_json.at("op"));
        state.queue.push_back(std::move(item));
    }
    state.next_ticket = j.at("next_ticket").get<std::uint64_t>();
    state.confirmed_delete_dns =
        j.at("confirmed_delete_dns").get<std::vector<std::string>>();
    return state;
}

}  // namespace dirplan::state_io
