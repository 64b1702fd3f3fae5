#include "telelink/sysmon.hpp"

#include <algorithm>
#include <exception>

namespace telelink {

const char* severity_name(Severity s) {
    switch (s) {
        case Severity::ok: return "ok";
        case Severity::warn: return "warn";
        case Severity::stale: return "stale";
        case Severity::fail: return "fail";
    }
    return "?";
}

const StreamTelemetry* TelemetrySnapshot::stream(std::string_view name) const {
    for (const auto& s : streams) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

const NodeTelemetry* TelemetrySnapshot::node(std::string_view node_id) const {
    for (const auto& n : nodes) {
        if (n.node_id == node_id) return &n;
    }
    return nullptr;
}

const DeviceTelemetry* TelemetrySnapshot::device(std::string_view device_id) const {
    for (const auto& d : devices) {
        if (d.device_id == device_id) return &d;
    }
    return nullptr;
}

const LinkTelemetry* TelemetrySnapshot::link(LinkId id) const {
    for (const auto& l : links) {
        if (l.link == id) return &l;
    }
    return nullptr;
}

bool all_green(const StatusTable& table) { return table.aggregate == Severity::ok; }

std::optional<DuplicateCheckId> Monitor::register_check(CheckDefinition def) {
    if (get(def.check_id) != nullptr) return DuplicateCheckId{def.check_id};
    checks_.push_back({std::move(def), std::nullopt, CheckOutcome::ok(), 0, 0, std::nullopt});
    return std::nullopt;
}

const Monitor::Entry* Monitor::get(std::string_view check_id) const {
    for (const auto& e : checks_) {
        if (e.def.check_id == check_id) return &e;
    }
    return nullptr;
}

CheckResult Monitor::row_for(const Entry& e, Micros now_us) const {
    CheckResult row;
    row.check_id = e.def.check_id;
    row.evaluated_at_us = e.last_eval_us;
    if (!e.last_eval_us) {
        row.status = Severity::stale;
        row.message = "never evaluated";
        return row;
    }
    const Micros limit = static_cast<Micros>(e.def.staleness_limit) * e.def.period_us;
    if (now_us > *e.last_eval_us + limit) {
        row.status = Severity::stale;
        row.message = "no evaluation for " + std::to_string(now_us - *e.last_eval_us) + " us";
        return row;
    }
    row.status = e.last_outcome.severity;
    row.message = e.last_outcome.message;
    return row;
}

StatusTable Monitor::tick(const TelemetrySnapshot& snapshot) {
    for (auto& e : checks_) {
        const bool due =
            !e.last_eval_us || snapshot.now_us >= *e.last_eval_us + e.def.period_us;
        if (!due) continue;

        CheckOutcome outcome;
        try {
            outcome = e.def.predicate(snapshot);
        } catch (const std::exception& ex) {
            outcome = CheckOutcome::fail(std::string("predicate threw: ") + ex.what());
        } catch (...) {
            outcome = CheckOutcome::fail("predicate threw");
        }
        e.last_eval_us = snapshot.now_us;
        e.last_outcome = outcome;
        e.evals += 1;
        if (outcome.severity == Severity::ok) {
            e.ok_evals += 1;
        } else if (!e.first_not_ok_us) {
            e.first_not_ok_us = snapshot.now_us;
        }
    }
    return status_table(snapshot.now_us);
}

StatusTable Monitor::status_table(Micros now_us) const {
    StatusTable table;
    table.rows.reserve(checks_.size());
    for (const auto& e : checks_) {
        table.rows.push_back(row_for(e, now_us));
        table.aggregate = std::max(table.aggregate, table.rows.back().status);
    }
    return table;
}

std::uint64_t Monitor::evaluations(std::string_view check_id) const {
    const Entry* e = get(check_id);
    return e == nullptr ? 0 : e->evals;
}

std::uint64_t Monitor::ok_evaluations(std::string_view check_id) const {
    const Entry* e = get(check_id);
    return e == nullptr ? 0 : e->ok_evals;
}

std::optional<Micros> Monitor::first_not_ok_at(std::string_view check_id) const {
    const Entry* e = get(check_id);
    return e == nullptr ? std::nullopt : e->first_not_ok_us;
}

}  // namespace telelink
