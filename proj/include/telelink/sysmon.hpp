#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "telelink/core.hpp"
#include "telelink/recovery.hpp"
#include "telelink/units.hpp"

namespace telelink {

// Severity order: missing evidence (Stale) is worse than a warning but
// distinguishable from a confirmed failure.
enum class Severity : std::uint8_t { ok = 0, warn = 1, stale = 2, fail = 3 };
const char* severity_name(Severity s);

struct CheckOutcome {
    Severity severity = Severity::ok;
    std::string message;

    static CheckOutcome ok() { return {Severity::ok, ""}; }
    static CheckOutcome warn(std::string msg) { return {Severity::warn, std::move(msg)}; }
    static CheckOutcome fail(std::string msg) { return {Severity::fail, std::move(msg)}; }
};

struct StreamTelemetry {
    std::uint16_t stream_id = 0;
    std::string name;
    std::uint64_t emitted_msgs = 0;
    std::uint64_t delivered = 0;
    std::uint64_t duplicates = 0;
    std::uint64_t stale = 0;
    double loss_ratio = 0.0;
    std::optional<Micros> latency_p99_us;
    std::optional<Micros> last_delivery_age_us;  // absent before the first delivery
};

struct NodeTelemetry {
    std::string node_id;
    bool up = false;
    std::optional<Micros> heartbeat_age_us;  // absent while down
    std::uint64_t restart_count = 0;
};

struct DeviceTelemetry {
    std::string device_id;
    DevicePhase phase = DevicePhase::active;
};

struct LinkTelemetry {
    LinkId link = LinkId::band5;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    std::optional<Micros> last_delivery_age_us;
};

// Immutable evidence captured at one instant; checks are pure functions of it.
struct TelemetrySnapshot {
    Micros now_us = 0;
    std::vector<StreamTelemetry> streams;
    std::vector<NodeTelemetry> nodes;
    std::vector<DeviceTelemetry> devices;
    std::vector<LinkTelemetry> links;
    EStopState estop;

    const StreamTelemetry* stream(std::string_view name) const;
    const NodeTelemetry* node(std::string_view node_id) const;
    const DeviceTelemetry* device(std::string_view device_id) const;
    const LinkTelemetry* link(LinkId id) const;
};

using CheckPredicate = std::function<CheckOutcome(const TelemetrySnapshot&)>;

struct CheckDefinition {
    std::string check_id;
    std::string description;
    CheckPredicate predicate;
    Micros period_us = 1'000'000;
    std::uint32_t staleness_limit = 3;  // periods without evaluation before Stale
};

struct CheckResult {
    std::string check_id;
    Severity status = Severity::stale;
    std::string message;
    std::optional<Micros> evaluated_at_us;
};

struct StatusTable {
    std::vector<CheckResult> rows;
    Severity aggregate = Severity::ok;  // max severity over rows; empty table is ok
};

bool all_green(const StatusTable& table);

struct DuplicateCheckId {
    std::string check_id;
};

// Evaluates registered checks against snapshots fed by the driver, nominally
// at 1 Hz. A predicate that throws is captured as Fail on its own row and
// never takes the monitor down.
class Monitor {
public:
    std::optional<DuplicateCheckId> register_check(CheckDefinition def);

    // Evaluates every due check once against the snapshot and returns the
    // table as of snapshot.now_us. Ticking twice at the same instant does not
    // re-evaluate.
    StatusTable tick(const TelemetrySnapshot& snapshot);

    // Table without evaluation; checks whose last evaluation is older than
    // staleness_limit * period come out Stale.
    StatusTable status_table(Micros now_us) const;

    std::uint64_t evaluations(std::string_view check_id) const;
    std::uint64_t ok_evaluations(std::string_view check_id) const;
    std::optional<Micros> first_not_ok_at(std::string_view check_id) const;
    std::size_t check_count() const { return checks_.size(); }

private:
    struct Entry {
        CheckDefinition def;
        std::optional<Micros> last_eval_us;
        CheckOutcome last_outcome;
        std::uint64_t evals = 0;
        std::uint64_t ok_evals = 0;
        std::optional<Micros> first_not_ok_us;
    };

    const Entry* get(std::string_view check_id) const;
    CheckResult row_for(const Entry& e, Micros now_us) const;

    std::vector<Entry> checks_;
};

}  // namespace telelink
