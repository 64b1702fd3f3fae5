#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "telelink/core.hpp"
#include "telelink/sysmon.hpp"
#include "telelink/units.hpp"

namespace telelink {

// Machine-readable record of one simulated run. Serialization is fully
// deterministic: fixed key order, integers for counts and microseconds,
// ratios formatted to six decimal places.
struct RunReport {
    struct StreamReport {
        std::uint16_t stream_id = 0;
        std::string name;
        Direction direction = Direction::downlink;
        std::uint64_t emitted_msgs = 0;
        std::uint64_t emitted_copies = 0;
        std::uint64_t delivered = 0;
        std::uint64_t duplicates = 0;
        std::uint64_t stale = 0;
        std::uint64_t lost = 0;  // emitted_msgs - delivered
        double loss_ratio = 0.0;
        std::optional<Micros> p50_us, p95_us, p99_us;
    };

    struct LinkReport {
        Direction direction = Direction::downlink;
        LinkId link = LinkId::band5;
        std::uint64_t injected = 0;
        std::uint64_t delivered = 0;
        std::uint64_t delivered_bytes = 0;
        std::uint64_t loss_dropped = 0;
        std::uint64_t saturation_dropped = 0;
        std::uint64_t blackout_dropped = 0;
    };

    struct CheckReport {
        std::string check_id;
        std::uint64_t evaluations = 0;
        std::uint64_t ok_evaluations = 0;
        double uptime = 1.0;  // ok / evaluations
        std::optional<Micros> first_not_ok_at_us;
        Severity final_status = Severity::ok;
        std::string final_message;
    };

    struct TimelineEntry {
        Micros at_us = 0;
        std::string component;
        std::string event;
    };

    struct WatchdogReset {
        Micros expired_at_us = 0;
        std::optional<Micros> operational_again_at_us;
    };

    std::string scenario_name;
    std::uint64_t seed = 0;
    Micros duration_us = 0;
    Micros finished_at_us = 0;  // >= duration when late arrivals drained

    std::vector<StreamReport> streams;
    std::vector<LinkReport> links;
    std::vector<CheckReport> checks;
    std::vector<TimelineEntry> timeline;
    std::vector<WatchdogReset> watchdog_resets;

    Severity final_aggregate = Severity::ok;
    std::string verdict;  // severity_name(final_aggregate)

    // Conservation audit inputs.
    std::uint64_t emitted_copies_total = 0;
    std::uint64_t injected_total = 0;
    std::uint64_t net_delivered_total = 0;
    std::uint64_t net_dropped_total = 0;
    std::uint64_t rx_outcome_total = 0;
    std::uint64_t in_flight_at_end = 0;

    std::string to_json_text() const;
    void save(const std::string& path) const;

    static RunReport from_json_text(const std::string& text);
    static RunReport load(const std::string& path);

    const StreamReport* stream(std::string_view name) const;
    const CheckReport* check(std::string_view check_id) const;
};

}  // namespace telelink
