#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "telelink/core.hpp"
#include "telelink/error.hpp"
#include "telelink/netsim.hpp"
#include "telelink/recovery.hpp"
#include "telelink/units.hpp"

namespace telelink {

// Declarative check instantiation; resolved against the standard check
// library when the monitor is assembled.
struct CheckSpec {
    std::string kind;  // stream_delivering, stream_loss_below, stream_latency_p99_below,
                       // node_heartbeat, device_ok, link_delivering, estop_clear
    std::string stream;
    std::string node;
    std::string device;
    LinkId link = LinkId::band5;
    double bound = 0.0;
    Micros max_age_us = 1'000'000;
    Micros bound_us = 0;
};

struct DeviceDrill {
    Micros at_us;
    std::string device_id;
    bool hard = false;  // soft_stop otherwise
};

struct EStopDrill {
    Micros at_us;
    bool hardware = false;  // software otherwise
    bool engaged = true;
};

struct WatchdogSpec {
    WatchdogConfig config;
    Micros feed_period_us = 1'000'000;
};

struct ScenarioStream {
    StreamSpec spec;
    std::optional<std::uint32_t> payload_bytes;  // derived from budget and rate when absent

    std::uint32_t resolved_payload_bytes() const;
};

// Everything one reproducible run needs: stream table, link models, fault
// schedule, supervised nodes, devices, watchdog, and the check set.
struct Scenario {
    std::string name;
    std::uint64_t seed = 1;
    Micros duration_us = 10'000'000;

    LinkConfig band5;
    LinkConfig band24;

    std::vector<ScenarioStream> streams;
    std::vector<FaultEvent> faults;  // sorted by at_us
    std::vector<NodeSpec> nodes;
    std::vector<DeviceConfig> devices;
    std::optional<WatchdogSpec> watchdog;
    std::vector<CheckSpec> checks;
    std::vector<DeviceDrill> device_drills;  // sorted by at_us
    std::vector<EStopDrill> estop_drills;    // sorted by at_us

    // Registers every stream; throws ConfigError if admission fails.
    StreamRegistry build_registry() const;
};

// Parses and validates a scenario file. Throws ConfigError with the JSON
// path of the offending field.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text, const std::string& origin = "");

}  // namespace telelink
