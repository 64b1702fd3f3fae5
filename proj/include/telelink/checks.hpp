#pragma once

#include <string>

#include "telelink/sysmon.hpp"

namespace telelink {

// Standard check library in the spirit of "Is hardware device X connected?"
// and "Does component Y produce data?". Each factory yields a registerable
// CheckDefinition with a stable id.

// Fail when the stream has not delivered within max_age_us. Before the first
// delivery the run start counts as the reference instant.
CheckDefinition check_stream_delivering(const std::string& stream_name, Micros max_age_us);

// Fail when the stream's loss ratio exceeds the bound.
CheckDefinition check_stream_loss_below(const std::string& stream_name, double bound);

// Warn when the stream's delivered-latency p99 exceeds the bound.
CheckDefinition check_stream_latency_p99_below(const std::string& stream_name, Micros bound_us);

// Fail when the node is down or its heartbeat age exceeds
// stuck_multiplier * heartbeat_period (evaluated against the snapshot age).
CheckDefinition check_node_heartbeat(const std::string& node_id, Micros max_age_us);

// Ok when Active, Warn while recovering, Fail when stopped or offline.
CheckDefinition check_device_ok(const std::string& device_id);

// Fail when the link has not delivered any datagram within max_age_us.
CheckDefinition check_link_delivering(LinkId link, Micros max_age_us);

// Warn on an engaged software E-stop, Fail on an engaged hardware E-stop.
CheckDefinition check_estop_clear();

}  // namespace telelink
