#include "telelink/checks.hpp"

#include <cstdio>

namespace telelink {

namespace {

std::string format_ratio(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

CheckDefinition check_stream_delivering(const std::string& stream_name, Micros max_age_us) {
    CheckDefinition def;
    def.check_id = "stream." + stream_name + ".delivering";
    def.description = "stream \"" + stream_name + "\" produces data";
    def.predicate = [stream_name, max_age_us](const TelemetrySnapshot& s) {
        const StreamTelemetry* st = s.stream(stream_name);
        if (st == nullptr) return CheckOutcome::fail("stream not in telemetry");
        const Micros age = st->last_delivery_age_us.value_or(s.now_us);
        if (age > max_age_us)
            return CheckOutcome::fail("no delivery for " + std::to_string(age) + " us");
        return CheckOutcome::ok();
    };
    return def;
}

CheckDefinition check_stream_loss_below(const std::string& stream_name, double bound) {
    CheckDefinition def;
    def.check_id = "stream." + stream_name + ".loss";
    def.description = "stream \"" + stream_name + "\" loss ratio below " + format_ratio(bound);
    def.predicate = [stream_name, bound](const TelemetrySnapshot& s) {
        const StreamTelemetry* st = s.stream(stream_name);
        if (st == nullptr) return CheckOutcome::fail("stream not in telemetry");
        if (st->loss_ratio > bound)
            return CheckOutcome::fail("loss ratio " + format_ratio(st->loss_ratio) + " above " +
                                      format_ratio(bound));
        return CheckOutcome::ok();
    };
    return def;
}

CheckDefinition check_stream_latency_p99_below(const std::string& stream_name, Micros bound_us) {
    CheckDefinition def;
    def.check_id = "stream." + stream_name + ".latency";
    def.description =
        "stream \"" + stream_name + "\" p99 latency below " + std::to_string(bound_us) + " us";
    def.predicate = [stream_name, bound_us](const TelemetrySnapshot& s) {
        const StreamTelemetry* st = s.stream(stream_name);
        if (st == nullptr) return CheckOutcome::fail("stream not in telemetry");
        if (st->latency_p99_us && *st->latency_p99_us > bound_us)
            return CheckOutcome::warn("p99 " + std::to_string(*st->latency_p99_us) + " us above " +
                                      std::to_string(bound_us) + " us");
        return CheckOutcome::ok();
    };
    return def;
}

CheckDefinition check_node_heartbeat(const std::string& node_id, Micros max_age_us) {
    CheckDefinition def;
    def.check_id = "node." + node_id + ".heartbeat";
    def.description = "node \"" + node_id + "\" heartbeats";
    def.predicate = [node_id, max_age_us](const TelemetrySnapshot& s) {
        const NodeTelemetry* n = s.node(node_id);
        if (n == nullptr) return CheckOutcome::fail("node not in telemetry");
        if (!n->up) return CheckOutcome::fail("node down (restarting)");
        if (n->heartbeat_age_us && *n->heartbeat_age_us > max_age_us)
            return CheckOutcome::fail("heartbeat age " + std::to_string(*n->heartbeat_age_us) +
                                      " us");
        return CheckOutcome::ok();
    };
    return def;
}

CheckDefinition check_device_ok(const std::string& device_id) {
    CheckDefinition def;
    def.check_id = "device." + device_id + ".state";
    def.description = "device \"" + device_id + "\" operational";
    def.predicate = [device_id](const TelemetrySnapshot& s) {
        const DeviceTelemetry* d = s.device(device_id);
        if (d == nullptr) return CheckOutcome::fail("device not in telemetry");
        switch (d->phase) {
            case DevicePhase::active: return CheckOutcome::ok();
            case DevicePhase::restarting:
            case DevicePhase::fading_in:
                return CheckOutcome::warn(std::string("recovering: ") +
                                          device_phase_name(d->phase));
            case DevicePhase::soft_stopped:
            case DevicePhase::hard_stopped:
            case DevicePhase::offline:
                return CheckOutcome::fail(device_phase_name(d->phase));
        }
        return CheckOutcome::fail("unknown phase");
    };
    return def;
}

CheckDefinition check_link_delivering(LinkId link, Micros max_age_us) {
    CheckDefinition def;
    def.check_id = std::string("link.") + link_name(link) + ".delivering";
    def.description = std::string(link_label(link)) + " link delivers data";
    def.predicate = [link, max_age_us](const TelemetrySnapshot& s) {
        const LinkTelemetry* l = s.link(link);
        if (l == nullptr) return CheckOutcome::fail("link not in telemetry");
        const Micros age = l->last_delivery_age_us.value_or(s.now_us);
        if (age > max_age_us)
            return CheckOutcome::fail("no delivery for " + std::to_string(age) + " us");
        return CheckOutcome::ok();
    };
    return def;
}

CheckDefinition check_estop_clear() {
    CheckDefinition def;
    def.check_id = "estop.clear";
    def.description = "no E-stop engaged";
    def.predicate = [](const TelemetrySnapshot& s) {
        if (s.estop.hardware_estop) return CheckOutcome::fail("hardware E-stop engaged");
        if (s.estop.software_estop) return CheckOutcome::warn("software E-stop engaged");
        return CheckOutcome::ok();
    };
    return def;
}

}  // namespace telelink
