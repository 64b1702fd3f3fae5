#include "telelink/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "telelink/wire.hpp"

namespace telelink {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path, msg);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "missing required field");
    return *it;
}

double require_number(const json& obj, const std::string& key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_number()) fail(path + "." + key, "expected a number");
    return v.get<double>();
}

std::uint64_t require_u64(const json& obj, const std::string& key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        fail(path + "." + key, "expected a nonnegative integer");
    return v.get<std::uint64_t>();
}

std::string require_string(const json& obj, const std::string& key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_string()) fail(path + "." + key, "expected a string");
    return v.get<std::string>();
}

LinkId parse_link(const std::string& s, const std::string& path) {
    if (s == "band5") return LinkId::band5;
    if (s == "band24") return LinkId::band24;
    fail(path, "unknown link \"" + s + "\" (expected band5 or band24)");
}

LinkConfig parse_link_config(const json& obj, LinkId link, const std::string& path) {
    LinkConfig cfg;
    cfg.link = link;
    cfg.capacity = Mbps::from_mbps(require_number(obj, "capacity_mbps", path));
    cfg.loss_prob = obj.value("loss_prob", 0.0);
    cfg.base_latency_us = obj.value("base_latency_us", std::uint64_t{3000});
    cfg.jitter_us = obj.value("jitter_us", std::uint64_t{0});
    cfg.queue_limit_bytes = obj.value("queue_limit_bytes", std::uint64_t{262144});
    if (auto reason = cfg.invalid_reason()) fail(path, *reason);
    return cfg;
}

FaultEvent parse_fault(const json& obj, const std::string& path) {
    FaultEvent f;
    f.at_us = require_u64(obj, "at_us", path);
    const std::string kind = require_string(obj, "kind", path);
    if (kind == "blackout") {
        f.kind = FaultEvent::Kind::blackout;
        f.link = parse_link(require_string(obj, "link", path), path + ".link");
        f.duration_us = require_u64(obj, "duration_us", path);
    } else if (kind == "loss_spike") {
        f.kind = FaultEvent::Kind::loss_spike;
        f.link = parse_link(require_string(obj, "link", path), path + ".link");
        f.duration_us = require_u64(obj, "duration_us", path);
        f.prob = require_number(obj, "prob", path);
        if (f.prob < 0.0 || f.prob > 1.0) fail(path + ".prob", "must be in [0, 1]");
    } else if (kind == "node_crash") {
        f.kind = FaultEvent::Kind::node_crash;
        f.node_id = require_string(obj, "node", path);
    } else if (kind == "node_hang") {
        f.kind = FaultEvent::Kind::node_hang;
        f.node_id = require_string(obj, "node", path);
    } else if (kind == "system_hang") {
        f.kind = FaultEvent::Kind::system_hang;
    } else {
        fail(path + ".kind", "unknown fault kind \"" + kind + "\"");
    }
    if (f.is_link_fault() && f.duration_us == 0) fail(path + ".duration_us", "must be > 0");
    return f;
}

CheckSpec parse_check(const json& obj, const std::string& path) {
    CheckSpec c;
    c.kind = require_string(obj, "kind", path);
    if (c.kind == "stream_delivering") {
        c.stream = require_string(obj, "stream", path);
        c.max_age_us = obj.value("max_age_us", std::uint64_t{1'000'000});
    } else if (c.kind == "stream_loss_below") {
        c.stream = require_string(obj, "stream", path);
        c.bound = require_number(obj, "bound", path);
    } else if (c.kind == "stream_latency_p99_below") {
        c.stream = require_string(obj, "stream", path);
        c.bound_us = require_u64(obj, "bound_us", path);
    } else if (c.kind == "node_heartbeat") {
        c.node = require_string(obj, "node", path);
        c.max_age_us = obj.value("max_age_us", std::uint64_t{0});  // 0: use the node stuck threshold
    } else if (c.kind == "device_ok") {
        c.device = require_string(obj, "device", path);
    } else if (c.kind == "link_delivering") {
        c.link = parse_link(require_string(obj, "link", path), path + ".link");
        c.max_age_us = obj.value("max_age_us", std::uint64_t{1'000'000});
    } else if (c.kind == "estop_clear") {
        // no parameters
    } else {
        fail(path + ".kind", "unknown check kind \"" + c.kind + "\"");
    }
    return c;
}

}  // namespace

std::uint32_t ScenarioStream::resolved_payload_bytes() const {
    if (payload_bytes) return *payload_bytes;
    // Size messages so that header + payload meets the budget at the nominal
    // rate: bits per message = budget / rate.
    const std::int64_t bits_per_msg =
        spec.budget.kbps * 1'000'000 / spec.nominal_rate.millihertz;
    std::int64_t bytes = bits_per_msg / 8 - static_cast<std::int64_t>(wire_header_size);
    bytes = std::clamp<std::int64_t>(bytes, 16, wire_max_payload);
    return static_cast<std::uint32_t>(bytes);
}

StreamRegistry Scenario::build_registry() const {
    StreamRegistry registry(band5.capacity, band24.capacity);
    for (std::size_t i = 0; i < streams.size(); ++i) {
        if (auto err = registry.register_stream(streams[i].spec)) {
            fail("streams[" + std::to_string(i) + "]", err->message);
        }
    }
    return registry;
}

Scenario parse_scenario(const std::string& json_text, const std::string& origin) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(origin, std::string("JSON parse error: ") + e.what());
    }
    if (!root.is_object()) fail(origin, "top level must be an object");
    if (root.contains("schema") && root["schema"] != "telelink-scenario/1")
        fail("schema", "unsupported scenario schema (expected telelink-scenario/1)");

    Scenario sc;
    sc.name = root.value("name", std::string{});
    sc.seed = root.value("seed", std::uint64_t{1});
    sc.duration_us = require_u64(root, "duration_us", "");
    if (sc.duration_us == 0) fail("duration_us", "must be > 0");

    const json& links = require(root, "links", "");
    sc.band5 = parse_link_config(require(links, "band5", "links"), LinkId::band5, "links.band5");
    sc.band24 =
        parse_link_config(require(links, "band24", "links"), LinkId::band24, "links.band24");

    const json& streams = require(root, "streams", "");
    if (!streams.is_array()) fail("streams", "expected an array");
    for (std::size_t i = 0; i < streams.size(); ++i) {
        const std::string path = "streams[" + std::to_string(i) + "]";
        const json& s = streams[i];
        ScenarioStream out;
        out.spec.stream_id = static_cast<std::uint16_t>(require_u64(s, "id", path));
        out.spec.name = require_string(s, "name", path);
        const std::string dir = require_string(s, "direction", path);
        if (dir == "downlink") {
            out.spec.direction = Direction::downlink;
        } else if (dir == "uplink") {
            out.spec.direction = Direction::uplink;
        } else {
            fail(path + ".direction", "expected downlink or uplink");
        }
        out.spec.budget = Mbps::from_mbps(require_number(s, "budget_mbps", path));
        const json& ls = require(s, "links", path);
        if (!ls.is_array() || ls.empty()) fail(path + ".links", "expected a nonempty array");
        for (const auto& l : ls) {
            if (!l.is_string()) fail(path + ".links", "expected link names");
            LinkId id = parse_link(l.get<std::string>(), path + ".links");
            if (id == LinkId::band5) out.spec.links.band5 = true;
            if (id == LinkId::band24) out.spec.links.band24 = true;
        }
        out.spec.redundant = s.value("redundant", false);
        out.spec.nominal_rate = RateHz::from_hz(require_number(s, "rate_hz", path));
        if (s.contains("payload_bytes")) {
            const std::uint64_t pb = require_u64(s, "payload_bytes", path);
            if (pb > wire_max_payload) fail(path + ".payload_bytes", "exceeds 65535");
            out.payload_bytes = static_cast<std::uint32_t>(pb);
        }
        if (auto reason = out.spec.invalid_reason()) fail(path, *reason);
        sc.streams.push_back(std::move(out));
    }

    if (root.contains("faults")) {
        const json& faults = root["faults"];
        if (!faults.is_array()) fail("faults", "expected an array");
        for (std::size_t i = 0; i < faults.size(); ++i) {
            sc.faults.push_back(parse_fault(faults[i], "faults[" + std::to_string(i) + "]"));
        }
        std::stable_sort(sc.faults.begin(), sc.faults.end(),
                         [](const FaultEvent& a, const FaultEvent& b) { return a.at_us < b.at_us; });
    }

    if (root.contains("nodes")) {
        for (std::size_t i = 0; i < root["nodes"].size(); ++i) {
            const std::string path = "nodes[" + std::to_string(i) + "]";
            const json& n = root["nodes"][i];
            NodeSpec spec;
            spec.node_id = require_string(n, "id", path);
            spec.heartbeat_period_us = require_u64(n, "heartbeat_period_us", path);
            if (spec.heartbeat_period_us == 0) fail(path + ".heartbeat_period_us", "must be > 0");
            spec.stuck_multiplier = static_cast<std::uint32_t>(n.value("stuck_multiplier", 3u));
            if (spec.stuck_multiplier == 0) fail(path + ".stuck_multiplier", "must be > 0");
            spec.restart_duration_us = require_u64(n, "restart_duration_us", path);
            sc.nodes.push_back(std::move(spec));
        }
    }

    if (root.contains("devices")) {
        for (std::size_t i = 0; i < root["devices"].size(); ++i) {
            const std::string path = "devices[" + std::to_string(i) + "]";
            const json& d = root["devices"][i];
            DeviceConfig cfg;
            cfg.device_id = require_string(d, "id", path);
            cfg.joint_count = static_cast<std::size_t>(d.value("joints", 7u));
            cfg.soft_restart_us = d.value("soft_restart_us", std::uint64_t{3'000'000});
            cfg.hard_restart_us = d.value("hard_restart_us", std::uint64_t{10'000'000});
            cfg.fade_us = d.value("fade_us", std::uint64_t{2'000'000});
            if (cfg.fade_us == 0) fail(path + ".fade_us", "must be > 0");
            sc.devices.push_back(std::move(cfg));
        }
    }

    if (root.contains("watchdog")) {
        const json& w = root["watchdog"];
        WatchdogSpec spec;
        spec.config.timeout_us = require_u64(w, "timeout_us", "watchdog");
        if (spec.config.timeout_us == 0) fail("watchdog.timeout_us", "must be > 0");
        spec.config.reboot_duration_us = require_u64(w, "reboot_duration_us", "watchdog");
        spec.feed_period_us = w.value("feed_period_us", std::uint64_t{1'000'000});
        if (spec.feed_period_us == 0 || spec.feed_period_us > spec.config.timeout_us)
            fail("watchdog.feed_period_us", "must be in (0, timeout_us]");
        // Reset-to-operational must fit the one-minute bound: boot, the
        // slowest node relaunch, and two monitor periods to settle green.
        Micros slowest_node = 0;
        for (const auto& n : sc.nodes)
            slowest_node = std::max(slowest_node, n.restart_duration_us);
        if (spec.config.reboot_duration_us + slowest_node + 2'000'000 > 60'000'000)
            fail("watchdog.reboot_duration_us",
                 "reboot + node restart + settle exceeds the 60 s recovery bound");
        sc.watchdog = spec;
    }

    if (root.contains("checks")) {
        const json& checks = root["checks"];
        if (!checks.is_array()) fail("checks", "expected an array");
        for (std::size_t i = 0; i < checks.size(); ++i) {
            sc.checks.push_back(parse_check(checks[i], "checks[" + std::to_string(i) + "]"));
        }
    }

    if (root.contains("drills")) {
        const json& drills = root["drills"];
        if (drills.contains("device_events")) {
            for (std::size_t i = 0; i < drills["device_events"].size(); ++i) {
                const std::string path = "drills.device_events[" + std::to_string(i) + "]";
                const json& e = drills["device_events"][i];
                DeviceDrill d;
                d.at_us = require_u64(e, "at_us", path);
                d.device_id = require_string(e, "device", path);
                const std::string kind = require_string(e, "kind", path);
                if (kind == "soft_stop") {
                    d.hard = false;
                } else if (kind == "hard_stop") {
                    d.hard = true;
                } else {
                    fail(path + ".kind", "expected soft_stop or hard_stop");
                }
                sc.device_drills.push_back(std::move(d));
            }
        }
        if (drills.contains("estop_events")) {
            for (std::size_t i = 0; i < drills["estop_events"].size(); ++i) {
                const std::string path = "drills.estop_events[" + std::to_string(i) + "]";
                const json& e = drills["estop_events"][i];
                EStopDrill d;
                d.at_us = require_u64(e, "at_us", path);
                const std::string which = require_string(e, "estop", path);
                if (which == "software") {
                    d.hardware = false;
                } else if (which == "hardware") {
                    d.hardware = true;
                } else {
                    fail(path + ".estop", "expected software or hardware");
                }
                d.engaged = e.value("engaged", true);
                sc.estop_drills.push_back(std::move(d));
            }
        }
        auto by_time = [](const auto& a, const auto& b) { return a.at_us < b.at_us; };
        std::stable_sort(sc.device_drills.begin(), sc.device_drills.end(), by_time);
        std::stable_sort(sc.estop_drills.begin(), sc.estop_drills.end(), by_time);
    }

    // Cross-references must resolve.
    for (std::size_t i = 0; i < sc.checks.size(); ++i) {
        const CheckSpec& c = sc.checks[i];
        const std::string path = "checks[" + std::to_string(i) + "]";
        auto has_stream = [&](const std::string& name) {
            return std::any_of(sc.streams.begin(), sc.streams.end(),
                               [&](const ScenarioStream& s) { return s.spec.name == name; });
        };
        auto has_node = [&](const std::string& id) {
            return std::any_of(sc.nodes.begin(), sc.nodes.end(),
                               [&](const NodeSpec& n) { return n.node_id == id; });
        };
        auto has_device = [&](const std::string& id) {
            return std::any_of(sc.devices.begin(), sc.devices.end(),
                               [&](const DeviceConfig& d) { return d.device_id == id; });
        };
        if (!c.stream.empty() && !has_stream(c.stream))
            fail(path + ".stream", "unknown stream \"" + c.stream + "\"");
        if (!c.node.empty() && !has_node(c.node))
            fail(path + ".node", "unknown node \"" + c.node + "\"");
        if (!c.device.empty() && !has_device(c.device))
            fail(path + ".device", "unknown device \"" + c.device + "\"");
    }
    for (std::size_t i = 0; i < sc.faults.size(); ++i) {
        const FaultEvent& f = sc.faults[i];
        if (f.kind == FaultEvent::Kind::node_crash || f.kind == FaultEvent::Kind::node_hang) {
            const bool known =
                std::any_of(sc.nodes.begin(), sc.nodes.end(),
                            [&](const NodeSpec& n) { return n.node_id == f.node_id; });
            if (!known)
                fail("faults[" + std::to_string(i) + "].node",
                     "unknown node \"" + f.node_id + "\"");
        }
    }
    for (std::size_t i = 0; i < sc.device_drills.size(); ++i) {
        const bool known = std::any_of(
            sc.devices.begin(), sc.devices.end(),
            [&](const DeviceConfig& d) { return d.device_id == sc.device_drills[i].device_id; });
        if (!known)
            fail("drills.device_events[" + std::to_string(i) + "].device",
                 "unknown device \"" + sc.device_drills[i].device_id + "\"");
    }

    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open scenario file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

}  // namespace telelink
