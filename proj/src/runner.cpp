#include "telelink/runner.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <memory>

#include "telelink/checks.hpp"
#include "telelink/netsim.hpp"
#include "telelink/recovery.hpp"
#include "telelink/sysmon.hpp"
#include "telelink/transport.hpp"

namespace telelink {

namespace {

constexpr Micros control_period_us = 100'000;  // supervisor/observer/device tick
constexpr Micros sysmon_period_us = 1'000'000;

Micros next_multiple(Micros t, Micros period) {
    return (t + period - 1) / period * period;
}

// Synthetic operator pose: a slow deterministic joint trajectory, so fades
// chase a moving target like they would on the real exoskeleton.
Pose operator_pose(std::size_t joints, Micros t_us) {
    Pose q(joints);
    const double t = static_cast<double>(t_us) * 1e-6;
    for (std::size_t i = 0; i < joints; ++i) {
        q[i] = 0.3 * std::sin(0.5 * t + 0.7 * static_cast<double>(i));
    }
    return q;
}

CheckDefinition instantiate_check(const CheckSpec& spec, const Scenario& sc) {
    if (spec.kind == "stream_delivering") return check_stream_delivering(spec.stream, spec.max_age_us);
    if (spec.kind == "stream_loss_below") return check_stream_loss_below(spec.stream, spec.bound);
    if (spec.kind == "stream_latency_p99_below")
        return check_stream_latency_p99_below(spec.stream, spec.bound_us);
    if (spec.kind == "node_heartbeat") {
        Micros max_age = spec.max_age_us;
        if (max_age == 0) {
            for (const auto& n : sc.nodes) {
                if (n.node_id == spec.node)
                    max_age = static_cast<Micros>(n.stuck_multiplier) * n.heartbeat_period_us;
            }
        }
        return check_node_heartbeat(spec.node, max_age);
    }
    if (spec.kind == "device_ok") return check_device_ok(spec.device);
    if (spec.kind == "link_delivering") return check_link_delivering(spec.link, spec.max_age_us);
    if (spec.kind == "estop_clear") return check_estop_clear();
    throw ConfigError("checks", "unknown check kind \"" + spec.kind + "\"");
}

enum class SystemState { running, hung, rebooting };

struct StreamRuntime {
    const ScenarioStream* scenario_stream;
    StreamSender sender;
    std::vector<std::uint8_t> payload;
    std::int64_t next_k = 0;

    Micros next_emission_us() const {
        return scenario_stream->spec.nominal_rate.emission_time_us(next_k);
    }
};

struct NodeRuntime {
    const NodeSpec* spec;
    Micros next_heartbeat_us = 0;
    bool hung = false;
};

struct DeviceRuntime {
    std::unique_ptr<DeviceFsm> fsm;
};

}  // namespace

RunReport run_scenario(const Scenario& sc) {
    const StreamRegistry registry = sc.build_registry();

    SplitMix64 seeds(sc.seed);
    Simulator sim_down(sc.band5, sc.band24, seeds.next());
    Simulator sim_up(sc.band5, sc.band24, seeds.next());
    for (const FaultEvent& f : sc.faults) {
        if (f.is_link_fault()) {
            sim_down.schedule(f);
            sim_up.schedule(f);
        }
    }

    Receiver rx_down(registry);
    Receiver rx_up(registry);
    auto sim_for = [&](Direction d) -> Simulator& {
        return d == Direction::downlink ? sim_down : sim_up;
    };
    auto rx_for = [&](Direction d) -> Receiver& {
        return d == Direction::downlink ? rx_down : rx_up;
    };

    std::vector<StreamRuntime> streams;
    for (const auto& ss : sc.streams) {
        streams.push_back({&ss, StreamSender(ss.spec),
                           std::vector<std::uint8_t>(ss.resolved_payload_bytes(), 0), 0});
    }

    Supervisor supervisor;
    std::vector<NodeRuntime> nodes;
    for (const auto& n : sc.nodes) {
        supervisor.register_node(n);
        nodes.push_back({&n, n.heartbeat_period_us, false});
    }
    auto node_runtime = [&](const std::string& id) -> NodeRuntime* {
        for (auto& nr : nodes) {
            if (nr.spec->node_id == id) return &nr;
        }
        return nullptr;
    };

    std::vector<DeviceRuntime> devices;
    for (const auto& d : sc.devices) {
        devices.push_back({std::make_unique<DeviceFsm>(d, Pose(d.joint_count, 0.0))});
    }

    EStopState estop;
    std::optional<WatchdogTimer> watchdog;
    if (sc.watchdog) watchdog.emplace(sc.watchdog->config);

    Monitor monitor;
    for (const auto& cs : sc.checks) {
        auto dup = monitor.register_check(instantiate_check(cs, sc));
        if (dup) throw ConfigError("checks", "duplicate check id \"" + dup->check_id + "\"");
    }

    // Per-tick p99 is only worth computing for streams some check looks at.
    auto wants_p99 = [&](const std::string& stream_name) {
        for (const auto& cs : sc.checks) {
            if (cs.kind == "stream_latency_p99_below" && cs.stream == stream_name) return true;
        }
        return false;
    };

    RunReport report;
    report.scenario_name = sc.name;
    report.seed = sc.seed;
    report.duration_us = sc.duration_us;

    auto log = [&](Micros at, std::string component, std::string event) {
        report.timeline.push_back({at, std::move(component), std::move(event)});
    };

    // Pre-scheduled begin/end log entries for link faults; windows themselves
    // live in the simulators.
    std::vector<RunReport::TimelineEntry> fault_logs;
    for (const FaultEvent& f : sc.faults) {
        const std::string component = f.is_link_fault()
                                          ? std::string("link.") + link_name(f.link)
                                          : (f.kind == FaultEvent::Kind::system_hang
                                                 ? "system"
                                                 : "node." + f.node_id);
        if (f.kind == FaultEvent::Kind::blackout) {
            fault_logs.push_back({f.at_us, component, "blackout begin"});
            fault_logs.push_back({f.at_us + f.duration_us, component, "blackout end"});
        } else if (f.kind == FaultEvent::Kind::loss_spike) {
            fault_logs.push_back({f.at_us, component, "loss spike begin"});
            fault_logs.push_back({f.at_us + f.duration_us, component, "loss spike end"});
        }
    }
    std::stable_sort(fault_logs.begin(), fault_logs.end(),
                     [](const auto& a, const auto& b) { return a.at_us < b.at_us; });

    SystemState state = SystemState::running;
    Micros boot_end_us = 0;
    Micros next_control = 0;
    Micros next_sysmon = 0;
    Micros next_feed = sc.watchdog ? sc.watchdog->feed_period_us : 0;
    Micros last_device_tick = 0;
    std::size_t fault_cursor = 0;
    std::size_t fault_log_cursor = 0;
    std::size_t device_drill_cursor = 0;
    std::size_t estop_drill_cursor = 0;
    bool reset_pending_green = false;

    std::array<std::optional<Micros>, 2> last_link_arrival{};  // across both directions

    StatusTable last_table;
    std::vector<Severity> prev_status(sc.checks.size(), Severity::ok);
    bool have_prev_status = false;

    auto process_deliveries = [&](Micros until) {
        for (Direction dir : all_directions) {
            for (auto& d : sim_for(dir).step(until)) {
                last_link_arrival[link_index(d.link)] =
                    std::max(last_link_arrival[link_index(d.link)].value_or(0), d.arrival_us);
                rx_for(dir).receive(d.datagram, d.arrival_us);
            }
        }
    };

    auto build_snapshot = [&](Micros now) {
        TelemetrySnapshot snap;
        snap.now_us = now;
        snap.estop = estop;
        for (const auto& sr : streams) {
            const StreamSpec& spec = sr.scenario_stream->spec;
            StreamTelemetry st;
            st.stream_id = spec.stream_id;
            st.name = spec.name;
            st.emitted_msgs = sr.sender.emitted_msgs();
            if (const StreamStats* stats = rx_for(spec.direction).stats(spec.stream_id)) {
                st.delivered = stats->delivered;
                st.duplicates = stats->duplicates;
                st.stale = stats->stale;
                if (stats->last_arrival_us) {
                    st.last_delivery_age_us = now >= *stats->last_arrival_us
                                                  ? now - *stats->last_arrival_us
                                                  : 0;
                }
                if (wants_p99(spec.name)) st.latency_p99_us = stats->latency_p99();
            }
            st.loss_ratio = st.emitted_msgs == 0
                                ? 0.0
                                : 1.0 - static_cast<double>(st.delivered) /
                                            static_cast<double>(st.emitted_msgs);
            snap.streams.push_back(std::move(st));
        }
        for (const auto& nr : nodes) {
            NodeTelemetry nt;
            nt.node_id = nr.spec->node_id;
            nt.up = supervisor.is_up(nt.node_id);
            nt.heartbeat_age_us = supervisor.heartbeat_age(nt.node_id, now);
            nt.restart_count = supervisor.restart_count(nt.node_id);
            snap.nodes.push_back(std::move(nt));
        }
        for (std::size_t i = 0; i < devices.size(); ++i) {
            snap.devices.push_back({sc.devices[i].device_id, devices[i].fsm->phase()});
        }
        for (LinkId link : all_links) {
            LinkTelemetry lt;
            lt.link = link;
            lt.delivered =
                sim_down.counters(link).delivered + sim_up.counters(link).delivered;
            lt.dropped = sim_down.counters(link).dropped_total() +
                         sim_up.counters(link).dropped_total();
            if (last_link_arrival[link_index(link)]) {
                lt.last_delivery_age_us = now - *last_link_arrival[link_index(link)];
            }
            snap.links.push_back(lt);
        }
        return snap;
    };

    auto apply_device_event = [&](std::size_t i, const DeviceEvent& ev, Micros now) {
        const Pose target = operator_pose(sc.devices[i].joint_count, now);
        if (auto change = devices[i].fsm->apply(estop, ev, target)) {
            log(now, "device." + sc.devices[i].device_id,
                std::string(device_phase_name(change->from)) + " -> " +
                    device_phase_name(change->to));
        }
    };

    auto supervisor_actions = [&](const std::vector<SupervisorAction>& actions) {
        for (const auto& a : actions) {
            log(a.at_us, "node." + a.node_id, supervisor_action_name(a.kind));
            if (a.kind == SupervisorAction::Kind::node_up) {
                if (NodeRuntime* nr = node_runtime(a.node_id)) {
                    nr->hung = false;
                    nr->next_heartbeat_us = a.at_us + nr->spec->heartbeat_period_us;
                }
            }
        }
    };

    const Micros duration = sc.duration_us;

    while (true) {
        // Next due instant over all active sources.
        std::optional<Micros> t_next;
        auto consider = [&](std::optional<Micros> t) {
            if (t && *t <= duration && (!t_next || *t < *t_next)) t_next = *t;
        };

        if (state == SystemState::running) {
            for (const auto& sr : streams) {
                const Micros t = sr.next_emission_us();
                if (t < duration) consider(t);
            }
            for (const auto& nr : nodes) {
                if (supervisor.is_up(nr.spec->node_id) && !nr.hung)
                    consider(nr.next_heartbeat_us);
            }
            if (watchdog) consider(next_feed);
            consider(next_control);
            consider(next_sysmon);
        }
        if (watchdog && state != SystemState::rebooting) consider(watchdog->deadline_us());
        if (state == SystemState::rebooting) consider(boot_end_us);
        if (fault_cursor < sc.faults.size()) consider(sc.faults[fault_cursor].at_us);
        if (fault_log_cursor < fault_logs.size()) consider(fault_logs[fault_log_cursor].at_us);
        if (device_drill_cursor < sc.device_drills.size())
            consider(sc.device_drills[device_drill_cursor].at_us);
        if (estop_drill_cursor < sc.estop_drills.size())
            consider(sc.estop_drills[estop_drill_cursor].at_us);

        if (!t_next) break;
        const Micros t = *t_next;

        process_deliveries(t);

        // Fixed dispatch order at one instant: watchdog feed, watchdog
        // deadline, boot completion, heartbeats, control tick, sysmon tick,
        // faults, drills, emissions. A feed landing exactly on the deadline
        // keeps the watchdog armed; a hang at t suppresses the emission at t.
        if (watchdog && state == SystemState::running && t == next_feed) {
            watchdog->feed(t);
            next_feed += sc.watchdog->feed_period_us;
        }
        if (watchdog && state != SystemState::rebooting && t >= watchdog->deadline_us()) {
            log(t, "watchdog", "expired; forcing system reset");
            report.watchdog_resets.push_back({t, std::nullopt});
            reset_pending_green = true;
            state = SystemState::rebooting;
            boot_end_us = t + sc.watchdog->config.reboot_duration_us;
            supervisor.relaunch_all(boot_end_us);
            for (auto& nr : nodes) nr.hung = false;
        }

        if (state == SystemState::rebooting && t == boot_end_us) {
            state = SystemState::running;
            log(t, "system", "reboot finished; services starting");
            if (watchdog) {
                watchdog->feed(t);
                next_feed = t + sc.watchdog->feed_period_us;
            }
            for (auto& sr : streams) {
                while (sr.next_emission_us() < t) sr.next_k += 1;
            }
            next_control = next_multiple(t, control_period_us);
            next_sysmon = next_multiple(t, sysmon_period_us);
        }

        if (state == SystemState::running) {
            for (auto& nr : nodes) {
                if (t == nr.next_heartbeat_us && supervisor.is_up(nr.spec->node_id) &&
                    !nr.hung) {
                    supervisor.on_heartbeat(nr.spec->node_id, t);
                    nr.next_heartbeat_us += nr.spec->heartbeat_period_us;
                }
            }
        }

        if (state == SystemState::running && t == next_control) {
            supervisor_actions(supervisor.tick(t));
            // Advance device time first, then let the observer act on the
            // advanced state; a restart begun now starts from elapsed zero.
            const Micros dt = t - last_device_tick;
            for (std::size_t i = 0; i < devices.size(); ++i) {
                apply_device_event(i, DeviceEvent::tick(dt), t);
            }
            last_device_tick = t;
            for (std::size_t i = 0; i < devices.size(); ++i) {
                const DevicePhase phase = devices[i].fsm->phase();
                const bool stopped = phase == DevicePhase::soft_stopped ||
                                     phase == DevicePhase::hard_stopped ||
                                     phase == DevicePhase::offline;
                if (stopped && !estop.any_engaged()) {
                    log(t, "device." + sc.devices[i].device_id,
                        "observer requests recovery");
                    apply_device_event(i, DeviceEvent::recover_requested(), t);
                }
            }
            next_control += control_period_us;
        }

        if (state == SystemState::running && t == next_sysmon) {
            const TelemetrySnapshot snap = build_snapshot(t);
            last_table = monitor.tick(snap);
            for (std::size_t i = 0; i < last_table.rows.size(); ++i) {
                const Severity s = last_table.rows[i].status;
                if (have_prev_status && s != prev_status[i]) {
                    log(t, "check." + last_table.rows[i].check_id,
                        std::string(severity_name(prev_status[i])) + " -> " +
                            severity_name(s) +
                            (last_table.rows[i].message.empty()
                                 ? ""
                                 : " (" + last_table.rows[i].message + ")"));
                }
                prev_status[i] = s;
            }
            have_prev_status = true;
            if (reset_pending_green && last_table.aggregate == Severity::ok) {
                reset_pending_green = false;
                report.watchdog_resets.back().operational_again_at_us = t;
                log(t, "watchdog", "all checks green; operational again");
            }
            next_sysmon += sysmon_period_us;
        }

        while (fault_log_cursor < fault_logs.size() &&
               fault_logs[fault_log_cursor].at_us == t) {
            report.timeline.push_back(fault_logs[fault_log_cursor]);
            fault_log_cursor += 1;
        }

        while (fault_cursor < sc.faults.size() && sc.faults[fault_cursor].at_us == t) {
            const FaultEvent& f = sc.faults[fault_cursor];
            switch (f.kind) {
                case FaultEvent::Kind::node_crash:
                    log(t, "node." + f.node_id, "exited");
                    supervisor_actions(supervisor.on_exit(f.node_id, t));
                    break;
                case FaultEvent::Kind::node_hang:
                    log(t, "node." + f.node_id, "hung (no output)");
                    if (NodeRuntime* nr = node_runtime(f.node_id)) nr->hung = true;
                    break;
                case FaultEvent::Kind::system_hang:
                    log(t, "system", "complete hang");
                    state = SystemState::hung;
                    break;
                default:
                    break;  // link faults pre-scheduled in the simulators
            }
            fault_cursor += 1;
        }

        while (device_drill_cursor < sc.device_drills.size() &&
               sc.device_drills[device_drill_cursor].at_us == t) {
            const DeviceDrill& d = sc.device_drills[device_drill_cursor];
            for (std::size_t i = 0; i < devices.size(); ++i) {
                if (sc.devices[i].device_id == d.device_id) {
                    apply_device_event(
                        i, d.hard ? DeviceEvent::hard_stop() : DeviceEvent::soft_stop(), t);
                }
            }
            device_drill_cursor += 1;
        }

        while (estop_drill_cursor < sc.estop_drills.size() &&
               sc.estop_drills[estop_drill_cursor].at_us == t) {
            const EStopDrill& d = sc.estop_drills[estop_drill_cursor];
            if (d.hardware) {
                estop.hardware_estop = d.engaged;
            } else {
                estop.software_estop = d.engaged;
            }
            log(t, d.hardware ? "estop.hardware" : "estop.software",
                d.engaged ? "engaged" : "released");
            for (std::size_t i = 0; i < devices.size(); ++i) {
                apply_device_event(i, DeviceEvent::tick(0), t);
            }
            estop_drill_cursor += 1;
        }

        if (state == SystemState::running) {
            for (auto& sr : streams) {
                if (sr.next_emission_us() == t && t < duration) {
                    auto result = sr.sender.send_next(t, sr.payload);
                    assert(result.ok());
                    for (auto& e : result.value()) {
                        sim_for(sr.scenario_stream->spec.direction)
                            .inject(e.link, std::move(e.datagram), t);
                    }
                    sr.next_k += 1;
                }
            }
        }
    }

    // Emissions stopped at the horizon; late arrivals still count.
    process_deliveries(duration);
    Micros finished_at = duration;
    for (Direction dir : all_directions) {
        for (auto& d : sim_for(dir).drain()) {
            last_link_arrival[link_index(d.link)] =
                std::max(last_link_arrival[link_index(d.link)].value_or(0), d.arrival_us);
            rx_for(dir).receive(d.datagram, d.arrival_us);
            finished_at = std::max(finished_at, d.arrival_us);
        }
    }
    report.finished_at_us = finished_at;

    for (const auto& sr : streams) {
        const StreamSpec& spec = sr.scenario_stream->spec;
        RunReport::StreamReport out;
        out.stream_id = spec.stream_id;
        out.name = spec.name;
        out.direction = spec.direction;
        out.emitted_msgs = sr.sender.emitted_msgs();
        out.emitted_copies = sr.sender.emitted_copies();
        if (const StreamStats* stats = rx_for(spec.direction).stats(spec.stream_id)) {
            out.delivered = stats->delivered;
            out.duplicates = stats->duplicates;
            out.stale = stats->stale;
            const LatencyStats lat = stats->latency_percentiles();
            out.p50_us = lat.p50;
            out.p95_us = lat.p95;
            out.p99_us = lat.p99;
        }
        out.lost = out.emitted_msgs - out.delivered;
        out.loss_ratio = out.emitted_msgs == 0 ? 0.0
                                               : static_cast<double>(out.lost) /
                                                     static_cast<double>(out.emitted_msgs);
        report.streams.push_back(std::move(out));
    }

    for (Direction dir : all_directions) {
        for (LinkId link : all_links) {
            const LinkCounters& c = sim_for(dir).counters(link);
            report.links.push_back({dir, link, c.injected, c.delivered, c.delivered_bytes,
                                    c.loss_dropped, c.saturation_dropped, c.blackout_dropped});
        }
    }

    const StatusTable final_table = monitor.status_table(finished_at);
    for (std::size_t i = 0; i < sc.checks.size(); ++i) {
        const CheckResult& row = final_table.rows[i];
        RunReport::CheckReport out;
        out.check_id = row.check_id;
        out.evaluations = monitor.evaluations(row.check_id);
        out.ok_evaluations = monitor.ok_evaluations(row.check_id);
        out.uptime = out.evaluations == 0 ? 0.0
                                          : static_cast<double>(out.ok_evaluations) /
                                                static_cast<double>(out.evaluations);
        out.first_not_ok_at_us = monitor.first_not_ok_at(row.check_id);
        out.final_status = row.status;
        out.final_message = row.message;
        report.checks.push_back(std::move(out));
    }
    report.final_aggregate = final_table.aggregate;
    report.verdict = severity_name(report.final_aggregate);

    for (const auto& sr : streams) {
        report.emitted_copies_total += sr.sender.emitted_copies();
    }
    report.injected_total = sim_down.injected_total() + sim_up.injected_total();
    for (Direction dir : all_directions) {
        for (LinkId link : all_links) {
            const LinkCounters& c = sim_for(dir).counters(link);
            report.net_delivered_total += c.delivered;
            report.net_dropped_total += c.dropped_total();
        }
    }
    report.rx_outcome_total = rx_down.outcome_total() + rx_up.outcome_total();
    report.in_flight_at_end = sim_down.in_flight() + sim_up.in_flight();

    return report;
}

}  // namespace telelink
