#include "telelink/recovery.hpp"

#include <algorithm>
#include <cassert>

namespace telelink {

const char* device_phase_name(DevicePhase p) {
    switch (p) {
        case DevicePhase::active: return "active";
        case DevicePhase::soft_stopped: return "soft_stopped";
        case DevicePhase::hard_stopped: return "hard_stopped";
        case DevicePhase::restarting: return "restarting";
        case DevicePhase::fading_in: return "fading_in";
        case DevicePhase::offline: return "offline";
    }
    return "?";
}

Pose fade_pose(const Pose& q_start, const Pose& q_target, Micros t_us, Micros total_us) {
    if (q_start.size() != q_target.size())
        throw DimensionMismatch(q_start.size(), q_target.size());
    assert(total_us > 0);
    if (t_us == 0) return q_start;
    if (t_us >= total_us) return q_target;

    const double alpha = static_cast<double>(t_us) / static_cast<double>(total_us);
    Pose out(q_start.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = (1.0 - alpha) * q_start[i] + alpha * q_target[i];
    }
    return out;
}

DeviceFsm::DeviceFsm(DeviceConfig config, Pose initial_pose)
    : config_(std::move(config)), pose_(std::move(initial_pose)) {
    assert(pose_.size() == config_.joint_count);
    assert(config_.fade_us > 0);
    stop_pose_ = pose_;
}

std::optional<PhaseChange> DeviceFsm::apply(const EStopState& estop, const DeviceEvent& event,
                                            const Pose& operator_pose) {
    const DevicePhase before = phase_;

    // E-stop forcing precedes the event: hardware cuts power to everything,
    // software stops whatever is running.
    if (estop.hardware_estop) {
        if (phase_ != DevicePhase::offline) {
            stop_pose_ = pose_;
            phase_ = DevicePhase::offline;
        }
    } else if (estop.software_estop && running()) {
        stop_pose_ = pose_;
        phase_ = DevicePhase::soft_stopped;
    }

    switch (event.kind) {
        case DeviceEvent::Kind::soft_stop:
            if (running()) {
                stop_pose_ = pose_;
                phase_ = DevicePhase::soft_stopped;
            } else {
                ignored_events_ += 1;
            }
            break;

        case DeviceEvent::Kind::hard_stop:
            if (running() || phase_ == DevicePhase::soft_stopped) {
                stop_pose_ = pose_;
                phase_ = DevicePhase::hard_stopped;
            } else {
                ignored_events_ += 1;
            }
            break;

        case DeviceEvent::Kind::recover_requested:
            if (phase_ == DevicePhase::soft_stopped || phase_ == DevicePhase::hard_stopped ||
                phase_ == DevicePhase::offline) {
                if (estop.any_engaged()) {
                    blocked_recoveries_ += 1;
                } else {
                    restart_total_us_ = phase_ == DevicePhase::soft_stopped
                                            ? config_.soft_restart_us
                                            : config_.hard_restart_us;
                    elapsed_us_ = 0;
                    phase_ = DevicePhase::restarting;
                }
            } else {
                ignored_events_ += 1;
            }
            break;

        case DeviceEvent::Kind::tick: {
            Micros dt = event.dt_us;
            // Leftover time carries across the restarting -> fading_in
            // boundary so that ticks totaling restart + fade reach active.
            if (phase_ == DevicePhase::restarting) {
                elapsed_us_ += dt;
                if (elapsed_us_ >= restart_total_us_) {
                    dt = elapsed_us_ - restart_total_us_;
                    elapsed_us_ = 0;
                    phase_ = DevicePhase::fading_in;
                } else {
                    dt = 0;
                }
            }
            if (phase_ == DevicePhase::fading_in) {
                elapsed_us_ += dt;
                pose_ = fade_pose(stop_pose_, operator_pose, elapsed_us_, config_.fade_us);
                if (elapsed_us_ >= config_.fade_us) {
                    phase_ = DevicePhase::active;
                    elapsed_us_ = 0;
                }
            } else if (phase_ == DevicePhase::active) {
                pose_ = operator_pose;
            }
            break;
        }
    }

    if (phase_ == before) return std::nullopt;
    return PhaseChange{before, phase_};
}

const char* supervisor_action_name(SupervisorAction::Kind k) {
    switch (k) {
        case SupervisorAction::Kind::respawn: return "respawn";
        case SupervisorAction::Kind::kill_stuck: return "kill_stuck";
        case SupervisorAction::Kind::node_up: return "node_up";
    }
    return "?";
}

void Supervisor::register_node(const NodeSpec& spec) {
    assert(spec.heartbeat_period_us > 0);
    assert(get(spec.node_id) == nullptr);
    nodes_.push_back({spec, NodeState::up, 0, 0, 0});
}

Supervisor::Node* Supervisor::get(const std::string& node_id) {
    for (auto& n : nodes_) {
        if (n.spec.node_id == node_id) return &n;
    }
    return nullptr;
}

const Supervisor::Node* Supervisor::get(const std::string& node_id) const {
    for (const auto& n : nodes_) {
        if (n.spec.node_id == node_id) return &n;
    }
    return nullptr;
}

std::vector<SupervisorAction> Supervisor::on_exit(const std::string& node_id, Micros now_us) {
    Node* n = get(node_id);
    if (n == nullptr || n->state == NodeState::down) return {};
    n->state = NodeState::down;
    n->up_at_us = now_us + n->spec.restart_duration_us;
    n->restarts += 1;
    return {{now_us, SupervisorAction::Kind::respawn, node_id}};
}

void Supervisor::on_heartbeat(const std::string& node_id, Micros now_us) {
    if (Node* n = get(node_id); n != nullptr && n->state == NodeState::up) {
        n->last_heartbeat_us = std::max(n->last_heartbeat_us, now_us);
    }
}

std::vector<SupervisorAction> Supervisor::tick(Micros now_us) {
    std::vector<SupervisorAction> actions;
    for (auto& n : nodes_) {
        if (n.state == NodeState::down) {
            if (now_us >= n.up_at_us) {
                n.state = NodeState::up;
                n.last_heartbeat_us = now_us;
                actions.push_back({now_us, SupervisorAction::Kind::node_up, n.spec.node_id});
            }
            continue;
        }
        const Micros age = now_us - n.last_heartbeat_us;
        if (age > static_cast<Micros>(n.spec.stuck_multiplier) * n.spec.heartbeat_period_us) {
            n.state = NodeState::down;
            n.up_at_us = now_us + n.spec.restart_duration_us;
            n.restarts += 1;
            actions.push_back({now_us, SupervisorAction::Kind::kill_stuck, n.spec.node_id});
            actions.push_back({now_us, SupervisorAction::Kind::respawn, n.spec.node_id});
        }
    }
    return actions;
}

void Supervisor::relaunch_all(Micros boot_end_us) {
    for (auto& n : nodes_) {
        n.state = NodeState::down;
        n.up_at_us = boot_end_us + n.spec.restart_duration_us;
    }
}

bool Supervisor::is_up(const std::string& node_id) const {
    const Node* n = get(node_id);
    return n != nullptr && n->state == NodeState::up;
}

std::optional<Micros> Supervisor::heartbeat_age(const std::string& node_id, Micros now_us) const {
    const Node* n = get(node_id);
    if (n == nullptr || n->state == NodeState::down) return std::nullopt;
    return now_us - n->last_heartbeat_us;
}

std::uint64_t Supervisor::restart_count(const std::string& node_id) const {
    const Node* n = get(node_id);
    return n == nullptr ? 0 : n->restarts;
}

std::vector<std::string> Supervisor::node_ids() const {
    std::vector<std::string> ids;
    ids.reserve(nodes_.size());
    for (const auto& n : nodes_) ids.push_back(n.spec.node_id);
    return ids;
}

WatchdogVerdict evaluate_feeds(const WatchdogConfig& config, const std::vector<Micros>& feeds,
                               Micros now_us) {
    Micros last = 0;  // armed at time zero
    for (Micros f : feeds) {
        assert(f >= last);
        if (f > last + config.timeout_us) {
            return {true, last + config.timeout_us};
        }
        last = f;
    }
    if (now_us >= last + config.timeout_us) {
        return {true, last + config.timeout_us};
    }
    return {false, 0};
}

}  // namespace telelink
