#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "telelink/units.hpp"

namespace telelink {

// Operator-side safety latches. The software stop holds devices in a
// compliant stopped mode; the hardware stop cuts power entirely. Both block
// autonomous recovery while engaged.
struct EStopState {
    bool software_estop = false;
    bool hardware_estop = false;

    constexpr bool any_engaged() const { return software_estop || hardware_estop; }
};

enum class DevicePhase : std::uint8_t {
    active,
    soft_stopped,
    hard_stopped,
    restarting,
    fading_in,
    offline,
};
const char* device_phase_name(DevicePhase p);

// Joint positions in radians; dimension is fixed per device.
using Pose = std::vector<double>;

class DimensionMismatch : public std::invalid_argument {
public:
    DimensionMismatch(std::size_t a, std::size_t b)
        : std::invalid_argument("pose dimensions differ: " + std::to_string(a) + " vs " +
                                std::to_string(b)) {}
};

// Linear interpolation from q_start toward q_target with alpha = min(t/T, 1).
// Endpoints are exact: t = 0 returns q_start, t >= T returns q_target
// bitwise. q_target may move between calls; at alpha = 1 the output equals
// the q_target of that call.
Pose fade_pose(const Pose& q_start, const Pose& q_target, Micros t_us, Micros total_us);

struct DeviceConfig {
    std::string device_id;
    std::size_t joint_count = 7;
    // Soft-stop recovery re-enables motors; hard-stop recovery also releases
    // mechanical brakes, hence the longer default.
    Micros soft_restart_us = 3'000'000;
    Micros hard_restart_us = 10'000'000;
    Micros fade_us = 2'000'000;
};

struct DeviceEvent {
    enum class Kind : std::uint8_t { soft_stop, hard_stop, recover_requested, tick };

    Kind kind;
    Micros dt_us = 0;  // tick only

    static DeviceEvent soft_stop() { return {Kind::soft_stop, 0}; }
    static DeviceEvent hard_stop() { return {Kind::hard_stop, 0}; }
    static DeviceEvent recover_requested() { return {Kind::recover_requested, 0}; }
    static DeviceEvent tick(Micros dt_us) { return {Kind::tick, dt_us}; }
};

struct PhaseChange {
    DevicePhase from;
    DevicePhase to;
};

// Recovery state machine of one device (arm). Recovery out of a stopped
// state is gated on both E-stops being clear; an engaged hardware E-stop
// forces Offline, an engaged software E-stop forces running devices into
// SoftStopped. Illegal events are no-ops and counted.
class DeviceFsm {
public:
    DeviceFsm(DeviceConfig config, Pose initial_pose);

    // Applies E-stop forcing first, then the event. Returns the phase change
    // if one happened.
    std::optional<PhaseChange> apply(const EStopState& estop, const DeviceEvent& event,
                                     const Pose& operator_pose);

    DevicePhase phase() const { return phase_; }
    const Pose& pose() const { return pose_; }
    const DeviceConfig& config() const { return config_; }
    std::uint64_t ignored_events() const { return ignored_events_; }
    std::uint64_t blocked_recoveries() const { return blocked_recoveries_; }
    // Progress through the current Restarting/FadingIn phase.
    Micros phase_elapsed_us() const { return elapsed_us_; }

private:
    bool running() const {
        return phase_ == DevicePhase::active || phase_ == DevicePhase::restarting ||
               phase_ == DevicePhase::fading_in;
    }

    DeviceConfig config_;
    DevicePhase phase_ = DevicePhase::active;
    Micros elapsed_us_ = 0;
    Micros restart_total_us_ = 0;
    Pose pose_;
    Pose stop_pose_;
    std::uint64_t ignored_events_ = 0;
    std::uint64_t blocked_recoveries_ = 0;
};

struct NodeSpec {
    std::string node_id;
    Micros heartbeat_period_us = 1'000'000;
    std::uint32_t stuck_multiplier = 3;
    Micros restart_duration_us = 1'000'000;
};

enum class NodeState : std::uint8_t { up, down };

struct SupervisorAction {
    enum class Kind : std::uint8_t { respawn, kill_stuck, node_up };

    Micros at_us;
    Kind kind;
    std::string node_id;
};
const char* supervisor_action_name(SupervisorAction::Kind k);

// Process-level supervision: respawn on exit, kill-then-respawn on missing
// heartbeats. Node restarts complete on the tick that reaches their due time.
class Supervisor {
public:
    void register_node(const NodeSpec& spec);

    std::vector<SupervisorAction> on_exit(const std::string& node_id, Micros now_us);
    void on_heartbeat(const std::string& node_id, Micros now_us);
    std::vector<SupervisorAction> tick(Micros now_us);

    // Watchdog reset path: every node goes down and relaunches
    // restart_duration after boot_end_us. Not counted as supervisor restarts.
    void relaunch_all(Micros boot_end_us);

    bool is_up(const std::string& node_id) const;
    std::optional<Micros> heartbeat_age(const std::string& node_id, Micros now_us) const;
    std::uint64_t restart_count(const std::string& node_id) const;
    std::vector<std::string> node_ids() const;

private:
    struct Node {
        NodeSpec spec;
        NodeState state = NodeState::up;
        Micros last_heartbeat_us = 0;
        Micros up_at_us = 0;  // meaningful while down
        std::uint64_t restarts = 0;
    };

    Node* get(const std::string& node_id);
    const Node* get(const std::string& node_id) const;

    std::vector<Node> nodes_;
};

struct WatchdogConfig {
    Micros timeout_us = 5'000'000;
    Micros reboot_duration_us = 30'000'000;
};

struct WatchdogVerdict {
    bool expired = false;
    Micros expired_at_us = 0;
};

// Pure evaluation over a feed history. The deadline is last_feed + timeout;
// a feed landing exactly on the deadline keeps the watchdog armed. The timer
// arms at time 0 with an implicit feed.
WatchdogVerdict evaluate_feeds(const WatchdogConfig& config, const std::vector<Micros>& feeds,
                               Micros now_us);

// Incremental form used by the scenario runner.
class WatchdogTimer {
public:
    explicit WatchdogTimer(WatchdogConfig config) : config_(config) {}

    void feed(Micros now_us) { last_feed_us_ = now_us; }
    Micros deadline_us() const { return last_feed_us_ + config_.timeout_us; }
    bool expired(Micros now_us) const { return now_us >= deadline_us(); }
    const WatchdogConfig& config() const { return config_; }

private:
    WatchdogConfig config_;
    Micros last_feed_us_ = 0;
};

}  // namespace telelink
