#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "telelink/core.hpp"
#include "telelink/rng.hpp"
#include "telelink/units.hpp"

namespace telelink {

struct LinkConfig {
    LinkId link = LinkId::band5;
    Mbps capacity = Mbps::from_kbps(50'000);
    double loss_prob = 0.0;
    Micros base_latency_us = 3000;
    Micros jitter_us = 0;  // uniform additive delay drawn from [0, jitter_us)
    std::uint64_t queue_limit_bytes = 256 * 1024;

    std::optional<std::string> invalid_reason() const;
};

// Timed fault in a scenario schedule. Link faults are consumed by the
// Simulator; node and system faults by the supervision layer.
struct FaultEvent {
    enum class Kind : std::uint8_t { blackout, loss_spike, node_crash, node_hang, system_hang };

    Micros at_us = 0;
    Kind kind = Kind::blackout;
    LinkId link = LinkId::band5;  // blackout, loss_spike
    Micros duration_us = 0;       // blackout, loss_spike
    double prob = 1.0;            // loss_spike
    std::string node_id;          // node_crash, node_hang

    bool is_link_fault() const { return kind == Kind::blackout || kind == Kind::loss_spike; }
};
const char* fault_kind_name(FaultEvent::Kind k);

struct Delivery {
    Micros arrival_us;
    LinkId link;
    std::vector<std::uint8_t> datagram;
};

struct LinkCounters {
    std::uint64_t injected = 0;
    std::uint64_t delivered = 0;
    std::uint64_t delivered_bytes = 0;
    std::uint64_t loss_dropped = 0;
    std::uint64_t saturation_dropped = 0;
    std::uint64_t blackout_dropped = 0;

    std::uint64_t dropped_total() const {
        return loss_dropped + saturation_dropped + blackout_dropped;
    }
};

// Deterministic discrete-event model of the two wireless links. Loss and
// jitter draws come from per-link generator streams split off the master
// seed, so a fault schedule on one link never perturbs the other's draws.
//
// Transmission model per link: the transmitter serializes packets at
// capacity_mbps, so a packet injected at time t starts service at
// max(t, busy_until) and arrives at service_start + base_latency + jitter.
// Bytes waiting for service beyond queue_limit_bytes are tail-dropped.
class Simulator {
public:
    // Throws ConfigError on an invalid link config.
    Simulator(const LinkConfig& band5, const LinkConfig& band24, std::uint64_t seed);

    void add_blackout(LinkId link, Micros at_us, Micros duration_us);
    void add_loss_spike(LinkId link, Micros at_us, double prob, Micros duration_us);
    // Convenience for scenario schedules; ignores non-link faults.
    void schedule(const FaultEvent& fault);

    // Injection instants must be nondecreasing. Drops are counted, never raised.
    void inject(LinkId link, std::vector<std::uint8_t> datagram, Micros now_us);

    // Fires everything due up to and including until_us, in (arrival time,
    // injection order) order, and advances the clock to until_us.
    std::vector<Delivery> step(Micros until_us);

    // Processes all pending deliveries; clock ends at the last arrival.
    std::vector<Delivery> drain();

    Micros now() const { return clock_.now_us; }
    const LinkCounters& counters(LinkId link) const { return links_[link_index(link)].counters; }
    std::uint64_t in_flight() const { return pending_.size(); }
    std::uint64_t injected_total() const;

private:
    struct SimClock {
        Micros now_us = 0;  // advances only via step()
    };

    struct Window {
        Micros begin_us;
        Micros end_us;
        double prob;  // loss_spike only
    };

    struct LinkState {
        LinkConfig cfg;
        Xoshiro256 rng;
        Micros busy_until_us = 0;
        // Packets injected but not yet in service: (service_start, bytes).
        std::deque<std::pair<Micros, std::uint32_t>> waiting;
        std::uint64_t waiting_bytes = 0;
        std::vector<Window> blackouts;
        std::vector<Window> loss_spikes;
        LinkCounters counters;

        LinkState(const LinkConfig& c, std::uint64_t seed) : cfg(c), rng(seed) {}
        bool in_blackout(Micros t) const;
        double loss_at(Micros t) const;
    };

    struct Pending {
        Micros arrival_us;
        std::uint64_t order;
        LinkId link;
        std::vector<std::uint8_t> datagram;
    };
    struct PendingLater {
        bool operator()(const Pending& a, const Pending& b) const {
            if (a.arrival_us != b.arrival_us) return a.arrival_us > b.arrival_us;
            return a.order > b.order;
        }
    };

    SimClock clock_;
    std::array<LinkState, 2> links_;
    std::priority_queue<Pending, std::vector<Pending>, PendingLater> pending_;
    std::uint64_t next_order_ = 0;
    Micros last_inject_us_ = 0;
};

}  // namespace telelink
