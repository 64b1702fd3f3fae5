#include "telelink/netsim.hpp"

#include <cassert>

#include "telelink/error.hpp"

namespace telelink {

const char* fault_kind_name(FaultEvent::Kind k) {
    switch (k) {
        case FaultEvent::Kind::blackout: return "blackout";
        case FaultEvent::Kind::loss_spike: return "loss_spike";
        case FaultEvent::Kind::node_crash: return "node_crash";
        case FaultEvent::Kind::node_hang: return "node_hang";
        case FaultEvent::Kind::system_hang: return "system_hang";
    }
    return "?";
}

std::optional<std::string> LinkConfig::invalid_reason() const {
    if (!capacity.positive()) return "capacity_mbps must be > 0";
    if (loss_prob < 0.0 || loss_prob > 1.0) return "loss_prob must be in [0, 1]";
    if (queue_limit_bytes == 0) return "queue_limit_bytes must be > 0";
    return std::nullopt;
}

bool Simulator::LinkState::in_blackout(Micros t) const {
    for (const auto& w : blackouts) {
        if (t >= w.begin_us && t < w.end_us) return true;
    }
    return false;
}

double Simulator::LinkState::loss_at(Micros t) const {
    // Most recently started spike wins if several overlap.
    const Window* active = nullptr;
    for (const auto& w : loss_spikes) {
        if (t >= w.begin_us && t < w.end_us && (!active || w.begin_us >= active->begin_us))
            active = &w;
    }
    return active ? active->prob : cfg.loss_prob;
}

namespace {
std::uint64_t link_seed(std::uint64_t master, LinkId link) {
    SplitMix64 sm(master);
    std::uint64_t s = sm.next();
    if (link == LinkId::band24) s = sm.next();
    return s;
}
}  // namespace

Simulator::Simulator(const LinkConfig& band5, const LinkConfig& band24, std::uint64_t seed)
    : links_{LinkState(band5, link_seed(seed, LinkId::band5)),
             LinkState(band24, link_seed(seed, LinkId::band24))} {
    for (const LinkState& ls : links_) {
        if (auto reason = ls.cfg.invalid_reason())
            throw ConfigError("links." + std::string(link_name(ls.cfg.link)), *reason);
    }
}

void Simulator::add_blackout(LinkId link, Micros at_us, Micros duration_us) {
    assert(duration_us > 0);
    links_[link_index(link)].blackouts.push_back({at_us, at_us + duration_us, 1.0});
}

void Simulator::add_loss_spike(LinkId link, Micros at_us, double prob, Micros duration_us) {
    assert(duration_us > 0 && prob >= 0.0 && prob <= 1.0);
    links_[link_index(link)].loss_spikes.push_back({at_us, at_us + duration_us, prob});
}

void Simulator::schedule(const FaultEvent& fault) {
    switch (fault.kind) {
        case FaultEvent::Kind::blackout:
            add_blackout(fault.link, fault.at_us, fault.duration_us);
            break;
        case FaultEvent::Kind::loss_spike:
            add_loss_spike(fault.link, fault.at_us, fault.prob, fault.duration_us);
            break;
        default:
            break;  // node/system faults belong to the supervision layer
    }
}

void Simulator::inject(LinkId link, std::vector<std::uint8_t> datagram, Micros now_us) {
    assert(now_us >= last_inject_us_ && now_us >= clock_.now_us);
    last_inject_us_ = now_us;

    LinkState& ls = links_[link_index(link)];
    ls.counters.injected += 1;

    if (ls.in_blackout(now_us)) {
        ls.counters.blackout_dropped += 1;
        return;
    }
    const double p = ls.loss_at(now_us);
    if (p >= 1.0) {
        ls.counters.loss_dropped += 1;
        return;
    }
    if (p > 0.0 && ls.rng.next_double() < p) {
        ls.counters.loss_dropped += 1;
        return;
    }

    // Packets whose service started are no longer waiting.
    while (!ls.waiting.empty() && ls.waiting.front().first <= now_us) {
        ls.waiting_bytes -= ls.waiting.front().second;
        ls.waiting.pop_front();
    }

    const auto bytes = static_cast<std::uint32_t>(datagram.size());
    const Micros service_start = std::max(now_us, ls.busy_until_us);
    if (service_start > now_us) {
        if (ls.waiting_bytes + bytes > ls.cfg.queue_limit_bytes) {
            ls.counters.saturation_dropped += 1;
            return;
        }
        ls.waiting.emplace_back(service_start, bytes);
        ls.waiting_bytes += bytes;
    }

    // Serialization time at capacity; capacity in kbit/s makes this
    // bits * 1000 / kbps microseconds, exact for the configs in use.
    const Micros tx_us =
        static_cast<Micros>(static_cast<std::uint64_t>(bytes) * 8 * 1000 /
                            static_cast<std::uint64_t>(ls.cfg.capacity.kbps));
    ls.busy_until_us = service_start + tx_us;

    const Micros jitter = ls.cfg.jitter_us > 0 ? ls.rng.next_below(ls.cfg.jitter_us) : 0;
    const Micros arrival = service_start + ls.cfg.base_latency_us + jitter;
    pending_.push({arrival, next_order_++, link, std::move(datagram)});
}

std::vector<Delivery> Simulator::step(Micros until_us) {
    assert(until_us >= clock_.now_us);
    std::vector<Delivery> out;
    while (!pending_.empty() && pending_.top().arrival_us <= until_us) {
        // priority_queue::top() is const; the datagram buffer is moved out
        // via const_cast right before pop, which never observes it again.
        Pending& top = const_cast<Pending&>(pending_.top());
        LinkState& ls = links_[link_index(top.link)];
        ls.counters.delivered += 1;
        ls.counters.delivered_bytes += top.datagram.size();
        out.push_back({top.arrival_us, top.link, std::move(top.datagram)});
        pending_.pop();
    }
    clock_.now_us = until_us;
    return out;
}

std::vector<Delivery> Simulator::drain() {
    if (pending_.empty()) return {};
    Micros last = clock_.now_us;
    // Arrival times already scheduled cannot change, so stepping to the
    // current maximum is exhaustive.
    std::vector<Delivery> out;
    while (!pending_.empty()) {
        last = std::max(last, pending_.top().arrival_us);
        auto batch = step(last);
        out.insert(out.end(), std::make_move_iterator(batch.begin()),
                   std::make_move_iterator(batch.end()));
    }
    return out;
}

std::uint64_t Simulator::injected_total() const {
    return links_[0].counters.injected + links_[1].counters.injected;
}

}  // namespace telelink
