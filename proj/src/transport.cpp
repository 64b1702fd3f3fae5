#include "telelink/transport.hpp"

#include <algorithm>
#include <cmath>

namespace telelink {

const char* send_error_name(SendError e) {
    switch (e) {
        case SendError::payload_too_large: return "payload_too_large";
        case SendError::sequence_not_increasing: return "sequence_not_increasing";
    }
    return "?";
}

const char* rx_kind_name(RxKind k) {
    switch (k) {
        case RxKind::delivered: return "delivered";
        case RxKind::duplicate: return "duplicate";
        case RxKind::stale: return "stale";
        case RxKind::unknown_stream: return "unknown_stream";
        case RxKind::malformed: return "malformed";
    }
    return "?";
}

Result<std::vector<Emission>, SendError> emit_datagrams(const StreamSpec& spec,
                                                        std::uint32_t seq, Micros now_us,
                                                        std::span<const std::uint8_t> payload) {
    if (payload.size() > wire_max_payload) return SendError::payload_too_large;

    std::vector<Emission> out;
    if (spec.redundant) {
        for (LinkId link : all_links) {
            auto encoded = encode_packet(spec.stream_id, seq, now_us, payload, link,
                                         /*is_copy=*/link == LinkId::band24);
            out.push_back({link, std::move(encoded.value())});
        }
    } else {
        LinkId link;
        if (spec.links.both()) {
            link = (seq % 2 == 0) ? LinkId::band5 : LinkId::band24;
        } else {
            link = spec.links.single();
        }
        auto encoded = encode_packet(spec.stream_id, seq, now_us, payload, link, false);
        out.push_back({link, std::move(encoded.value())});
    }
    return out;
}

Result<std::vector<Emission>, SendError> StreamSender::send(
    std::uint32_t seq, Micros now_us, std::span<const std::uint8_t> payload) {
    if (last_seq_ && seq <= *last_seq_) return SendError::sequence_not_increasing;
    auto result = emit_datagrams(spec_, seq, now_us, payload);
    if (result.ok()) {
        last_seq_ = seq;
        emitted_msgs_ += 1;
        emitted_copies_ += result.value().size();
    }
    return result;
}

Result<std::vector<Emission>, SendError> StreamSender::send_next(
    Micros now_us, std::span<const std::uint8_t> payload) {
    return send(last_seq_ ? *last_seq_ + 1 : 0, now_us, payload);
}

LatencyStats StreamStats::latency_percentiles() const {
    LatencyStats out;
    if (latencies.empty()) return out;
    std::vector<Micros> sorted(latencies);
    std::sort(sorted.begin(), sorted.end());
    auto nearest_rank = [&](double p) {
        std::size_t rank = static_cast<std::size_t>(
            std::ceil(p / 100.0 * static_cast<double>(sorted.size())));
        if (rank == 0) rank = 1;
        return sorted[rank - 1];
    };
    out.p50 = nearest_rank(50.0);
    out.p95 = nearest_rank(95.0);
    out.p99 = nearest_rank(99.0);
    return out;
}

std::optional<Micros> StreamStats::latency_p99() const {
    if (latencies.empty()) return std::nullopt;
    std::vector<Micros> copy(latencies);
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(0.99 * static_cast<double>(copy.size())));
    if (rank == 0) rank = 1;
    std::nth_element(copy.begin(), copy.begin() + (rank - 1), copy.end());
    return copy[rank - 1];
}

RxOutcome Receiver::receive(std::span<const std::uint8_t> datagram, Micros now_us) {
    auto decoded = decode_packet(datagram);
    if (!decoded.ok()) {
        malformed_ += 1;
        return {RxKind::malformed, 0, 0, {}};
    }
    const PacketHeader& h = decoded.value().header;

    if (registry_->find(h.stream_id) == nullptr) {
        unknown_ += 1;
        return {RxKind::unknown_stream, 0, h.stream_id, {}};
    }

    PerStream& ps = streams_[h.stream_id];
    RxRecord& rec = ps.record;

    const bool restart = rec.highest_seq && h.seq == 0 &&
                         h.timestamp_us > rec.last_delivered_ts_us + restart_gap_us;
    if (restart) rec.reset();

    if (rec.highest_seq) {
        // Serial-number comparison over the u32 half-range.
        const std::int32_t ahead = static_cast<std::int32_t>(h.seq - *rec.highest_seq);
        if (ahead <= 0) {
            const std::uint32_t behind = *rec.highest_seq - h.seq;
            if (behind >= dedup_window) {
                ps.stats.stale += 1;
                return {RxKind::stale, 0, h.stream_id, {}};
            }
            if (rec.seen(h.seq)) {
                ps.stats.duplicates += 1;
                return {RxKind::duplicate, 0, h.stream_id, {}};
            }
            // Late first copy inside the window: deliver without advancing
            // the high-water mark.
        }
    }

    rec.mark(h.seq);
    if (!rec.highest_seq || static_cast<std::int32_t>(h.seq - *rec.highest_seq) > 0)
        rec.highest_seq = h.seq;
    if (h.timestamp_us > rec.last_delivered_ts_us) rec.last_delivered_ts_us = h.timestamp_us;

    const Micros latency = now_us >= h.timestamp_us ? now_us - h.timestamp_us : 0;
    ps.stats.delivered += 1;
    ps.stats.delivered_per_link[link_index(h.link)] += 1;
    ps.stats.last_arrival_per_link[link_index(h.link)] = now_us;
    ps.stats.last_arrival_us = now_us;
    ps.stats.latencies.push_back(latency);
    return {RxKind::delivered, latency, h.stream_id, decoded.value().payload};
}

const StreamStats* Receiver::stats(std::uint16_t stream_id) const {
    auto it = streams_.find(stream_id);
    return it == streams_.end() ? nullptr : &it->second.stats;
}

std::uint64_t Receiver::outcome_total() const {
    std::uint64_t total = malformed_ + unknown_;
    for (const auto& [id, ps] : streams_) {
        total += ps.stats.delivered + ps.stats.duplicates + ps.stats.stale;
    }
    return total;
}

}  // namespace telelink
