#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "telelink/core.hpp"
#include "telelink/result.hpp"
#include "telelink/wire.hpp"

namespace telelink {

struct Emission {
    LinkId link;
    std::vector<std::uint8_t> datagram;
};

enum class SendError : std::uint8_t { payload_too_large, sequence_not_increasing };
const char* send_error_name(SendError e);

// Stateless emission for one message of a stream. Redundant streams produce
// one datagram per link with identical seq and payload, the band24 one
// carrying the copy flag. Non-redundant dual-link streams alternate links by
// seq parity (even seq on band5); single-link streams use their link.
Result<std::vector<Emission>, SendError> emit_datagrams(const StreamSpec& spec,
                                                        std::uint32_t seq, Micros now_us,
                                                        std::span<const std::uint8_t> payload);

// Per-stream sender enforcing the strictly-increasing sequence contract.
class StreamSender {
public:
    explicit StreamSender(StreamSpec spec) : spec_(std::move(spec)) {}

    Result<std::vector<Emission>, SendError> send(std::uint32_t seq, Micros now_us,
                                                  std::span<const std::uint8_t> payload);
    // send() with the next sequence number (starting at 0).
    Result<std::vector<Emission>, SendError> send_next(Micros now_us,
                                                       std::span<const std::uint8_t> payload);

    const StreamSpec& spec() const { return spec_; }
    std::uint64_t emitted_msgs() const { return emitted_msgs_; }
    std::uint64_t emitted_copies() const { return emitted_copies_; }

private:
    StreamSpec spec_;
    std::optional<std::uint32_t> last_seq_;
    std::uint64_t emitted_msgs_ = 0;
    std::uint64_t emitted_copies_ = 0;
};

enum class RxKind : std::uint8_t { delivered, duplicate, stale, unknown_stream, malformed };
const char* rx_kind_name(RxKind k);

struct RxOutcome {
    RxKind kind;
    Micros latency_us = 0;                  // valid for delivered
    std::uint16_t stream_id = 0;            // valid unless malformed
    std::span<const std::uint8_t> payload;  // delivered only; views the input datagram
};

struct LatencyStats {
    std::optional<Micros> p50, p95, p99;
};

struct StreamStats {
    std::uint64_t delivered = 0;
    std::uint64_t duplicates = 0;
    std::uint64_t stale = 0;
    std::array<std::uint64_t, 2> delivered_per_link{};  // indexed by LinkId
    std::array<std::optional<Micros>, 2> last_arrival_per_link{};
    std::optional<Micros> last_arrival_us;
    std::vector<Micros> latencies;  // one per delivery, arrival order

    // Nearest-rank percentiles over the delivered latencies; absent when
    // nothing was delivered.
    LatencyStats latency_percentiles() const;
    // p99 alone, via nth_element; cheap enough for per-tick telemetry.
    std::optional<Micros> latency_p99() const;
};

// Receiver-side demultiplexer with per-stream dedup records. First arrival of
// a sequence number is Delivered, later copies are Duplicate, anything older
// than the dedup window is Stale. Never throws on hostile input.
class Receiver {
public:
    // At the fastest stream (1 kHz arm control) the window spans about one
    // second, far beyond any plausible skew between the two links.
    static constexpr std::uint32_t dedup_window = 1024;
    // A seq-0 packet whose timestamp is newer than the last delivered one by
    // more than this gap is treated as a sender restart.
    static constexpr Micros restart_gap_us = 1'000'000;

    explicit Receiver(const StreamRegistry& registry) : registry_(&registry) {}

    RxOutcome receive(std::span<const std::uint8_t> datagram, Micros now_us);

    // Null for stream ids that never appeared.
    const StreamStats* stats(std::uint16_t stream_id) const;

    std::uint64_t malformed() const { return malformed_; }
    std::uint64_t unknown_stream() const { return unknown_; }
    // Sum of all five outcome buckets, for conservation audits.
    std::uint64_t outcome_total() const;

private:
    struct RxRecord {
        std::optional<std::uint32_t> highest_seq;
        Micros last_delivered_ts_us = 0;
        // Ring of recently delivered seqs, slot seq % dedup_window. The
        // stored value disambiguates slot collisions exactly.
        std::vector<std::uint64_t> ring;

        RxRecord() : ring(dedup_window, absent) {}
        static constexpr std::uint64_t absent = ~0ULL;

        bool seen(std::uint32_t seq) const { return ring[seq % dedup_window] == seq; }
        void mark(std::uint32_t seq) { ring[seq % dedup_window] = seq; }
        void reset() {
            highest_seq.reset();
            last_delivered_ts_us = 0;
            ring.assign(dedup_window, absent);
        }
    };

    struct PerStream {
        RxRecord record;
        StreamStats stats;
    };

    const StreamRegistry* registry_;
    std::unordered_map<std::uint16_t, PerStream> streams_;
    std::uint64_t malformed_ = 0;
    std::uint64_t unknown_ = 0;
};

}  // namespace telelink
