#include <doctest.h>

#include <algorithm>
#include <vector>

#include "telelink/netsim.hpp"
#include "telelink/rng.hpp"
#include "telelink/transport.hpp"

using namespace telelink;

namespace {

StreamSpec make_stream(std::uint16_t id, std::string name, Direction dir, double mbps,
                       LinkSet links, bool redundant, double rate_hz = 100.0) {
    StreamSpec s;
    s.stream_id = id;
    s.name = std::move(name);
    s.direction = dir;
    s.budget = Mbps::from_mbps(mbps);
    s.links = links;
    s.redundant = redundant;
    s.nominal_rate = RateHz::from_hz(rate_hz);
    return s;
}

StreamRegistry one_stream_registry(const StreamSpec& spec) {
    StreamRegistry registry;
    REQUIRE(!registry.register_stream(spec));
    return registry;
}

const std::vector<std::uint8_t> payload{0xde, 0xad};

}  // namespace

TEST_CASE("redundant stream emits one copy per link with equal seq and payload") {
    const StreamSpec audio =
        make_stream(6, "Audio", Direction::uplink, 0.4, both_links, true, 93.75);
    auto r = emit_datagrams(audio, 7, 1000, payload);
    REQUIRE(r.ok());
    REQUIRE(r.value().size() == 2);

    const auto& a = r.value()[0];
    const auto& b = r.value()[1];
    CHECK(a.link == LinkId::band5);
    CHECK(b.link == LinkId::band24);

    auto da = decode_packet(a.datagram);
    auto db = decode_packet(b.datagram);
    REQUIRE(da.ok());
    REQUIRE(db.ok());
    CHECK(da.value().header.seq == 7);
    CHECK(db.value().header.seq == 7);
    CHECK(!da.value().header.is_copy);
    CHECK(db.value().header.is_copy);  // the band24 copy carries the flag
    CHECK(std::equal(da.value().payload.begin(), da.value().payload.end(),
                     db.value().payload.begin(), db.value().payload.end()));
}

TEST_CASE("single-link stream emits exactly one datagram on its link") {
    const StreamSpec cams =
        make_stream(3, "Main cameras", Direction::downlink, 14.7, band5_only, false, 46);
    auto r = emit_datagrams(cams, 3, 0, payload);
    REQUIRE(r.ok());
    REQUIRE(r.value().size() == 1);
    CHECK(r.value()[0].link == LinkId::band5);
}

TEST_CASE("non-redundant dual-link stream alternates links by seq parity") {
    const StreamSpec diag =
        make_stream(5, "Diagnostics", Direction::downlink, 0.4, both_links, false, 10);
    for (std::uint32_t seq = 0; seq < 8; ++seq) {
        auto r = emit_datagrams(diag, seq, 0, payload);
        REQUIRE(r.ok());
        REQUIRE(r.value().size() == 1);
        CHECK(r.value()[0].link == (seq % 2 == 0 ? LinkId::band5 : LinkId::band24));
    }
}

TEST_CASE("sender rejects non-increasing sequence numbers") {
    StreamSender sender(make_stream(1, "s", Direction::downlink, 1.0, band5_only, false));
    REQUIRE(sender.send(5, 0, payload).ok());
    auto again = sender.send(5, 1, payload);
    REQUIRE(!again.ok());
    CHECK(again.error() == SendError::sequence_not_increasing);
    auto backwards = sender.send(4, 2, payload);
    REQUIRE(!backwards.ok());
    CHECK(backwards.error() == SendError::sequence_not_increasing);
    CHECK(sender.emitted_msgs() == 1);
}

TEST_CASE("receiver delivers first copy and flags the second as duplicate") {
    const StreamSpec audio =
        make_stream(6, "Audio", Direction::uplink, 0.4, both_links, true, 93.75);
    const StreamRegistry registry = one_stream_registry(audio);
    Receiver rx(registry);

    auto emissions = emit_datagrams(audio, 0, 100, payload);
    REQUIRE(emissions.ok());
    const auto first = rx.receive(emissions.value()[0].datagram, 150);
    const auto second = rx.receive(emissions.value()[1].datagram, 180);
    CHECK(first.kind == RxKind::delivered);
    CHECK(first.latency_us == 50);
    CHECK(second.kind == RxKind::duplicate);

    const StreamStats* stats = rx.stats(6);
    REQUIRE(stats != nullptr);
    CHECK(stats->delivered == 1);
    CHECK(stats->duplicates == 1);
}

TEST_CASE("receiver classifies hostile input without aborting") {
    const StreamSpec spec = make_stream(1, "s", Direction::downlink, 1.0, band5_only, false);
    const StreamRegistry registry = one_stream_registry(spec);
    Receiver rx(registry);

    SUBCASE("19-byte datagram is malformed") {
        std::vector<std::uint8_t> short_frame(19, 0x41);
        CHECK(rx.receive(short_frame, 0).kind == RxKind::malformed);
        CHECK(rx.malformed() == 1);
    }
    SUBCASE("unknown stream id") {
        auto r = encode_packet(999, 0, 0, payload, LinkId::band5, false);
        REQUIRE(r.ok());
        CHECK(rx.receive(r.value(), 10).kind == RxKind::unknown_stream);
        CHECK(rx.unknown_stream() == 1);
    }
}

TEST_CASE("seqs older than the dedup window are stale") {
    const StreamSpec spec = make_stream(1, "s", Direction::downlink, 1.0, band5_only, false);
    const StreamRegistry registry = one_stream_registry(spec);
    Receiver rx(registry);

    auto at = [&](std::uint32_t seq, Micros t) {
        auto r = encode_packet(1, seq, t, payload, LinkId::band5, false);
        REQUIRE(r.ok());
        return rx.receive(r.value(), t);
    };

    CHECK(at(2000, 100).kind == RxKind::delivered);
    // 2000 - 100 = 1900 >= window 1024.
    CHECK(at(100, 200).kind == RxKind::stale);
    // Just inside the window: 2000 - 1000 = 1000 < 1024, late first arrival.
    CHECK(at(1000, 300).kind == RxKind::delivered);
    CHECK(at(1000, 400).kind == RxKind::duplicate);
    const StreamStats* stats = rx.stats(1);
    CHECK(stats->delivered == 2);
    CHECK(stats->stale == 1);
    CHECK(stats->duplicates == 1);
}

TEST_CASE("out-of-order arrivals inside the window deliver exactly once") {
    const StreamSpec spec = make_stream(1, "s", Direction::downlink, 1.0, band5_only, false);
    const StreamRegistry registry = one_stream_registry(spec);
    Receiver rx(registry);

    auto at = [&](std::uint32_t seq) {
        auto r = encode_packet(1, seq, 1000, payload, LinkId::band5, false);
        return rx.receive(r.value(), 1000);
    };
    CHECK(at(10).kind == RxKind::delivered);
    CHECK(at(5).kind == RxKind::delivered);
    CHECK(at(5).kind == RxKind::duplicate);
    CHECK(at(11).kind == RxKind::delivered);
}

TEST_CASE("sequence numbers wrap with serial comparison") {
    const StreamSpec spec = make_stream(1, "s", Direction::downlink, 1.0, band5_only, false);
    const StreamRegistry registry = one_stream_registry(spec);
    Receiver rx(registry);

    auto at = [&](std::uint32_t seq, Micros t) {
        auto r = encode_packet(1, seq, t, payload, LinkId::band5, false);
        return rx.receive(r.value(), t);
    };
    CHECK(at(0xFFFFFFFE, 100).kind == RxKind::delivered);
    CHECK(at(0xFFFFFFFF, 200).kind == RxKind::delivered);
    // Timestamps close together, so this is a wrap, not a restart.
    CHECK(at(0, 300).kind == RxKind::delivered);
    CHECK(at(1, 400).kind == RxKind::delivered);
    CHECK(at(0xFFFFFFFF, 500).kind == RxKind::duplicate);
    CHECK(rx.stats(1)->delivered == 4);
}

TEST_CASE("a seq-0 packet with a much newer timestamp resets the stream record") {
    const StreamSpec spec = make_stream(1, "s", Direction::downlink, 1.0, band5_only, false);
    const StreamRegistry registry = one_stream_registry(spec);
    Receiver rx(registry);

    auto at = [&](std::uint32_t seq, Micros t) {
        auto r = encode_packet(1, seq, t, payload, LinkId::band5, false);
        return rx.receive(r.value(), t);
    };
    for (std::uint32_t s = 0; s < 4; ++s) CHECK(at(s, 1000 * (s + 1)).kind == RxKind::delivered);
    // Sender restarted: seq 0 again, timestamp more than 1 s newer.
    CHECK(at(0, 6'000'000).kind == RxKind::delivered);
    CHECK(at(1, 6'001'000).kind == RxKind::delivered);
    CHECK(rx.stats(1)->delivered == 6);
}

TEST_CASE("latency percentiles use nearest-rank") {
    const StreamSpec spec = make_stream(1, "s", Direction::downlink, 1.0, band5_only, false);
    const StreamRegistry registry = one_stream_registry(spec);
    Receiver rx(registry);

    // Deliveries with latencies 1..10 ms.
    for (std::uint32_t s = 0; s < 10; ++s) {
        auto r = encode_packet(1, s, 0, payload, LinkId::band5, false);
        REQUIRE(rx.receive(r.value(), (s + 1) * 1000).kind == RxKind::delivered);
    }
    const LatencyStats lat = rx.stats(1)->latency_percentiles();
    CHECK(lat.p50 == Micros{5000});
    CHECK(lat.p95 == Micros{10000});
    CHECK(lat.p99 == Micros{10000});
    CHECK(rx.stats(1)->latency_p99() == Micros{10000});
}

TEST_CASE("no deliveries means no percentiles") {
    StreamStats stats;
    const LatencyStats lat = stats.latency_percentiles();
    CHECK(!lat.p50);
    CHECK(!lat.p95);
    CHECK(!lat.p99);
}

TEST_CASE("copy-loss independence: delivered iff at least one copy survives") {
    const StreamSpec audio =
        make_stream(6, "Audio", Direction::uplink, 0.4, both_links, true, 93.75);
    const StreamRegistry registry = one_stream_registry(audio);

    for (int survivors = 0; survivors < 4; ++survivors) {
        const bool keep_a = (survivors & 1) != 0;
        const bool keep_b = (survivors & 2) != 0;
        Receiver rx(registry);
        auto emissions = emit_datagrams(audio, 1, 0, payload);
        REQUIRE(emissions.ok());
        std::uint64_t delivered = 0;
        if (keep_a && rx.receive(emissions.value()[0].datagram, 10).kind == RxKind::delivered)
            delivered += 1;
        if (keep_b && rx.receive(emissions.value()[1].datagram, 20).kind == RxKind::delivered)
            delivered += 1;
        CHECK(delivered == ((keep_a || keep_b) ? 1 : 0));
    }
}

TEST_CASE("at-most-once delivery under randomized interleavings") {
    const StreamSpec audio =
        make_stream(6, "Audio", Direction::uplink, 0.4, both_links, true, 93.75);
    const StreamRegistry registry = one_stream_registry(audio);
    Xoshiro256 rng(99);

    for (int trial = 0; trial < 500; ++trial) {
        const std::uint32_t n = 8 + static_cast<std::uint32_t>(rng.next_below(24));
        std::vector<std::vector<std::uint8_t>> copies;
        for (std::uint32_t s = 0; s < n; ++s) {
            auto emissions = emit_datagrams(audio, s, s * 10, payload);
            REQUIRE(emissions.ok());
            for (auto& e : emissions.value()) copies.push_back(std::move(e.datagram));
        }
        for (std::size_t i = copies.size(); i > 1; --i) {
            std::swap(copies[i - 1], copies[rng.next_below(i)]);
        }
        Receiver rx(registry);
        std::vector<int> delivered_per_seq(n, 0);
        for (const auto& c : copies) {
            const RxOutcome outcome = rx.receive(c, 1'000'000);
            if (outcome.kind == RxKind::delivered) {
                delivered_per_seq[decode_packet(c).value().header.seq] += 1;
            }
        }
        for (std::uint32_t s = 0; s < n; ++s) CHECK(delivered_per_seq[s] == 1);
        CHECK(rx.stats(6)->delivered == n);
        CHECK(rx.stats(6)->duplicates == n);
    }
}

TEST_CASE("redundant stream survives 100% loss on band5") {
    const StreamSpec audio =
        make_stream(6, "Audio", Direction::uplink, 0.4, both_links, true, 93.75);
    const StreamRegistry registry = one_stream_registry(audio);

    LinkConfig band5;
    band5.link = LinkId::band5;
    band5.loss_prob = 1.0;
    band5.base_latency_us = 3000;
    LinkConfig band24;
    band24.link = LinkId::band24;
    band24.base_latency_us = 8000;

    Simulator sim(band5, band24, 11);
    Receiver rx(registry);
    StreamSender sender(audio);

    const int n = 1000;
    for (int i = 0; i < n; ++i) {
        const Micros t = static_cast<Micros>(i) * 500;
        auto emissions = sender.send_next(t, payload);
        REQUIRE(emissions.ok());
        for (auto& e : emissions.value()) sim.inject(e.link, std::move(e.datagram), t);
    }
    for (auto& d : sim.drain()) rx.receive(d.datagram, d.arrival_us);

    CHECK(rx.stats(6)->delivered == n);  // delivery ratio 1.0 via band24
    CHECK(rx.stats(6)->delivered_per_link[link_index(LinkId::band5)] == 0);
    CHECK(sim.counters(LinkId::band5).loss_dropped == n);
}

TEST_CASE("end-to-end loss of a redundant stream follows the p^2 product law") {
    const StreamSpec audio =
        make_stream(6, "Audio", Direction::uplink, 0.4, both_links, true, 93.75);
    const StreamRegistry registry = one_stream_registry(audio);

    LinkConfig band5;
    band5.link = LinkId::band5;
    band5.loss_prob = 0.1;
    LinkConfig band24;
    band24.link = LinkId::band24;
    band24.base_latency_us = 8000;
    band24.loss_prob = 0.1;

    Simulator sim(band5, band24, 271828);
    Receiver rx(registry);
    StreamSender sender(audio);

    const std::uint64_t n = 100'000;
    for (std::uint64_t i = 0; i < n; ++i) {
        const Micros t = i * 20;
        auto emissions = sender.send_next(t, payload);
        REQUIRE(emissions.ok());
        for (auto& e : emissions.value()) sim.inject(e.link, std::move(e.datagram), t);
        if (i % 512 == 0) {
            for (auto& d : sim.step(t)) rx.receive(d.datagram, d.arrival_us);
        }
    }
    for (auto& d : sim.drain()) rx.receive(d.datagram, d.arrival_us);

    const double loss =
        1.0 - static_cast<double>(rx.stats(6)->delivered) / static_cast<double>(n);
    // Analytic oracle for independent links: p^2 = 0.01, tolerance 0.005.
    CHECK(loss > 0.005);
    CHECK(loss < 0.015);
}

TEST_CASE("delivered latency of a redundant packet is the minimum over copies") {
    const StreamSpec audio =
        make_stream(6, "Audio", Direction::uplink, 0.4, both_links, true, 93.75);
    const StreamRegistry registry = one_stream_registry(audio);

    LinkConfig band5;
    band5.link = LinkId::band5;
    band5.base_latency_us = 10'000;  // fixed 10 ms
    LinkConfig band24;
    band24.link = LinkId::band24;
    band24.base_latency_us = 30'000;  // fixed 30 ms

    Simulator sim(band5, band24, 1);
    Receiver rx(registry);
    StreamSender sender(audio);

    for (int i = 0; i < 200; ++i) {
        const Micros t = static_cast<Micros>(i) * 11'000;  // spaced beyond the skew
        auto emissions = sender.send_next(t, payload);
        REQUIRE(emissions.ok());
        for (auto& e : emissions.value()) sim.inject(e.link, std::move(e.datagram), t);
    }
    for (auto& d : sim.drain()) rx.receive(d.datagram, d.arrival_us);

    const StreamStats* stats = rx.stats(6);
    REQUIRE(stats != nullptr);
    CHECK(stats->delivered == 200);
    for (Micros l : stats->latencies) CHECK(l == 10'000);
}
