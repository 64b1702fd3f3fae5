#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>

namespace telelink {

// All timestamps and durations are microseconds on one shared simulated clock.
using Micros = std::uint64_t;

// Bandwidth as integer kbit/s. Stream budgets in the wireless config are
// small decimals (8.5, 0.4 MBit/s); integer kbit/s keeps table totals exact
// under summation, which float accumulation would not.
struct Mbps {
    std::int64_t kbps = 0;

    static constexpr Mbps from_kbps(std::int64_t v) { return Mbps{v}; }
    static Mbps from_mbps(double v) { return Mbps{std::llround(v * 1000.0)}; }

    constexpr double as_double() const { return static_cast<double>(kbps) / 1000.0; }
    constexpr bool positive() const { return kbps > 0; }

    // "28.1", "11.0", "0.425" -- at least one decimal, trailing zeros trimmed.
    std::string str() const {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%lld.%03lld",
                      static_cast<long long>(kbps / 1000),
                      static_cast<long long>(kbps % 1000 < 0 ? -(kbps % 1000) : kbps % 1000));
        std::string s(buf);
        while (s.size() > 1 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
        return s;
    }

    friend constexpr Mbps operator+(Mbps a, Mbps b) { return Mbps{a.kbps + b.kbps}; }
    friend constexpr Mbps operator-(Mbps a, Mbps b) { return Mbps{a.kbps - b.kbps}; }
    Mbps& operator+=(Mbps o) {
        kbps += o.kbps;
        return *this;
    }
    friend constexpr auto operator<=>(Mbps, Mbps) = default;
};

// Message emission rate with millihertz resolution; the audio stream runs at
// 48000 / 512 = 93.75 Hz, which plain integer hertz cannot represent.
struct RateHz {
    std::int64_t millihertz = 0;

    static constexpr RateHz from_millihertz(std::int64_t v) { return RateHz{v}; }
    static RateHz from_hz(double v) { return RateHz{std::llround(v * 1000.0)}; }

    constexpr bool positive() const { return millihertz > 0; }
    constexpr double hz() const { return static_cast<double>(millihertz) / 1000.0; }

    // k-th emission instant on the ideal schedule, microseconds.
    constexpr Micros emission_time_us(std::int64_t k) const {
        return static_cast<Micros>(k * 1'000'000'000 / millihertz);
    }

    friend constexpr auto operator<=>(RateHz, RateHz) = default;
};

}  // namespace telelink
