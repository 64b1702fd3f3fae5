#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "telelink/units.hpp"

namespace telelink {

// The two physical WiFi links. Every datagram is tagged with exactly one.
enum class LinkId : std::uint8_t { band5 = 0, band24 = 1 };

constexpr std::array<LinkId, 2> all_links{LinkId::band5, LinkId::band24};

constexpr std::size_t link_index(LinkId l) { return static_cast<std::size_t>(l); }
const char* link_name(LinkId l);   // "band5" / "band24"
const char* link_label(LinkId l);  // "5GHz" / "2.4GHz"

enum class Direction : std::uint8_t { downlink = 0, uplink = 1 };

constexpr std::array<Direction, 2> all_directions{Direction::downlink, Direction::uplink};

constexpr std::size_t direction_index(Direction d) { return static_cast<std::size_t>(d); }
const char* direction_name(Direction d);

// The subset of links a stream is assigned to.
struct LinkSet {
    bool band5 = false;
    bool band24 = false;

    constexpr bool contains(LinkId l) const { return l == LinkId::band5 ? band5 : band24; }
    constexpr int count() const { return static_cast<int>(band5) + static_cast<int>(band24); }
    constexpr bool both() const { return band5 && band24; }
    constexpr bool empty() const { return !band5 && !band24; }
    // Valid only when count() == 1.
    constexpr LinkId single() const { return band5 ? LinkId::band5 : LinkId::band24; }

    friend constexpr bool operator==(LinkSet, LinkSet) = default;
};

inline constexpr LinkSet both_links{true, true};
inline constexpr LinkSet band5_only{true, false};
inline constexpr LinkSet band24_only{false, true};

// One declared data stream of the static configuration.
struct StreamSpec {
    std::uint16_t stream_id = 0;
    std::string name;
    Direction direction = Direction::downlink;
    Mbps budget;
    LinkSet links;
    bool redundant = false;
    RateHz nominal_rate;

    // Why this stream declaration violates its invariants, or nullopt if well formed.
    std::optional<std::string> invalid_reason() const;
};

struct AdmissionError {
    enum class Kind {
        invalid_spec,
        duplicate_stream_id,
        redundant_needs_both_links,
        budget_exceeded,
    };

    Kind kind;
    std::string message;
    // Populated for budget_exceeded:
    std::optional<LinkId> link;
    Mbps attempted_total{};
    Mbps capacity{};
};

// Static stream table with per-(link, direction) admission control. Streams
// are admitted only while the per-link budget sums stay within capacity, so
// an accepted registry cannot produce bandwidth spikes at runtime. Mutable
// while the configuration is assembled, treated as frozen afterwards.
class StreamRegistry {
public:
    static constexpr std::int64_t default_band5_capacity_kbps = 50'000;
    static constexpr std::int64_t default_band24_capacity_kbps = 20'000;

    StreamRegistry();
    StreamRegistry(Mbps band5_capacity, Mbps band24_capacity);

    // All-or-nothing: on error the registry is unchanged.
    std::optional<AdmissionError> register_stream(const StreamSpec& spec);

    const std::vector<StreamSpec>& streams() const { return streams_; }
    const StreamSpec* find(std::uint16_t stream_id) const;
    const StreamSpec* find(std::string_view name) const;

    Mbps capacity(LinkId link) const { return capacity_[link_index(link)]; }
    Mbps load(LinkId link, Direction dir) const {
        return load_[direction_index(dir)][link_index(link)];
    }

private:
    std::vector<StreamSpec> streams_;
    std::array<Mbps, 2> capacity_{};
    std::array<std::array<Mbps, 2>, 2> load_{};  // [direction][link]
};

struct BudgetTable {
    struct Row {
        std::string name;
        Direction direction;
        Mbps budget;
        LinkSet links;
        bool redundant;
    };

    std::vector<Row> rows;
    std::array<std::array<Mbps, 2>, 2> totals{};  // [direction][link]

    Mbps total(Direction d, LinkId l) const { return totals[direction_index(d)][link_index(l)]; }
};

// Per-(direction, link) totals over the member streams, exact sums.
BudgetTable budget_table(const StreamRegistry& registry);

}  // namespace telelink
