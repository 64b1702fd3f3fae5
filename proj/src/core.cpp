#include "telelink/core.hpp"

namespace telelink {

const char* link_name(LinkId l) { return l == LinkId::band5 ? "band5" : "band24"; }
const char* link_label(LinkId l) { return l == LinkId::band5 ? "5GHz" : "2.4GHz"; }
const char* direction_name(Direction d) {
    return d == Direction::downlink ? "downlink" : "uplink";
}

std::optional<std::string> StreamSpec::invalid_reason() const {
    if (!budget.positive()) return "budget_mbps must be > 0";
    if (links.empty()) return "links must be a nonempty subset of {band5, band24}";
    if (!nominal_rate.positive()) return "nominal_rate_hz must be > 0";
    return std::nullopt;
}

StreamRegistry::StreamRegistry()
    : StreamRegistry(Mbps::from_kbps(default_band5_capacity_kbps),
                     Mbps::from_kbps(default_band24_capacity_kbps)) {}

StreamRegistry::StreamRegistry(Mbps band5_capacity, Mbps band24_capacity) {
    capacity_[link_index(LinkId::band5)] = band5_capacity;
    capacity_[link_index(LinkId::band24)] = band24_capacity;
}

std::optional<AdmissionError> StreamRegistry::register_stream(const StreamSpec& spec) {
    // The redundancy/link-set mismatch has its own error kind; everything
    // else the spec can get wrong about itself is invalid_spec.
    if (spec.redundant && !spec.links.both()) {
        return AdmissionError{AdmissionError::Kind::redundant_needs_both_links,
                              "stream \"" + spec.name +
                                  "\" is redundant but not assigned to both links",
                              std::nullopt,
                              {},
                              {}};
    }
    if (auto reason = spec.invalid_reason()) {
        return AdmissionError{
            AdmissionError::Kind::invalid_spec,
            "stream \"" + spec.name + "\": " + *reason,
            std::nullopt,
            {},
            {},
        };
    }
    if (find(spec.stream_id) != nullptr) {
        return AdmissionError{AdmissionError::Kind::duplicate_stream_id,
                              "stream_id " + std::to_string(spec.stream_id) +
                                  " already registered",
                              std::nullopt,
                              {},
                              {}};
    }
    for (LinkId link : all_links) {
        if (!spec.links.contains(link)) continue;
        const Mbps attempted = load(link, spec.direction) + spec.budget;
        if (attempted > capacity(link)) {
            return AdmissionError{AdmissionError::Kind::budget_exceeded,
                                  "stream \"" + spec.name + "\" would bring " +
                                      std::string(direction_name(spec.direction)) + " load on " +
                                      link_label(link) + " to " + attempted.str() +
                                      " MBit/s, capacity " + capacity(link).str(),
                                  link,
                                  attempted,
                                  capacity(link)};
        }
    }

    for (LinkId link : all_links) {
        if (spec.links.contains(link)) {
            load_[direction_index(spec.direction)][link_index(link)] += spec.budget;
        }
    }
    streams_.push_back(spec);
    return std::nullopt;
}

const StreamSpec* StreamRegistry::find(std::uint16_t stream_id) const {
    for (const auto& s : streams_) {
        if (s.stream_id == stream_id) return &s;
    }
    return nullptr;
}

const StreamSpec* StreamRegistry::find(std::string_view name) const {
    for (const auto& s : streams_) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

BudgetTable budget_table(const StreamRegistry& registry) {
    BudgetTable table;
    for (const auto& s : registry.streams()) {
        table.rows.push_back({s.name, s.direction, s.budget, s.links, s.redundant});
        for (LinkId link : all_links) {
            if (s.links.contains(link)) {
                table.totals[direction_index(s.direction)][link_index(link)] += s.budget;
            }
        }
    }
    return table;
}

}  // namespace telelink
