#include "telelink/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "telelink/error.hpp"

namespace telelink {

namespace {

using ordered_json = nlohmann::ordered_json;

// Ratios are serialized as fixed 6-decimal strings; shortest-round-trip float
// printing would make byte-identical reports depend on the exact value.
std::string fixed6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

ordered_json opt_us(const std::optional<Micros>& v) {
    if (!v) return nullptr;
    return *v;
}

std::optional<Micros> parse_opt_us(const ordered_json& v) {
    if (v.is_null()) return std::nullopt;
    return v.get<Micros>();
}

Severity parse_severity(const std::string& s) {
    if (s == "ok") return Severity::ok;
    if (s == "warn") return Severity::warn;
    if (s == "stale") return Severity::stale;
    return Severity::fail;
}

}  // namespace

std::string RunReport::to_json_text() const {
    ordered_json j;
    j["schema"] = "telelink-report/1";
    j["scenario"] = scenario_name;
    j["seed"] = seed;
    j["duration_us"] = duration_us;
    j["finished_at_us"] = finished_at_us;
    j["verdict"] = verdict;

    j["streams"] = ordered_json::array();
    for (const auto& s : streams) {
        ordered_json row;
        row["id"] = s.stream_id;
        row["name"] = s.name;
        row["direction"] = direction_name(s.direction);
        row["emitted_msgs"] = s.emitted_msgs;
        row["emitted_copies"] = s.emitted_copies;
        row["delivered"] = s.delivered;
        row["duplicates"] = s.duplicates;
        row["stale"] = s.stale;
        row["lost"] = s.lost;
        row["loss_ratio"] = fixed6(s.loss_ratio);
        row["latency_p50_us"] = opt_us(s.p50_us);
        row["latency_p95_us"] = opt_us(s.p95_us);
        row["latency_p99_us"] = opt_us(s.p99_us);
        j["streams"].push_back(std::move(row));
    }

    j["links"] = ordered_json::array();
    for (const auto& l : links) {
        ordered_json row;
        row["direction"] = direction_name(l.direction);
        row["link"] = link_name(l.link);
        row["injected"] = l.injected;
        row["delivered"] = l.delivered;
        row["delivered_bytes"] = l.delivered_bytes;
        row["loss_dropped"] = l.loss_dropped;
        row["saturation_dropped"] = l.saturation_dropped;
        row["blackout_dropped"] = l.blackout_dropped;
        j["links"].push_back(std::move(row));
    }

    j["checks"] = ordered_json::array();
    for (const auto& c : checks) {
        ordered_json row;
        row["check_id"] = c.check_id;
        row["evaluations"] = c.evaluations;
        row["ok_evaluations"] = c.ok_evaluations;
        row["uptime"] = fixed6(c.uptime);
        row["first_not_ok_at_us"] = opt_us(c.first_not_ok_at_us);
        row["final_status"] = severity_name(c.final_status);
        row["final_message"] = c.final_message;
        j["checks"].push_back(std::move(row));
    }

    j["timeline"] = ordered_json::array();
    for (const auto& t : timeline) {
        ordered_json row;
        row["at_us"] = t.at_us;
        row["component"] = t.component;
        row["event"] = t.event;
        j["timeline"].push_back(std::move(row));
    }

    j["watchdog_resets"] = ordered_json::array();
    for (const auto& r : watchdog_resets) {
        ordered_json row;
        row["expired_at_us"] = r.expired_at_us;
        row["operational_again_at_us"] = opt_us(r.operational_again_at_us);
        j["watchdog_resets"].push_back(std::move(row));
    }

    ordered_json audit;
    audit["emitted_copies_total"] = emitted_copies_total;
    audit["injected_total"] = injected_total;
    audit["net_delivered_total"] = net_delivered_total;
    audit["net_dropped_total"] = net_dropped_total;
    audit["rx_outcome_total"] = rx_outcome_total;
    audit["in_flight_at_end"] = in_flight_at_end;
    j["audit"] = std::move(audit);

    j["final_aggregate"] = severity_name(final_aggregate);

    return j.dump(2) + "\n";
}

void RunReport::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError(path, "cannot open report file for writing");
    out << to_json_text();
}

RunReport RunReport::from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        throw ConfigError("", std::string("report parse error: ") + e.what());
    }

    RunReport r;
    r.scenario_name = j.value("scenario", std::string{});
    r.seed = j.value("seed", std::uint64_t{0});
    r.duration_us = j.value("duration_us", std::uint64_t{0});
    r.finished_at_us = j.value("finished_at_us", std::uint64_t{0});
    r.verdict = j.value("verdict", std::string{});

    for (const auto& row : j.value("streams", ordered_json::array())) {
        StreamReport s;
        s.stream_id = row.value("id", 0);
        s.name = row.value("name", std::string{});
        s.direction = row.value("direction", std::string{"downlink"}) == "uplink"
                          ? Direction::uplink
                          : Direction::downlink;
        s.emitted_msgs = row.value("emitted_msgs", std::uint64_t{0});
        s.emitted_copies = row.value("emitted_copies", std::uint64_t{0});
        s.delivered = row.value("delivered", std::uint64_t{0});
        s.duplicates = row.value("duplicates", std::uint64_t{0});
        s.stale = row.value("stale", std::uint64_t{0});
        s.lost = row.value("lost", std::uint64_t{0});
        s.loss_ratio = std::stod(row.value("loss_ratio", std::string{"0"}));
        s.p50_us = parse_opt_us(row.at("latency_p50_us"));
        s.p95_us = parse_opt_us(row.at("latency_p95_us"));
        s.p99_us = parse_opt_us(row.at("latency_p99_us"));
        r.streams.push_back(std::move(s));
    }

    for (const auto& row : j.value("links", ordered_json::array())) {
        LinkReport l;
        l.direction = row.value("direction", std::string{"downlink"}) == "uplink"
                          ? Direction::uplink
                          : Direction::downlink;
        l.link = row.value("link", std::string{"band5"}) == "band24" ? LinkId::band24
                                                                     : LinkId::band5;
        l.injected = row.value("injected", std::uint64_t{0});
        l.delivered = row.value("delivered", std::uint64_t{0});
        l.delivered_bytes = row.value("delivered_bytes", std::uint64_t{0});
        l.loss_dropped = row.value("loss_dropped", std::uint64_t{0});
        l.saturation_dropped = row.value("saturation_dropped", std::uint64_t{0});
        l.blackout_dropped = row.value("blackout_dropped", std::uint64_t{0});
        r.links.push_back(l);
    }

    for (const auto& row : j.value("checks", ordered_json::array())) {
        CheckReport c;
        c.check_id = row.value("check_id", std::string{});
        c.evaluations = row.value("evaluations", std::uint64_t{0});
        c.ok_evaluations = row.value("ok_evaluations", std::uint64_t{0});
        c.uptime = std::stod(row.value("uptime", std::string{"1"}));
        c.first_not_ok_at_us = parse_opt_us(row.at("first_not_ok_at_us"));
        c.final_status = parse_severity(row.value("final_status", std::string{"ok"}));
        c.final_message = row.value("final_message", std::string{});
        r.checks.push_back(std::move(c));
    }

    for (const auto& row : j.value("timeline", ordered_json::array())) {
        r.timeline.push_back({row.value("at_us", std::uint64_t{0}),
                              row.value("component", std::string{}),
                              row.value("event", std::string{})});
    }

    for (const auto& row : j.value("watchdog_resets", ordered_json::array())) {
        WatchdogReset w;
        w.expired_at_us = row.value("expired_at_us", std::uint64_t{0});
        w.operational_again_at_us = parse_opt_us(row.at("operational_again_at_us"));
        r.watchdog_resets.push_back(w);
    }

    if (j.contains("audit")) {
        const auto& a = j["audit"];
        r.emitted_copies_total = a.value("emitted_copies_total", std::uint64_t{0});
        r.injected_total = a.value("injected_total", std::uint64_t{0});
        r.net_delivered_total = a.value("net_delivered_total", std::uint64_t{0});
        r.net_dropped_total = a.value("net_dropped_total", std::uint64_t{0});
        r.rx_outcome_total = a.value("rx_outcome_total", std::uint64_t{0});
        r.in_flight_at_end = a.value("in_flight_at_end", std::uint64_t{0});
    }

    r.final_aggregate = parse_severity(j.value("final_aggregate", std::string{"ok"}));
    return r;
}

RunReport RunReport::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open report file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

const RunReport::StreamReport* RunReport::stream(std::string_view name) const {
    for (const auto& s : streams) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

const RunReport::CheckReport* RunReport::check(std::string_view check_id) const {
    for (const auto& c : checks) {
        if (c.check_id == check_id) return &c;
    }
    return nullptr;
}

}  // namespace telelink
