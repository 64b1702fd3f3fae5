#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <unistd.h>

#include "telelink/core.hpp"
#include "telelink/error.hpp"
#include "telelink/report.hpp"
#include "telelink/runner.hpp"
#include "telelink/scenario.hpp"

namespace {

using telelink::all_directions;
using telelink::all_links;
using telelink::Direction;
using telelink::LinkId;

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

int cmd_budget(const std::string& config_path, bool as_json) {
    telelink::Scenario sc = telelink::load_scenario(config_path);

    telelink::StreamRegistry registry(sc.band5.capacity, sc.band24.capacity);
    for (std::size_t i = 0; i < sc.streams.size(); ++i) {
        if (auto err = registry.register_stream(sc.streams[i].spec)) {
            std::fprintf(stderr, "budget violation: %s\n", err->message.c_str());
            return 1;
        }
    }
    const telelink::BudgetTable table = telelink::budget_table(registry);

    if (as_json) {
        nlohmann::ordered_json j;
        j["streams"] = nlohmann::ordered_json::array();
        for (const auto& row : table.rows) {
            nlohmann::ordered_json r;
            r["name"] = row.name;
            r["direction"] = direction_name(row.direction);
            r["budget_mbps"] = row.budget.str();
            r["band5"] = row.links.band5;
            r["band24"] = row.links.band24;
            r["redundant"] = row.redundant;
            j["streams"].push_back(std::move(r));
        }
        for (Direction d : all_directions) {
            for (LinkId l : all_links) {
                j["totals"][direction_name(d)][link_name(l)] = table.total(d, l).str();
            }
        }
        for (LinkId l : all_links) {
            j["capacity_mbps"][link_name(l)] = registry.capacity(l).str();
        }
        std::printf("%s\n", j.dump(2).c_str());
        return 0;
    }

    std::printf("%-9s %-18s %7s  %-4s %-6s %s\n", "", "Stream", "MBit/s", "5GHz", "2.4GHz",
                "redundant");
    for (Direction d : all_directions) {
        for (const auto& row : table.rows) {
            if (row.direction != d) continue;
            std::printf("%-9s %-18s %7s  %-4s %-6s %s\n", direction_name(d), row.name.c_str(),
                        row.budget.str().c_str(), row.links.band5 ? "x" : "-",
                        row.links.band24 ? "x" : "-", row.redundant ? "x" : "-");
        }
        std::printf("%-9s %-18s %7s  [5GHz] %s  [2.4GHz] %s\n", direction_name(d), "total", "",
                    table.total(d, LinkId::band5).str().c_str(),
                    table.total(d, LinkId::band24).str().c_str());
    }
    std::printf("capacity: [5GHz] %s  [2.4GHz] %s MBit/s\n",
                registry.capacity(LinkId::band5).str().c_str(),
                registry.capacity(LinkId::band24).str().c_str());
    return 0;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            const std::string& report_path) {
    telelink::Scenario sc = telelink::load_scenario(config_path);
    if (seed) sc.seed = *seed;

    const telelink::RunReport report = telelink::run_scenario(sc);
    if (!report_path.empty()) {
        report.save(report_path);
    }

    std::printf("scenario: %s  seed: %llu  duration: %.3f s\n", report.scenario_name.c_str(),
                static_cast<unsigned long long>(report.seed),
                static_cast<double>(report.duration_us) * 1e-6);
    for (const auto& s : report.streams) {
        std::printf("  %s %9llu msgs  lost %6llu  loss %.6f\n", pad(s.name, 20).c_str(),
                    static_cast<unsigned long long>(s.emitted_msgs),
                    static_cast<unsigned long long>(s.lost), s.loss_ratio);
    }
    std::printf("watchdog resets: %zu  timeline events: %zu  verdict: %s\n",
                report.watchdog_resets.size(), report.timeline.size(),
                report.verdict.c_str());
    if (!report_path.empty()) std::printf("report written to %s\n", report_path.c_str());
    return 0;
}

const char* severity_color(telelink::Severity s) {
    switch (s) {
        case telelink::Severity::ok: return "\x1b[32m";
        case telelink::Severity::warn: return "\x1b[33m";
        case telelink::Severity::stale: return "\x1b[35m";
        case telelink::Severity::fail: return "\x1b[31m";
    }
    return "";
}

int cmd_status(const std::string& report_path, bool as_json) {
    const telelink::RunReport report = telelink::RunReport::load(report_path);
    const bool green = report.final_aggregate == telelink::Severity::ok;

    if (as_json) {
        nlohmann::ordered_json j;
        j["checks"] = nlohmann::ordered_json::array();
        for (const auto& c : report.checks) {
            nlohmann::ordered_json row;
            row["check_id"] = c.check_id;
            row["status"] = severity_name(c.final_status);
            row["message"] = c.final_message;
            j["checks"].push_back(std::move(row));
        }
        j["aggregate"] = severity_name(report.final_aggregate);
        std::printf("%s\n", j.dump(2).c_str());
        return green ? 0 : 1;
    }

    const bool color = isatty(fileno(stdout)) != 0;
    for (const auto& c : report.checks) {
        if (color) {
            std::printf("%s%-6s\x1b[0m %s %s\n", severity_color(c.final_status),
                        severity_name(c.final_status), pad(c.check_id, 40).c_str(),
                        c.final_message.c_str());
        } else {
            std::printf("%-6s %s %s\n", severity_name(c.final_status),
                        pad(c.check_id, 40).c_str(), c.final_message.c_str());
        }
    }
    std::printf("aggregate: %s\n", severity_name(report.final_aggregate));
    return green ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"telelink: redundant dual-link teleoperation transport simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string report_path;
    std::optional<std::uint64_t> seed;
    bool as_json = false;

    CLI::App* run = app.add_subcommand("run", "run a scenario and write a report");
    run->add_option("--config", config_path, "scenario JSON file")->required();
    run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--report", report_path, "write the JSON report here");

    CLI::App* budget = app.add_subcommand("budget", "print the bandwidth budget table");
    budget->add_option("--config", config_path, "scenario JSON file")->required();
    budget->add_flag("--json", as_json, "emit JSON instead of text");

    CLI::App* status = app.add_subcommand("status", "print the final check table of a report");
    status->add_option("--report", report_path, "report JSON file")->required();
    status->add_flag("--json", as_json, "emit JSON instead of text");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, seed, report_path);
        if (budget->parsed()) return cmd_budget(config_path, as_json);
        if (status->parsed()) return cmd_status(report_path, as_json);
    } catch (const telelink::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
