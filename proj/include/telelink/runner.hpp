#pragma once

#include "telelink/report.hpp"
#include "telelink/scenario.hpp"

namespace telelink {

// Drives one deterministic simulated run: emits every registered stream on
// its schedule through the two-link simulators, feeds receivers, ticks the
// supervisor, device FSMs, watchdog and sysmon, applies the fault schedule
// and drills, and reconciles everything into a RunReport.
//
// Identical (scenario, seed) inputs produce byte-identical reports.
RunReport run_scenario(const Scenario& scenario);

}  // namespace telelink
