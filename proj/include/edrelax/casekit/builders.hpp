#pragma once

#include "edrelax/types.hpp"

#include <string>

namespace edrelax::casekit {

/// MATPOWER-format text of the bundled IEEE 30-bus network (bus, branch and
/// gen matrices). The reference scenario builder parses this text, so the
/// importer is exercised on every build.
const std::string& ieee30_matpower_text();

/// The 30-bus reference scenario: five thermal units (buses 1, 13, 22, 23,
/// 27) with quadratic costs and per-step ramp limits, a wind plant at bus 2
/// modeled as a zero-cost unit with a time-varying capacity, 50 storage
/// devices spread over the PQ buses, grid-owned storage prices (scenario 2),
/// and a synthetic 24-hour double-peak load shape at 15-minute resolution.
/// Load levels, wind shape and storage sizes are artifact defaults, not
/// measured data.
NetworkCase build_ieee30_scenario();

/// A deliberately inexact instance: the storage earns 24 $/MWh for charging
/// while energy costs the grid far less, so with the complementarity
/// constraint dropped the optimum burns energy by charging and discharging in
/// the same step. The discharge price 25 clears the charge price 24 (group A
/// price condition holds) but the realized LMP sits well below 24, violating
/// the LMP-side condition.
NetworkCase build_counterexample_case();

}  // namespace edrelax::casekit
