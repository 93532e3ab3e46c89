#pragma once

#include "edrelax/types.hpp"

#include <cstdint>

namespace edrelax::casekit {

/// Price/LMP regime the generated instance should land in. Targets shape the
/// draw (price floors, congestion-free limits); whether the conditions
/// actually hold is always re-checked on the solved instance by the caller.
enum class Targeting {
  satisfy_a,   // charging price kept clearly below every realizable LMP
  satisfy_c,   // discharging price clears f'/eta_cycle; costs keep LMPs >= 0
  violate_a2,  // charging price above the whole realizable LMP range
  unconstrained,
};

const char* targeting_name(Targeting t);

struct ScenarioSpec {
  std::uint64_t seed = 0;
  int n_buses = 3;
  int n_storages = 1;
  int horizon_steps = 4;
  /// 0 draws a scenario tag compatible with the targeting; 1..3 forces one.
  int price_scenario = 0;
  double load_scale = 1.0;
  Targeting targeting = Targeting::unconstrained;
};

/// Deterministic in the seed. The produced case always passes validation;
/// generation retries internally on a bad draw and throws after a bounded
/// number of attempts.
NetworkCase generate_random(const ScenarioSpec& spec);

}  // namespace edrelax::casekit
