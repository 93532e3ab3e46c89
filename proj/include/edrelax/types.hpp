#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace edrelax {

/// Sentinel for a relaxed net-charging requirement: a requirement this low is
/// slack at any bounded schedule, so the constraint never binds.
inline constexpr double kEnergyReqRelaxed = -100000.0;

/// Bounds at or beyond this magnitude are treated as absent.
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

inline bool is_unbounded(double v) { return !std::isfinite(v) || std::abs(v) >= 1e29; }

/// Dispatch horizon: `steps` intervals of `dt_hours` each. Step indices are
/// 0-based in code; formulas written for t = 1..T map to t-1 here.
struct Horizon {
  int steps = 1;
  double dt_hours = 1.0;
};

struct Line {
  int from_bus = 0;
  int to_bus = 0;
  double reactance = 0.1;  // p.u., > 0
  double flow_min = -kInfinity;  // MW, from->to orientation
  double flow_max = kInfinity;   // MW
};

struct Network {
  int n_buses = 1;
  int slack_bus = 0;
  std::vector<Line> lines;
  /// Generation shift factors, lines x buses. Column at the slack bus is zero.
  /// Filled by compute_gsf(); row j dotted with a bus injection vector gives
  /// the MW flow on line j.
  Eigen::MatrixXd gsf;
};

struct Generator {
  int bus = 0;
  double p_min = 0.0;  // MW
  double p_max = 0.0;  // MW
  /// Ramp bounds are per step (the step length lives in Horizon.dt_hours):
  /// ramp_down <= P(t+1) - P(t) <= ramp_up, with ramp_down <= 0 <= ramp_up.
  double ramp_up = kInfinity;
  double ramp_down = -kInfinity;
  double cost_quadratic = 0.0;  // $/MW^2 h
  double cost_linear = 0.0;     // $/MWh
  /// Time-varying capacity for renewable units (empty for thermal units).
  /// When present it has one entry per step and replaces p_max.
  std::vector<double> p_max_profile;

  bool is_renewable() const { return !p_max_profile.empty(); }
  double p_max_at(int t) const {
    return p_max_profile.empty() ? p_max : p_max_profile[static_cast<size_t>(t)];
  }
  double marginal_cost(double p) const { return 2.0 * cost_quadratic * p + cost_linear; }
};

struct StorageDevice {
  int bus = 0;
  std::vector<double> ch_max;  // MW per step, size T
  std::vector<double> dc_max;  // MW per step, size T
  double eta_ch = 1.0;         // (0,1]
  double eta_dc = 1.0;         // (0,1], eta_ch*eta_dc < 1 strictly
  double self_discharge = 0.0; // fraction lost per step, in [0,1)
  double e0 = 0.0;             // MWh at the start of the horizon
  std::vector<double> e_min;   // MWh, size T
  std::vector<double> e_max;   // MWh, size T
  double e_req = kEnergyReqRelaxed;  // MWh net-charging requirement

  double retention() const { return 1.0 - self_discharge; }  // xi
  double eta_cycle() const { return eta_ch * eta_dc; }
  bool e_req_relaxed() const { return e_req <= kEnergyReqRelaxed; }
};

/// Storage price entries: charging fee f(x) = f_slope * x (income to the grid
/// when f_slope > 0), discharging cost g(x) = g_quad * x^2 + g_lin * x.
struct StoragePrice {
  double f_slope = 0.0;  // $/MWh
  double g_quad = 0.0;   // $/MW^2 h, >= 0
  double g_lin = 0.0;    // $/MWh, >= 0

  double g_prime(double p_dc) const { return 2.0 * g_quad * p_dc + g_lin; }
};

/// Scenario tags follow the three sign patterns the model admits:
///   1: f' < 0, g' > 0   (both charging and discharging are grid costs)
///   2: f' = 0, g' = 0   (storage cost neglected, grid-owned storage)
///   3: f' > 0, g' > 0   (storage pays for charging, is paid for discharging)
struct PriceModel {
  int scenario = 2;
  std::vector<StoragePrice> storages;  // one entry per storage device
};

struct LoadProfile {
  Eigen::MatrixXd demand;  // buses x steps, MW
};

struct NetworkCase {
  Horizon horizon;
  Network network;
  std::vector<Generator> generators;
  std::vector<StorageDevice> storages;
  PriceModel prices;
  LoadProfile loads;
};

/// Cheap structural+numeric hash used to pair solutions with the case they
/// were solved on (oracle/relaxed comparisons refuse mismatched inputs).
std::uint64_t fingerprint_case(const NetworkCase& c);

/// Broadcast helper: scalar limits become constant T-vectors at ingestion.
inline std::vector<double> broadcast(double v, int steps) {
  return std::vector<double>(static_cast<size_t>(steps), v);
}

}  // namespace edrelax
