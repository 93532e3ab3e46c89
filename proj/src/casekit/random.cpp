#include "edrelax/casekit/random.hpp"

#include "edrelax/gsf.hpp"
#include "edrelax/rng.hpp"
#include "edrelax/storage.hpp"
#include "edrelax/validate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace edrelax::casekit {

const char* targeting_name(Targeting t) {
  switch (t) {
    case Targeting::satisfy_a: return "satisfy-a";
    case Targeting::satisfy_c: return "satisfy-c";
    case Targeting::violate_a2: return "violate-a2";
    case Targeting::unconstrained: return "unconstrained";
  }
  return "?";
}

namespace {

NetworkCase draw_case(Rng& rng, const ScenarioSpec& spec) {
  NetworkCase c;
  const int N = std::max(1, spec.n_buses);
  const int S = std::max(0, spec.n_storages);
  const int T = std::max(1, spec.horizon_steps);
  c.horizon.steps = T;
  const double dt_options[] = {0.25, 0.5, 1.0};
  c.horizon.dt_hours = dt_options[rng.uniform_int(0, 2)];
  const double dt = c.horizon.dt_hours;

  const bool congestion_free = spec.targeting != Targeting::unconstrained;

  // generators first; loads are scaled to their capacity
  const int n_gen = 1 + (rng.chance(0.6) ? 1 : 0);
  double total_cap = 0.0;
  for (int k = 0; k < n_gen; ++k) {
    Generator g;
    g.bus = rng.uniform_int(0, N - 1);
    g.p_min = 0.0;
    g.p_max = rng.uniform(60.0, 120.0) * spec.load_scale;
    g.cost_quadratic = rng.uniform(0.002, 0.02);
    g.cost_linear = rng.uniform(8.0, 30.0);
    if (rng.chance(0.3)) {
      const double ramp = rng.uniform(0.3, 0.7) * g.p_max;
      g.ramp_up = ramp;
      g.ramp_down = -ramp;
    }
    total_cap += g.p_max;
    c.generators.push_back(std::move(g));
  }

  const double peak_load = rng.uniform(0.45, 0.62) * total_cap;

  // a small never-curtailed wind unit for texture
  if (rng.chance(0.35)) {
    Generator wind;
    wind.bus = rng.uniform_int(0, N - 1);
    wind.p_min = 0.0;
    wind.cost_quadratic = 0.0;
    wind.cost_linear = 0.0;
    const double cap = rng.uniform(0.05, 0.2) * peak_load;
    wind.p_max_profile.resize(static_cast<size_t>(T));
    for (int t = 0; t < T; ++t) wind.p_max_profile[static_cast<size_t>(t)] = cap * rng.uniform(0.2, 1.0);
    wind.p_max = *std::max_element(wind.p_max_profile.begin(), wind.p_max_profile.end());
    c.generators.push_back(std::move(wind));
  }

  // spanning tree plus an occasional extra line
  c.network.n_buses = N;
  c.network.slack_bus = 0;
  for (int b = 1; b < N; ++b) {
    Line ln;
    ln.from_bus = rng.uniform_int(0, b - 1);
    ln.to_bus = b;
    ln.reactance = rng.uniform(0.05, 0.3);
    c.network.lines.push_back(ln);
  }
  if (N >= 3 && rng.chance(0.4)) {
    Line ln;
    ln.from_bus = rng.uniform_int(0, N - 2);
    ln.to_bus = rng.uniform_int(ln.from_bus + 1, N - 1);
    ln.reactance = rng.uniform(0.05, 0.3);
    c.network.lines.push_back(ln);
  }
  for (Line& ln : c.network.lines) {
    const double limit = congestion_free || rng.chance(0.6)
                             ? 2.5 * total_cap
                             : rng.uniform(0.6, 1.5) * peak_load;
    ln.flow_min = -limit;
    ln.flow_max = limit;
  }
  if (!c.network.lines.empty()) c.network.gsf = compute_gsf(c.network);
  else c.network.gsf = Eigen::MatrixXd::Zero(0, N);

  // loads
  std::vector<double> weight(static_cast<size_t>(N));
  double wsum = 0.0;
  for (int b = 0; b < N; ++b) {
    weight[static_cast<size_t>(b)] = rng.uniform(0.2, 1.0);
    wsum += weight[static_cast<size_t>(b)];
  }
  c.loads.demand.resize(N, T);
  for (int t = 0; t < T; ++t) {
    const double level = rng.uniform(0.45, 1.0);
    for (int b = 0; b < N; ++b)
      c.loads.demand(b, t) = peak_load * level * weight[static_cast<size_t>(b)] / wsum;
  }

  // storages
  for (int i = 0; i < S; ++i) {
    StorageDevice s;
    s.bus = rng.uniform_int(0, N - 1);
    const double rate = rng.uniform(2.0, 8.0);
    s.ch_max = broadcast(rate, T);
    s.dc_max = broadcast(rng.uniform(2.0, 8.0), T);
    s.eta_ch = rng.uniform(0.85, 0.97);
    s.eta_dc = rng.uniform(0.85, 0.97);
    const double eps_options[] = {0.0, 0.002, 0.01};
    s.self_discharge = eps_options[rng.uniform_int(0, 2)];
    const double cap = rng.uniform(3.0, 10.0);
    s.e_min = broadcast(0.0, T);
    s.e_max = broadcast(cap, T);
    s.e0 = rng.uniform(0.25, 0.75) * cap;
    if (rng.chance(0.25)) {
      // an active net-charging requirement, kept well inside what rated
      // charging can reach
      const std::vector<double> full_ch = s.ch_max;
      const std::vector<double> no_dc(static_cast<size_t>(T), 0.0);
      const double reachable = net_charge_lhs(s, full_ch, no_dc, dt);
      const double headroom = s.e_max[0] - std::pow(s.retention(), T) * s.e0;
      const double cap_req = std::min(reachable, std::max(headroom, 0.0));
      if (cap_req > 0.5) s.e_req = rng.uniform(0.1, 0.4) * cap_req;
    }
    c.storages.push_back(std::move(s));
  }

  // prices per targeting
  double min_c1 = kInfinity, max_marginal = 0.0;
  for (const Generator& g : c.generators) {
    if (g.is_renewable()) continue;
    min_c1 = std::min(min_c1, g.cost_linear);
    max_marginal = std::max(max_marginal, g.marginal_cost(g.p_max));
  }
  int tag = spec.price_scenario;
  if (tag == 0) {
    switch (spec.targeting) {
      case Targeting::satisfy_a: tag = rng.uniform_int(1, 3); break;
      case Targeting::satisfy_c: tag = rng.chance(0.5) ? 1 : 3; break;
      case Targeting::violate_a2: tag = 3; break;
      case Targeting::unconstrained: tag = rng.uniform_int(1, 3); break;
    }
  }
  c.prices.scenario = tag;
  for (int i = 0; i < S; ++i) {
    const StorageDevice& s = c.storages[static_cast<size_t>(i)];
    StoragePrice p;
    if (tag == 2) {
      // grid-owned storage: nothing to draw
    } else if (tag == 1) {
      p.f_slope = rng.uniform(-15.0, -0.5);
      p.g_lin = rng.uniform(0.5, 25.0);
      if (rng.chance(0.5)) p.g_quad = rng.uniform(0.01, 0.3);
    } else {
      switch (spec.targeting) {
        case Targeting::satisfy_a:
          p.f_slope = rng.uniform(0.5, std::min(6.0, min_c1 - 2.0));
          p.g_lin = p.f_slope + rng.uniform(0.5, 20.0);
          break;
        case Targeting::satisfy_c:
          p.f_slope = rng.uniform(0.5, std::min(6.0, min_c1 - 2.0));
          p.g_lin = p.f_slope / s.eta_cycle() + rng.uniform(0.5, 15.0);
          break;
        case Targeting::violate_a2:
          p.f_slope = max_marginal + rng.uniform(2.0, 15.0);
          p.g_lin = p.f_slope + rng.uniform(0.5, 10.0);
          break;
        case Targeting::unconstrained:
          p.f_slope = rng.uniform(0.5, 30.0);
          p.g_lin = rng.uniform(0.5, 35.0);
          break;
      }
      if (rng.chance(0.4)) p.g_quad = rng.uniform(0.01, 0.3);
    }
    c.prices.storages.push_back(p);
  }
  return c;
}

}  // namespace

NetworkCase generate_random(const ScenarioSpec& spec) {
  Rng rng(spec.seed * 0x9e3779b97f4a7c15ull + 0x51db55e7f7a1d4c3ull);
  for (int attempt = 0; attempt < 50; ++attempt) {
    Rng sub = rng.fork();
    NetworkCase c = draw_case(sub, spec);
    if (!validate_case(c).has_errors()) return c;
  }
  throw std::runtime_error("generate_random: could not draw a valid case for this spec");
}

}  // namespace edrelax::casekit
