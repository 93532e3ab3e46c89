#pragma once

#include "edrelax/rng.hpp"
#include "edrelax/types.hpp"

#include <cmath>
#include <vector>

namespace edrelax::testing {

/// One bus, one quadratic generator, per-step loads. The workhorse fixture.
inline NetworkCase single_bus_case(std::vector<double> loads, double c2 = 0.01, double c1 = 20.0,
                                   double p_max = 1000.0, double dt = 1.0) {
  NetworkCase c;
  c.horizon.steps = static_cast<int>(loads.size());
  c.horizon.dt_hours = dt;
  c.network.n_buses = 1;
  c.network.slack_bus = 0;
  c.network.gsf = Eigen::MatrixXd::Zero(0, 1);
  Generator g;
  g.bus = 0;
  g.p_min = 0.0;
  g.p_max = p_max;
  g.cost_quadratic = c2;
  g.cost_linear = c1;
  c.generators.push_back(g);
  c.loads.demand.resize(1, c.horizon.steps);
  for (int t = 0; t < c.horizon.steps; ++t) c.loads.demand(0, t) = loads[static_cast<size_t>(t)];
  return c;
}

/// Adds a grid-owned storage (scenario 2) to a case.
inline void add_scenario2_storage(NetworkCase& c, double rate, double e_max, double eta = 0.95,
                                  double e0 = 0.0, int bus = 0) {
  const int T = c.horizon.steps;
  StorageDevice s;
  s.bus = bus;
  s.ch_max = broadcast(rate, T);
  s.dc_max = broadcast(rate, T);
  s.eta_ch = eta;
  s.eta_dc = eta;
  s.self_discharge = 0.0;
  s.e0 = e0;
  s.e_min = broadcast(0.0, T);
  s.e_max = broadcast(e_max, T);
  c.storages.push_back(std::move(s));
  c.prices.scenario = 2;
  c.prices.storages.push_back(StoragePrice{0.0, 0.0, 0.0});
}

/// Arbitrage toy from the solver examples: one bus, quadratic generator so
/// the marginal price tracks load, cheap valley then expensive peak.
inline NetworkCase arbitrage_toy() {
  NetworkCase c = single_bus_case({20.0, 120.0}, 0.05, 5.0, 500.0);
  add_scenario2_storage(c, 10.0, 50.0, 0.95);
  return c;
}

/// Direct evaluation of the stored-energy sum, kept deliberately independent
/// of the recursive implementation.
inline std::vector<double> energy_direct_sum(const StorageDevice& s,
                                             const std::vector<double>& p_ch,
                                             const std::vector<double>& p_dc, double dt) {
  const double xi = 1.0 - s.self_discharge;
  const int T = static_cast<int>(p_ch.size());
  std::vector<double> e(static_cast<size_t>(T));
  for (int t = 1; t <= T; ++t) {
    double acc = std::pow(xi, t) * s.e0;
    for (int tau = 1; tau <= t; ++tau)
      acc += std::pow(xi, t - tau) *
             (s.eta_ch * p_ch[static_cast<size_t>(tau - 1)] -
              p_dc[static_cast<size_t>(tau - 1)] / s.eta_dc) *
             dt;
    e[static_cast<size_t>(t - 1)] = acc;
  }
  return e;
}

}  // namespace edrelax::testing
