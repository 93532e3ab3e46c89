#include "edrelax/casekit/builders.hpp"

#include "edrelax/casekit/matpower.hpp"
#include "edrelax/gsf.hpp"

#include <algorithm>
#include <cmath>

namespace edrelax::casekit {

const std::string& ieee30_matpower_text() {
  // IEEE 30-bus test network: 30 buses, 41 branches, units at buses
  // 1, 2, 13, 22, 23, 27 (bus 2 hosts the wind plant in the scenario).
  // Columns follow the MATPOWER case format.
  static const std::string text = R"(function mpc = case30
mpc.version = '2';
mpc.baseMVA = 100;

%% bus data
%	bus_i	type	Pd	Qd	Gs	Bs	area	Vm	Va	baseKV	zone	Vmax	Vmin
mpc.bus = [
	1	3	0	0	0	0	1	1	0	135	1	1.05	0.95;
	2	2	21.7	12.7	0	0	1	1	0	135	1	1.1	0.95;
	3	1	2.4	1.2	0	0	1	1	0	135	1	1.05	0.95;
	4	1	7.6	1.6	0	0	1	1	0	135	1	1.05	0.95;
	5	1	94.2	19	0	0	1	1	0	135	1	1.05	0.95;
	6	1	0	0	0	0	1	1	0	135	1	1.05	0.95;
	7	1	22.8	10.9	0	0	1	1	0	135	1	1.05	0.95;
	8	1	30	30	0	0	1	1	0	135	1	1.05	0.95;
	9	1	0	0	0	0	1	1	0	135	1	1.05	0.95;
	10	1	5.8	2	0	0.19	3	1	0	135	1	1.05	0.95;
	11	1	0	0	0	0	1	1	0	135	1	1.05	0.95;
	12	1	11.2	7.5	0	0	2	1	0	135	1	1.05	0.95;
	13	2	0	0	0	0	2	1	0	135	1	1.1	0.95;
	14	1	6.2	1.6	0	0	2	1	0	135	1	1.05	0.95;
	15	1	8.2	2.5	0	0	2	1	0	135	1	1.05	0.95;
	16	1	3.5	1.8	0	0	2	1	0	135	1	1.05	0.95;
	17	1	9	5.8	0	0	2	1	0	135	1	1.05	0.95;
	18	1	3.2	0.9	0	0	2	1	0	135	1	1.05	0.95;
	19	1	9.5	3.4	0	0	2	1	0	135	1	1.05	0.95;
	20	1	2.2	0.7	0	0	2	1	0	135	1	1.05	0.95;
	21	1	17.5	11.2	0	0	3	1	0	135	1	1.05	0.95;
	22	2	0	0	0	0	3	1	0	135	1	1.1	0.95;
	23	2	3.2	1.6	0	0	2	1	0	135	1	1.1	0.95;
	24	1	8.7	6.7	0	0.04	3	1	0	135	1	1.05	0.95;
	25	1	0	0	0	0	3	1	0	135	1	1.05	0.95;
	26	1	3.5	2.3	0	0	3	1	0	135	1	1.05	0.95;
	27	2	0	0	0	0	3	1	0	135	1	1.1	0.95;
	28	1	0	0	0	0	1	1	0	135	1	1.05	0.95;
	29	1	2.4	0.9	0	0	3	1	0	135	1	1.05	0.95;
	30	1	10.6	1.9	0	0	3	1	0	135	1	1.05	0.95;
];

%% generator data
%	bus	Pg	Qg	Qmax	Qmin	Vg	mBase	status	Pmax	Pmin
mpc.gen = [
	1	23.54	0	150	-20	1	100	1	100	20;
	2	60.97	0	60	-20	1	100	1	80	0;
	22	21.59	0	62.5	-15	1	100	1	50	20;
	27	26.91	0	48.7	-15	1	100	1	55	20;
	23	19.2	0	40	-10	1	100	1	30	20;
	13	37	0	44.7	-15	1	100	1	40	20;
];

%% branch data
%	fbus	tbus	r	x	b	rateA	rateB	rateC	ratio	angle	status
mpc.branch = [
	1	2	0.02	0.06	0.03	130	130	130	0	0	1;
	1	3	0.05	0.19	0.02	130	130	130	0	0	1;
	2	4	0.06	0.17	0.02	65	65	65	0	0	1;
	3	4	0.01	0.04	0	130	130	130	0	0	1;
	2	5	0.05	0.2	0.02	130	130	130	0	0	1;
	2	6	0.06	0.18	0.02	65	65	65	0	0	1;
	4	6	0.01	0.04	0	90	90	90	0	0	1;
	5	7	0.05	0.12	0.01	70	70	70	0	0	1;
	6	7	0.03	0.08	0.01	130	130	130	0	0	1;
	6	8	0.01	0.04	0	32	32	32	0	0	1;
	6	9	0	0.21	0	65	65	65	0	0	1;
	6	10	0	0.56	0	32	32	32	0	0	1;
	9	11	0	0.21	0	65	65	65	0	0	1;
	9	10	0	0.11	0	65	65	65	0	0	1;
	4	12	0	0.26	0	65	65	65	0	0	1;
	12	13	0	0.14	0	65	65	65	0	0	1;
	12	14	0.12	0.26	0	32	32	32	0	0	1;
	12	15	0.07	0.13	0	32	32	32	0	0	1;
	12	16	0.09	0.2	0	32	32	32	0	0	1;
	14	15	0.22	0.2	0	16	16	16	0	0	1;
	16	17	0.08	0.19	0	16	16	16	0	0	1;
	15	18	0.11	0.22	0	16	16	16	0	0	1;
	18	19	0.06	0.13	0	16	16	16	0	0	1;
	19	20	0.03	0.07	0	32	32	32	0	0	1;
	10	20	0.09	0.21	0	32	32	32	0	0	1;
	10	17	0.03	0.08	0	32	32	32	0	0	1;
	10	21	0.03	0.07	0	32	32	32	0	0	1;
	10	22	0.07	0.15	0	32	32	32	0	0	1;
	21	22	0.01	0.02	0	32	32	32	0	0	1;
	15	23	0.1	0.2	0	16	16	16	0	0	1;
	22	24	0.12	0.18	0	16	16	16	0	0	1;
	23	24	0.13	0.27	0	16	16	16	0	0	1;
	24	25	0.19	0.33	0	16	16	16	0	0	1;
	25	26	0.25	0.38	0	16	16	16	0	0	1;
	25	27	0.11	0.21	0	16	16	16	0	0	1;
	28	27	0	0.4	0	65	65	65	0	0	1;
	27	29	0.22	0.42	0	16	16	16	0	0	1;
	27	30	0.32	0.6	0	16	16	16	0	0	1;
	29	30	0.24	0.45	0	16	16	16	0	0	1;
	8	28	0.06	0.2	0.02	32	32	32	0	0	1;
	6	28	0.02	0.06	0.01	32	32	32	0	0	1;
];
)";
  return text;
}

namespace {

/// Smooth double-peak daily shape on [0, 1], sampled at step midpoints.
double load_shape(double hour) {
  const double morning = std::exp(-std::pow((hour - 9.5) / 2.8, 2));
  const double evening = std::exp(-std::pow((hour - 19.0) / 2.5, 2));
  return 0.58 + 0.22 * morning + 0.30 * evening;
}

}  // namespace

NetworkCase build_ieee30_scenario() {
  const MatpowerCase mp = parse_matpower_subset(ieee30_matpower_text());

  NetworkCase c;
  c.horizon.steps = 96;
  c.horizon.dt_hours = 0.25;
  const int T = c.horizon.steps;
  const int N = mp.network.n_buses;
  c.network = mp.network;

  // Flow ratings are widened relative to the snapshot ratings so the daily
  // peak clears without congestion; the scenario demonstrates arbitrage, not
  // congestion pricing.
  for (Line& ln : c.network.lines) {
    if (!is_unbounded(ln.flow_min)) ln.flow_min *= 1.5;
    if (!is_unbounded(ln.flow_max)) ln.flow_max *= 1.5;
  }
  c.network.gsf = compute_gsf(c.network);

  // Thermal units, one per generator bus from the unit table.
  struct UnitSpec {
    int bus_id;
    double p_min, p_max, ramp, c2, c1;
  };
  const UnitSpec units[] = {
      {1, 20, 100, 5, 0.04, 10},   // unit 1
      {13, 40, 100, 5, 0.01, 20},  // unit 2
      {22, 20, 80, 8, 0.02, 23},   // unit 3
      {23, 20, 120, 6, 0.01, 22},  // unit 4
      {27, 20, 120, 6, 0.01, 10},  // unit 5
  };
  auto internal_bus = [&](int id) {
    for (size_t b = 0; b < mp.bus_ids.size(); ++b)
      if (mp.bus_ids[b] == id) return static_cast<int>(b);
    return -1;
  };
  for (const UnitSpec& u : units) {
    Generator g;
    g.bus = internal_bus(u.bus_id);
    g.p_min = u.p_min;
    g.p_max = u.p_max;
    g.ramp_up = u.ramp;    // MW per 15-minute step
    g.ramp_down = -u.ramp;
    g.cost_quadratic = u.c2;
    g.cost_linear = u.c1;
    c.generators.push_back(g);
  }

  // Wind plant at bus 2: free energy, curtailable, no ramp coupling. The
  // availability curve runs against the load shape.
  double shape_max = 0.0;
  std::vector<double> shape(static_cast<size_t>(T));
  for (int t = 0; t < T; ++t) {
    const double hour = (t + 0.5) * c.horizon.dt_hours;
    shape[static_cast<size_t>(t)] = load_shape(hour);
    shape_max = std::max(shape_max, shape[static_cast<size_t>(t)]);
  }
  {
    Generator wind;
    wind.bus = internal_bus(2);
    wind.p_min = 0.0;
    wind.cost_quadratic = 0.0;
    wind.cost_linear = 0.0;
    wind.p_max_profile.resize(static_cast<size_t>(T));
    const double wind_cap = 60.0;
    for (int t = 0; t < T; ++t) {
      const double rel = shape[static_cast<size_t>(t)] / shape_max;  // 0.64 .. 1
      const double avail = std::clamp(0.9 - 0.7 * (rel - 0.64) / 0.36, 0.15, 0.95);
      wind.p_max_profile[static_cast<size_t>(t)] = wind_cap * avail;
    }
    wind.p_max = *std::max_element(wind.p_max_profile.begin(), wind.p_max_profile.end());
    c.generators.push_back(std::move(wind));
  }

  // Loads: the case's PD column fixes the bus weights; the daily shape is
  // scaled so the system peak reaches ~420 MW (about 80% of thermal capacity).
  const double peak_total = 420.0;
  double pd_total = 0.0;
  for (double v : mp.bus_load_mw) pd_total += v;
  c.loads.demand.resize(N, T);
  for (int b = 0; b < N; ++b)
    for (int t = 0; t < T; ++t)
      c.loads.demand(b, t) =
          peak_total * (mp.bus_load_mw[static_cast<size_t>(b)] / pd_total) *
          (shape[static_cast<size_t>(t)] / shape_max);

  // 50 storage devices over the 24 PQ buses: two each, plus a third on the
  // first two PQ buses. Sizes are artifact defaults.
  std::vector<char> has_gen(static_cast<size_t>(N), 0);
  for (const Generator& g : c.generators) has_gen[static_cast<size_t>(g.bus)] = 1;
  std::vector<int> pq_buses;
  for (int b = 0; b < N; ++b)
    if (!has_gen[static_cast<size_t>(b)]) pq_buses.push_back(b);
  const double eps_hour = 0.01;  // self-discharge per hour
  const double eps_step = 1.0 - std::pow(1.0 - eps_hour, c.horizon.dt_hours);
  int placed = 0;
  for (size_t round = 0; round < 3 && placed < 50; ++round) {
    for (size_t b = 0; b < pq_buses.size() && placed < 50; ++b) {
      if (round == 2 && b >= 2) break;
      StorageDevice s;
      s.bus = pq_buses[b];
      s.ch_max = broadcast(2.0, T);
      s.dc_max = broadcast(2.0, T);
      s.eta_ch = 0.95;
      s.eta_dc = 0.95;
      s.self_discharge = eps_step;
      s.e_min = broadcast(0.0, T);
      s.e_max = broadcast(8.0, T);
      s.e0 = 4.0;
      s.e_req = kEnergyReqRelaxed;
      c.storages.push_back(std::move(s));
      ++placed;
    }
  }

  // Grid-owned storage: operating cost neglected in dispatch.
  c.prices.scenario = 2;
  c.prices.storages.assign(c.storages.size(), StoragePrice{0.0, 0.0, 0.0});
  return c;
}

NetworkCase build_counterexample_case() {
  NetworkCase c;
  c.horizon.steps = 2;
  c.horizon.dt_hours = 1.0;
  c.network.n_buses = 1;
  c.network.slack_bus = 0;
  c.network.gsf = Eigen::MatrixXd::Zero(0, 1);

  Generator g;
  g.bus = 0;
  g.p_min = 0.0;
  g.p_max = 200.0;
  g.cost_quadratic = 0.01;
  g.cost_linear = 10.0;
  c.generators.push_back(g);

  StorageDevice s;
  s.bus = 0;
  s.ch_max = broadcast(10.0, 2);
  s.dc_max = broadcast(10.0, 2);
  s.eta_ch = 0.9;
  s.eta_dc = 0.9;
  s.self_discharge = 0.0;
  s.e0 = 0.0;
  s.e_min = broadcast(0.0, 2);
  s.e_max = broadcast(5.0, 2);
  s.e_req = kEnergyReqRelaxed;
  c.storages.push_back(std::move(s));

  // Scenario 3 with the charge fee far above the energy cost: relaxed
  // dispatch charges at the limit and discharges simultaneously to dodge the
  // energy cap. LMP stays near 11 $/MWh, so the charge fee of 24 exceeds it.
  c.prices.scenario = 3;
  c.prices.storages = {StoragePrice{24.0, 0.0, 25.0}};

  c.loads.demand.resize(1, 2);
  c.loads.demand << 50.0, 50.0;
  return c;
}

}  // namespace edrelax::casekit
