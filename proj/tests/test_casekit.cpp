#include "edrelax/casekit/builders.hpp"
#include "edrelax/casekit/json_io.hpp"
#include "edrelax/casekit/matpower.hpp"
#include "edrelax/casekit/random.hpp"

#include "edrelax/qp/solve.hpp"
#include "edrelax/relax/conditions.hpp"
#include "edrelax/relax/lmp.hpp"
#include "edrelax/validate.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace edrelax;
using namespace edrelax::casekit;

TEST_SUITE_BEGIN("casekit");

TEST_CASE("a minimal one-bus document parses and validates") {
  const std::string doc = R"({
    "format": "edrelax-case/1",
    "horizon": {"steps": 2, "dt_hours": 1.0},
    "network": {"n_buses": 1, "slack_bus": 0, "lines": []},
    "generators": [{"bus": 0, "p_min": 0, "p_max": 100, "cost_quadratic": 0.01, "cost_linear": 20}],
    "storages": [{"bus": 0, "ch_max": 2, "dc_max": 2, "eta_ch": 0.95, "eta_dc": 0.95,
                  "e0": 1, "e_min": 0, "e_max": 4}],
    "prices": {"scenario": 2, "storages": [{"f_slope": 0, "g_quad": 0, "g_lin": 0}]},
    "loads": [[30.0, 40.0]]
  })";
  const ParsedCase parsed = parse_case(doc);
  CHECK(parsed.network_case.horizon.steps == 2);
  CHECK(parsed.network_case.storages[0].ch_max == broadcast(2.0, 2));
  CHECK(parsed.network_case.storages[0].e_req == kEnergyReqRelaxed);
  CHECK(!parsed.forecast.has_value());
}

TEST_CASE("a missing field is reported with its path") {
  const std::string doc = R"({
    "format": "edrelax-case/1",
    "horizon": {"steps": 1, "dt_hours": 1.0},
    "network": {"n_buses": 1, "slack_bus": 0, "lines": []},
    "generators": [{"bus": 0, "p_min": 0, "p_max": 100, "cost_quadratic": 0, "cost_linear": 20}],
    "storages": [{"bus": 0, "ch_max": 2, "dc_max": 2, "eta_ch": 0.95,
                  "e0": 1, "e_min": 0, "e_max": 4}],
    "prices": {"scenario": 2, "storages": [{"f_slope": 0, "g_quad": 0, "g_lin": 0}]},
    "loads": [[30.0]]
  })";
  try {
    parse_case(doc);
    FAIL("expected CaseFormatError");
  } catch (const CaseFormatError& e) {
    CHECK(std::string(e.what()).find("storages[0].eta_dc") != std::string::npos);
  }
}

TEST_CASE("serialization round-trips the reference scenarios field for field") {
  for (const NetworkCase& c : {build_ieee30_scenario(), build_counterexample_case()}) {
    const std::string text = serialize_case(c);
    const ParsedCase parsed = parse_case(text);
    CHECK(fingerprint_case(parsed.network_case) == fingerprint_case(c));
    CHECK(serialize_case(parsed.network_case) == text);
  }
}

TEST_CASE("forecast sections survive the round trip") {
  NetworkCase c = testing::arbitrage_toy();
  relax::LmpForecast f;
  f.mape = 0.015;
  f.forecast = Eigen::MatrixXd::Constant(1, 2, 25.0);
  const ParsedCase parsed = parse_case(serialize_case(c, f));
  REQUIRE(parsed.forecast.has_value());
  CHECK(parsed.forecast->mape == doctest::Approx(0.015));
  CHECK(parsed.forecast->forecast(0, 1) == doctest::Approx(25.0));
}

TEST_CASE("matpower: a two-bus toy yields one line") {
  const std::string text = R"(function mpc = toy
mpc.baseMVA = 100;
mpc.bus = [
  1 3 10 0 0 0 1 1 0 135 1 1.05 0.95;
  2 1 20 0 0 0 1 1 0 135 1 1.05 0.95;
];
mpc.gen = [
  1 0 0 10 -10 1 100 1 50 0;
];
mpc.branch = [
  1 2 0.01 0.05 0 40 40 40 0 0 1;
];
)";
  const MatpowerCase mp = parse_matpower_subset(text);
  CHECK(mp.network.n_buses == 2);
  CHECK(mp.network.lines.size() == 1);
  CHECK(mp.network.slack_bus == 0);
  CHECK(mp.network.lines[0].reactance == doctest::Approx(0.05));
  CHECK(mp.network.lines[0].flow_max == doctest::Approx(40.0));
  CHECK(mp.bus_load_mw[1] == doctest::Approx(20.0));
  REQUIRE(mp.generators.size() == 1);
  CHECK(mp.generators[0].p_max == doctest::Approx(50.0));
}

TEST_CASE("matpower: the bundled 30-bus text has the expected shape") {
  const MatpowerCase mp = parse_matpower_subset(ieee30_matpower_text());
  CHECK(mp.network.n_buses == 30);
  CHECK(mp.network.lines.size() == 41);
  CHECK(mp.generators.size() == 6);
  CHECK(mp.network.slack_bus == 0);
}

TEST_CASE("matpower: malformed rows name their line") {
  const std::string text = R"(function mpc = bad
mpc.baseMVA = 100;
mpc.bus = [
  1 3 0 0 0 0 1 1 0 135 1 1.05 0.95;
  2 1 oops 0 0 0 1 1 0 135 1 1.05 0.95;
];
mpc.branch = [
  1 2 0.01 0.05 0 40 40 40 0 0 1;
];
)";
  try {
    parse_matpower_subset(text);
    FAIL("expected MatpowerError");
  } catch (const MatpowerError& e) {
    CHECK(std::string(e.what()).find("line 5") != std::string::npos);
  }
}

TEST_CASE("matpower: unknown bus ids are inconsistent numbering") {
  const std::string text = R"(
mpc.baseMVA = 100;
mpc.bus = [
  1 3 0 0 0 0 1 1 0 135 1 1.05 0.95;
];
mpc.branch = [
  1 7 0.01 0.05 0 40 40 40 0 0 1;
];
)";
  CHECK_THROWS_AS(parse_matpower_subset(text), MatpowerError);
}

TEST_CASE("the 30-bus reference scenario matches its published skeleton") {
  const NetworkCase c = build_ieee30_scenario();
  CHECK(validate_case(c).ok());
  CHECK(c.horizon.steps == 96);
  CHECK(c.horizon.dt_hours == doctest::Approx(0.25));
  REQUIRE(c.generators.size() == 6);

  // thermal units at buses 1, 13, 22, 23, 27 (1-based), wind at bus 2
  CHECK(c.generators[0].bus == 0);
  CHECK(c.generators[1].bus == 12);
  CHECK(c.generators[2].bus == 21);
  CHECK(c.generators[3].bus == 22);
  CHECK(c.generators[4].bus == 26);
  CHECK(c.generators[5].bus == 1);
  CHECK(c.generators[5].is_renewable());

  // unit 5 cost: 0.01 x^2 + 10 x
  CHECK(c.generators[4].cost_quadratic == doctest::Approx(0.01));
  CHECK(c.generators[4].cost_linear == doctest::Approx(10.0));
  // unit 3: [20, 80] MW, +-8 MW per step
  CHECK(c.generators[2].p_min == doctest::Approx(20.0));
  CHECK(c.generators[2].p_max == doctest::Approx(80.0));
  CHECK(c.generators[2].ramp_up == doctest::Approx(8.0));

  CHECK(c.storages.size() == 50);
  for (const StorageDevice& s : c.storages) {
    CHECK(s.self_discharge == doctest::Approx(1.0 - std::pow(0.99, 0.25)));
    CHECK(s.eta_ch == doctest::Approx(0.95));
  }
  CHECK(c.prices.scenario == 2);
}

TEST_CASE("the counterexample satisfies A-1 but breaks A-2 on realized prices") {
  const NetworkCase c = build_counterexample_case();
  CHECK(validate_case(c).ok());
  const qp::DispatchSolution sol = qp::solve_case(c);
  REQUIRE(sol.status == qp::SolveStatus::optimal);
  const Eigen::MatrixXd lmp = relax::compute_lmp(sol, c.network).lmp;
  const auto rep = relax::check_conditions_a(c.prices, c.storages, lmp,
                                             relax::CheckMode::a_posteriori, &sol.p_dc);
  CHECK(!rep.satisfied);
  CHECK(rep.min_price_margin >= 0.0);  // A-1: 25 >= 24
  CHECK(rep.min_lmp_margin < 0.0);     // A-2: fee above the realized LMP
}

TEST_CASE("random generation is deterministic in the seed") {
  casekit::ScenarioSpec spec;
  spec.seed = 42;
  spec.n_buses = 4;
  spec.n_storages = 2;
  spec.horizon_steps = 5;
  const NetworkCase a = generate_random(spec);
  const NetworkCase b = generate_random(spec);
  CHECK(fingerprint_case(a) == fingerprint_case(b));
  spec.seed = 43;
  CHECK(fingerprint_case(generate_random(spec)) != fingerprint_case(a));
}

TEST_CASE("every generator output validates") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (Targeting t : {Targeting::satisfy_a, Targeting::satisfy_c, Targeting::violate_a2,
                        Targeting::unconstrained}) {
      casekit::ScenarioSpec spec;
      spec.seed = 500 + seed;
      spec.n_buses = 1 + static_cast<int>(seed % 5);
      spec.n_storages = 1 + static_cast<int>(seed % 2);
      spec.horizon_steps = 2 + static_cast<int>(seed % 4);
      spec.targeting = t;
      CHECK(validate_case(generate_random(spec)).ok());
    }
  }
}

TEST_CASE("satisfy-c draws pass group C on realized duals") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 20 && checked < 12; ++seed) {
    casekit::ScenarioSpec spec;
    spec.seed = 8100 + seed;
    spec.n_buses = 3;
    spec.n_storages = 1;
    spec.horizon_steps = 4;
    spec.targeting = Targeting::satisfy_c;
    const NetworkCase c = generate_random(spec);
    const qp::DispatchSolution sol = qp::solve_case(c);
    REQUIRE(sol.status == qp::SolveStatus::optimal);
    const Eigen::MatrixXd lmp = relax::compute_lmp(sol, c.network).lmp;
    const auto rep = relax::check_conditions_c(c.prices, c.storages, lmp,
                                               relax::CheckMode::a_posteriori, &sol.p_dc);
    CHECK(rep.satisfied);
    ++checked;
  }
  CHECK(checked >= 12);
}

TEST_CASE("violate-a2 draws fail A-2 on realized duals") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    casekit::ScenarioSpec spec;
    spec.seed = 8200 + seed;
    spec.n_buses = 3;
    spec.n_storages = 1;
    spec.horizon_steps = 3;
    spec.targeting = Targeting::violate_a2;
    const NetworkCase c = generate_random(spec);
    const qp::DispatchSolution sol = qp::solve_case(c);
    REQUIRE(sol.status == qp::SolveStatus::optimal);
    const Eigen::MatrixXd lmp = relax::compute_lmp(sol, c.network).lmp;
    const auto rep = relax::check_conditions_a(c.prices, c.storages, lmp,
                                               relax::CheckMode::a_posteriori, &sol.p_dc);
    CHECK(!rep.satisfied);
    CHECK(rep.min_lmp_margin <= 0.0);
  }
}

TEST_CASE("solution serialization round-trips the audit fields") {
  const NetworkCase c = testing::arbitrage_toy();
  const qp::DispatchSolution sol = qp::solve_case(c);
  REQUIRE(sol.status == qp::SolveStatus::optimal);
  const qp::DispatchSolution back = parse_solution(serialize_solution(sol));
  CHECK(back.status == qp::SolveStatus::optimal);
  CHECK(back.objective == doctest::Approx(sol.objective).epsilon(1e-12));
  CHECK(back.case_fingerprint == sol.case_fingerprint);
  CHECK((back.p_ch - sol.p_ch).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((back.duals.lambda - sol.duals.lambda).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_SUITE_END();
