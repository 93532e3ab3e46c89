#include "edrelax/qp/solve.hpp"

#include "edrelax/rng.hpp"
#include "edrelax/casekit/random.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace edrelax;
using namespace edrelax::qp;

namespace {

/// Lagrangian dual value at the returned multipliers. The Hessian is
/// diagonal, so the inner minimization splits per variable; components with
/// zero curvature contribute nothing when the stationarity residual is small.
double dual_objective(const RelaxedQP& qp, const DispatchSolution& sol) {
  const int n = qp.n_vars();
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = qp.linear_cost[static_cast<size_t>(i)];
  double constant = 0.0;
  auto add_row = [&](const ConstraintRow& row, double coeff, double bound) {
    if (coeff == 0.0) return;
    for (const Coefficient& t : row.terms) v[t.var] += coeff * t.value;
    constant -= coeff * bound;
  };
  for (const ConstraintRow& row : qp.rows) {
    double zl = 0.0, zu = 0.0, y = 0.0;
    const DualSolution& d = sol.duals;
    switch (row.origin) {
      case RowOrigin::charge_box: zl = d.alpha1(row.entity, row.t); zu = d.alpha2(row.entity, row.t); break;
      case RowOrigin::discharge_box: zl = d.alpha3(row.entity, row.t); zu = d.alpha4(row.entity, row.t); break;
      case RowOrigin::gen_box: zl = d.gen_lo(row.entity, row.t); zu = d.gen_hi(row.entity, row.t); break;
      case RowOrigin::energy_window: zl = d.beta1(row.entity, row.t); zu = d.beta2(row.entity, row.t); break;
      case RowOrigin::net_charge: zl = d.phi(row.entity); break;
      case RowOrigin::ramp: zl = d.ramp_lo(row.entity, row.t); zu = d.ramp_hi(row.entity, row.t); break;
      case RowOrigin::balance: y = -d.lambda(row.t); break;
      case RowOrigin::flow: zl = d.mu1(row.entity, row.t); zu = d.mu2(row.entity, row.t); break;
    }
    // L(x) = f(x) + y (a.x - b) + zu (a.x - up) + zl (lo - a.x)
    add_row(row, y, row.lo);
    add_row(row, zu, row.up);
    add_row(row, -zl, row.lo);
  }
  double value = constant;
  for (int i = 0; i < n; ++i) {
    const double h = qp.hessian_diag[static_cast<size_t>(i)];
    if (h > 0.0)
      value -= 0.5 * v[i] * v[i] / h;
    // h == 0: dual feasibility demands v[i] ~ 0; the residual is checked
    // separately by the stationarity report.
  }
  return value;
}

}  // namespace

TEST_SUITE_BEGIN("solver");

TEST_CASE("single generator tracks demand and prices at its marginal cost") {
  NetworkCase c = testing::single_bus_case({50.0, 50.0}, 0.01, 20.0);
  const DispatchSolution sol = solve_case(c);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.p_g(0, 0) == doctest::Approx(50.0).epsilon(1e-7));
  CHECK(sol.p_g(0, 1) == doctest::Approx(50.0).epsilon(1e-7));
  CHECK(sol.duals.lambda(0) == doctest::Approx(21.0).epsilon(1e-6));
  CHECK(sol.duals.lambda(1) == doctest::Approx(21.0).epsilon(1e-6));
  CHECK(sol.residuals.stationarity <= 1e-6);
  CHECK(sol.residuals.max_comp_product <= 1e-6);
}

TEST_CASE("demand beyond capacity reports infeasibility with a diagnosis") {
  NetworkCase c = testing::single_bus_case({50.0, 500.0}, 0.01, 20.0, /*p_max=*/100.0);
  const DispatchSolution sol = solve_case(c);
  CHECK(sol.status == SolveStatus::infeasible);
  CHECK(!sol.diagnosis.empty());
}

TEST_CASE("arbitrage toy charges in the valley and discharges at the peak") {
  NetworkCase with = testing::arbitrage_toy();
  NetworkCase without = with;
  without.storages.clear();
  without.prices.storages.clear();
  const DispatchSolution s1 = solve_case(with);
  const DispatchSolution s0 = solve_case(without);
  REQUIRE(s1.status == SolveStatus::optimal);
  REQUIRE(s0.status == SolveStatus::optimal);
  CHECK(s1.p_ch(0, 0) > 1.0);   // valley: charge
  CHECK(s1.p_dc(0, 1) > 1.0);   // peak: discharge
  CHECK(s1.p_dc(0, 0) <= 1e-6);
  CHECK(s1.p_ch(0, 1) <= 1e-6);
  CHECK(s1.objective < s0.objective - 1.0);
}

TEST_CASE("repeat solves are deterministic") {
  NetworkCase c = testing::arbitrage_toy();
  const DispatchSolution a = solve_case(c);
  const DispatchSolution b = solve_case(c);
  REQUIRE(a.status == SolveStatus::optimal);
  CHECK(std::abs(a.objective - b.objective) <=
        1e-9 * std::max(1.0, std::abs(a.objective)));
  CHECK((a.p_g - b.p_g).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, a.p_g.cwiseAbs().maxCoeff()));
}

TEST_CASE("objective is convex along random segments") {
  NetworkCase c = testing::arbitrage_toy();
  c.prices.scenario = 3;
  c.prices.storages[0] = {3.0, 0.4, 8.0};
  const RelaxedQP qp = assemble_relaxed(c);
  Rng rng(23);
  const int n = qp.n_vars();
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(static_cast<size_t>(n)), y(static_cast<size_t>(n)),
        mix(static_cast<size_t>(n));
    const double theta = rng.uniform();
    for (int i = 0; i < n; ++i) {
      x[static_cast<size_t>(i)] = rng.uniform(0.0, 50.0);
      y[static_cast<size_t>(i)] = rng.uniform(0.0, 50.0);
      mix[static_cast<size_t>(i)] =
          theta * x[static_cast<size_t>(i)] + (1.0 - theta) * y[static_cast<size_t>(i)];
    }
    CHECK(qp.objective_value(mix) <=
          theta * qp.objective_value(x) + (1.0 - theta) * qp.objective_value(y) + 1e-9);
  }
}

TEST_CASE("weak duality holds at the returned multipliers") {
  Rng rng(31);
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    casekit::ScenarioSpec spec;
    spec.seed = 900 + seed;
    spec.n_buses = 3;
    spec.n_storages = 1;
    spec.horizon_steps = 4;
    spec.targeting = casekit::Targeting::unconstrained;
    const NetworkCase c = casekit::generate_random(spec);
    const RelaxedQP qp = assemble_relaxed(c);
    const DispatchSolution sol = solve(qp);
    if (sol.status != SolveStatus::optimal) continue;
    const double dual = dual_objective(qp, sol);
    CHECK(dual <= sol.objective + 1e-4 * std::max(1.0, std::abs(sol.objective)));
  }
}

TEST_CASE("complementary slackness products respect the tolerance") {
  casekit::ScenarioSpec spec;
  spec.seed = 1234;
  spec.n_buses = 4;
  spec.n_storages = 2;
  spec.horizon_steps = 5;
  const NetworkCase c = casekit::generate_random(spec);
  const DispatchSolution sol = solve_case(c);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.residuals.max_comp_product <= 1e-6);
  CHECK(sol.residuals.primal_feas <= 1e-6);
  CHECK(sol.residuals.stationarity <= 1e-6);
}

TEST_CASE("linear-cost schedules scale with the instance") {
  // the 50 MW load swing exceeds the 45 MW ramp, so the storage must bridge
  // the difference; the unique cheapest bridge scales linearly
  NetworkCase c = testing::single_bus_case({40.0, 90.0}, 0.0, 12.0, 200.0);
  testing::add_scenario2_storage(c, 8.0, 1000.0);  // energy cap never binds
  c.generators[0].ramp_up = 45.0;
  c.generators[0].ramp_down = -45.0;
  const double k = 3.0;
  NetworkCase scaled = c;
  scaled.loads.demand *= k;
  scaled.generators[0].p_max *= k;
  scaled.generators[0].ramp_up *= k;
  scaled.generators[0].ramp_down *= k;
  for (auto& v : scaled.storages[0].ch_max) v *= k;
  for (auto& v : scaled.storages[0].dc_max) v *= k;

  const DispatchSolution base = solve_case(c);
  const DispatchSolution big = solve_case(scaled);
  REQUIRE(base.status == SolveStatus::optimal);
  REQUIRE(big.status == SolveStatus::optimal);
  CHECK((big.p_g - k * base.p_g).cwiseAbs().maxCoeff() <= 1e-5 * k);
  CHECK((big.p_ch - k * base.p_ch).cwiseAbs().maxCoeff() <= 1e-5 * k);
}

TEST_CASE("state expansion and direct solves agree") {
  // duals can be degenerate, so the comparison is: equal optimal values, and
  // both dual vectors close the named stationarity equations on the public QP
  for (std::uint64_t seed : {11ull, 12ull, 13ull, 14ull}) {
    casekit::ScenarioSpec spec;
    spec.seed = seed;
    spec.n_buses = 3;
    spec.n_storages = 2;
    spec.horizon_steps = 5;
    const NetworkCase c = casekit::generate_random(spec);
    const RelaxedQP qp = assemble_relaxed(c);
    SolveSettings direct;
    direct.expansion = StateExpansion::never;
    SolveSettings expanded;
    expanded.expansion = StateExpansion::always;
    const DispatchSolution a = solve(qp, direct);
    const DispatchSolution b = solve(qp, expanded);
    REQUIRE(a.status == b.status);
    if (a.status != SolveStatus::optimal) continue;
    CHECK(std::abs(a.objective - b.objective) <=
          1e-7 * std::max(1.0, std::abs(a.objective)));
    for (const DispatchSolution* sol : {&a, &b}) {
      CHECK(sol->residuals.stationarity <= 1e-6);
      CHECK(sol->residuals.primal_feas <= 1e-6);
      CHECK(sol->residuals.max_comp_product <= 1e-6);
    }
  }
}

TEST_CASE("an unreachable net-charging requirement is diagnosed") {
  NetworkCase c = testing::single_bus_case({30.0, 30.0});
  testing::add_scenario2_storage(c, 1.0, 50.0);
  c.storages[0].e_req = 500.0;  // far beyond rated charging
  const DispatchSolution sol = solve_case(c);
  CHECK(sol.status == SolveStatus::infeasible);
  CHECK(sol.diagnosis.find("net_charge") != std::string::npos);
}

TEST_CASE("iteration starvation does not report optimal") {
  NetworkCase c = testing::arbitrage_toy();
  SolveSettings s;
  s.max_iter = 1;
  const DispatchSolution sol = solve_case(c, s);
  CHECK(sol.status != SolveStatus::optimal);
}

TEST_SUITE_END();
