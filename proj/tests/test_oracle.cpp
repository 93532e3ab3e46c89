#include "edrelax/oracle/oracle.hpp"

#include "edrelax/casekit/builders.hpp"
#include "edrelax/casekit/random.hpp"
#include "edrelax/relax/exactness.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace edrelax;
using namespace edrelax::oracle;

TEST_SUITE_BEGIN("oracle");

TEST_CASE("one storage over two steps enumerates four patterns") {
  NetworkCase c = testing::arbitrage_toy();
  OracleSettings os;
  os.keep_pattern_table = true;
  const OracleResult res = enumerate_mpec(c, os);
  CHECK(res.patterns_total == 4);
  CHECK(res.patterns_solved + res.patterns_infeasible + res.patterns_pruned == 4);
  CHECK(res.pattern_objectives.size() == 4);
}

TEST_CASE("a storage-free case is trivially exact") {
  NetworkCase c = testing::single_bus_case({30.0, 60.0});
  const OracleResult res = enumerate_mpec(c);
  CHECK(res.patterns_total == 1);
  const qp::DispatchSolution sol = qp::solve_case(c);
  const ExactnessComparison cmp = compare(sol, res);
  CHECK(cmp.exact);
  CHECK(std::abs(cmp.gap) <= 1e-6 * std::max(1.0, std::abs(res.best_objective)));
}

TEST_CASE("exact instances close the gap against the oracle") {
  // grid-owned storage with positive prices satisfies group C a-posteriori
  NetworkCase c = testing::arbitrage_toy();
  const qp::DispatchSolution sol = qp::solve_case(c);
  REQUIRE(sol.status == qp::SolveStatus::optimal);
  const OracleResult res = enumerate_mpec(c);
  const ExactnessComparison cmp = compare(sol, res);
  CHECK(cmp.exact);
  CHECK(std::abs(cmp.gap) <= 1e-6 * std::max(1.0, std::abs(res.best_objective)));
}

TEST_CASE("the counterexample case has a strictly positive relaxation gap") {
  const NetworkCase c = casekit::build_counterexample_case();
  const qp::DispatchSolution sol = qp::solve_case(c);
  REQUIRE(sol.status == qp::SolveStatus::optimal);
  const relax::ExactnessReport rep = relax::verify_exactness(sol, 1e-7);
  CHECK(!rep.exact);
  CHECK(rep.max_product > 1e-3);
  const OracleResult res = enumerate_mpec(c);
  const ExactnessComparison cmp = compare(sol, res);
  CHECK(!cmp.exact);
  CHECK(cmp.gap > 1e-6 * std::max(1.0, std::abs(res.best_objective)));
  CHECK(!cmp.witness.empty());
}

TEST_CASE("relaxation is a lower bound on every random instance") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    casekit::ScenarioSpec spec;
    spec.seed = 7000 + seed;
    spec.n_buses = 3;
    spec.n_storages = 1;
    spec.horizon_steps = 3;
    spec.targeting = casekit::Targeting::unconstrained;
    const NetworkCase c = casekit::generate_random(spec);
    const qp::DispatchSolution sol = qp::solve_case(c);
    if (sol.status != qp::SolveStatus::optimal) continue;
    const OracleResult res = enumerate_mpec(c);
    CHECK(sol.objective <= res.best_objective + 1e-6 * std::max(1.0, std::abs(res.best_objective)));
  }
}

TEST_CASE("the relaxed solution's own pattern reproduces its objective when exact") {
  NetworkCase c = testing::arbitrage_toy();
  const qp::DispatchSolution sol = qp::solve_case(c);
  REQUIRE(sol.status == qp::SolveStatus::optimal);
  REQUIRE(relax::verify_exactness(sol, 1e-7).exact);
  OracleSettings os;
  os.keep_pattern_table = true;
  const OracleResult res = enumerate_mpec(c, os);
  // derive the solution's sign pattern: bit set = discharge-allowed
  std::uint64_t pattern = 0;
  const int T = c.horizon.steps;
  for (int i = 0; i < static_cast<int>(c.storages.size()); ++i)
    for (int t = 0; t < T; ++t)
      if (sol.p_dc(i, t) > 1e-9) pattern |= 1ull << (i * T + t);
  REQUIRE(pattern < res.pattern_objectives.size());
  const double obj = res.pattern_objectives[pattern];
  REQUIRE(std::isfinite(obj));
  CHECK(obj == doctest::Approx(sol.objective).epsilon(1e-6));
}

TEST_CASE("adding patterns never raises the running best") {
  NetworkCase c = testing::arbitrage_toy();
  OracleSettings os;
  os.keep_pattern_table = true;
  const OracleResult res = enumerate_mpec(c, os);
  double best = std::numeric_limits<double>::infinity();
  for (double obj : res.pattern_objectives) {
    if (!std::isfinite(obj)) continue;
    const double next = std::min(best, obj);
    CHECK(next <= best);
    best = next;
  }
  CHECK(best == doctest::Approx(res.best_objective));
}

TEST_CASE("the pattern budget is enforced") {
  NetworkCase c = testing::arbitrage_toy();
  OracleSettings os;
  os.pattern_limit = 2;  // 4 needed
  CHECK_THROWS_AS(enumerate_mpec(c, os), BudgetExceeded);
}

TEST_CASE("comparing across cases is rejected") {
  NetworkCase a = testing::arbitrage_toy();
  NetworkCase b = testing::arbitrage_toy();
  b.loads.demand(0, 0) += 1.0;
  const qp::DispatchSolution sol = qp::solve_case(a);
  const OracleResult res = enumerate_mpec(b);
  CHECK_THROWS_AS(compare(sol, res), CaseMismatch);
}

TEST_CASE("net-charge pruning only skips genuinely infeasible patterns") {
  NetworkCase c = testing::arbitrage_toy();
  // require substantial net charging so discharge-heavy patterns are impossible
  c.storages[0].e_req = 6.0;
  c.storages[0].e_max = broadcast(20.0, 2);
  OracleSettings with_prune;
  with_prune.keep_pattern_table = true;
  const OracleResult pruned = enumerate_mpec(c, with_prune);
  CHECK(pruned.patterns_pruned > 0);
  OracleSettings no_prune = with_prune;
  no_prune.disable_pruning = true;
  const OracleResult full = enumerate_mpec(c, no_prune);
  CHECK(full.patterns_pruned == 0);
  CHECK(pruned.best_objective ==
        doctest::Approx(full.best_objective).epsilon(1e-9));
  CHECK(pruned.best_pattern == full.best_pattern);
}

TEST_SUITE_END();
