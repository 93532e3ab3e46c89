// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failures. Invoked as: edrelax_acceptance [path-to-edrelax-binary].

#include "edrelax/casekit/builders.hpp"
#include "edrelax/casekit/json_io.hpp"
#include "edrelax/casekit/random.hpp"
#include "edrelax/oracle/oracle.hpp"
#include "edrelax/qp/kkt.hpp"
#include "edrelax/qp/solve.hpp"
#include "edrelax/relax/conditions.hpp"
#include "edrelax/relax/exactness.hpp"
#include "edrelax/relax/identities.hpp"
#include "edrelax/relax/lmp.hpp"
#include "edrelax/rng.hpp"
#include "edrelax/storage.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <sys/wait.h>

using namespace edrelax;

namespace {

int failures = 0;
std::vector<std::pair<int, std::string>> report_lines;

void report(int id, bool pass, const std::string& name, const std::string& detail) {
  std::ostringstream os;
  os << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << name;
  if (!detail.empty()) os << " (" << detail << ")";
  report_lines.emplace_back(id, os.str());
  if (!pass) ++failures;
}

struct SolvedInstance {
  double stationarity_norm = 0.0;
  double max_cs = 0.0;
  double relaxed_objective = 0.0;
  double oracle_objective = 0.0;
  bool has_oracle = false;
  bool exact_verdict = false;  // max_product <= 1e-7, what cmd_verify reports
  double max_product = 0.0;
};

std::vector<SolvedInstance> g_pool;  // every instance solved by this suite

void pool_instance(const qp::DispatchSolution& sol, const NetworkCase& c,
                   const oracle::OracleResult* orc) {
  SolvedInstance rec;
  rec.stationarity_norm = qp::kkt_residuals(sol, c).max_abs_normalized;
  rec.max_cs = sol.residuals.max_comp_product;
  rec.relaxed_objective = sol.objective;
  rec.max_product = relax::verify_exactness(sol, 1e-7).max_product;
  rec.exact_verdict = rec.max_product <= 1e-7;
  if (orc != nullptr) {
    rec.has_oracle = true;
    rec.oracle_objective = orc->best_objective;
  }
  g_pool.push_back(rec);
}

// ---- criterion 1: the forecast lower bound arithmetic -----------------------
void criterion_1() {
  relax::LmpForecast f;
  f.forecast = Eigen::MatrixXd::Constant(1, 1, 20.0);
  f.mape = 0.01;
  const double bound = relax::lmp_lower_bound(f)(0, 0);
  std::ostringstream os;
  os << "bound(20 $/MWh, mape 1%) = " << bound;
  report(1, std::abs(bound - 19.40) <= 1e-12, "forecast lower bound reproduces 19.40", os.str());
}

// ---- criterion 2: theorem suites over the three groups ----------------------
struct GroupStats {
  int qualifying = 0;
  int attempts = 0;
  double worst_product = 0.0;
  double worst_gap_rel = 0.0;
  bool ok = true;
};

GroupStats run_group_suite(relax::ConditionGroup group) {
  GroupStats stats;
  const casekit::Targeting targeting = group == relax::ConditionGroup::C
                                           ? casekit::Targeting::satisfy_c
                                           : casekit::Targeting::satisfy_a;
  std::uint64_t seed = group == relax::ConditionGroup::A   ? 10000
                       : group == relax::ConditionGroup::B ? 20000
                                                           : 30000;
  while (stats.qualifying < 50 && stats.attempts < 200) {
    ++stats.attempts;
    casekit::ScenarioSpec spec;
    spec.seed = seed++;
    spec.n_buses = 2 + static_cast<int>(spec.seed % 4);       // 2..5
    spec.n_storages = 1 + static_cast<int>(spec.seed % 2);    // 1..2
    spec.horizon_steps = 2 + static_cast<int>(spec.seed % 3); // 2..4
    spec.targeting = targeting;
    const NetworkCase c = casekit::generate_random(spec);
    const qp::DispatchSolution sol = qp::solve_case(c);
    if (sol.status != qp::SolveStatus::optimal) continue;
    const Eigen::MatrixXd lmp = relax::compute_lmp(sol, c.network).lmp;
    relax::ConditionReport rep;
    switch (group) {
      case relax::ConditionGroup::A:
        rep = relax::check_conditions_a(c.prices, c.storages, lmp,
                                        relax::CheckMode::a_posteriori, &sol.p_dc);
        break;
      case relax::ConditionGroup::B:
        rep = relax::check_conditions_b(c.prices, c.storages, lmp,
                                        relax::CheckMode::a_posteriori, &sol.p_dc);
        break;
      case relax::ConditionGroup::C:
        rep = relax::check_conditions_c(c.prices, c.storages, lmp,
                                        relax::CheckMode::a_posteriori, &sol.p_dc);
        break;
    }
    if (!rep.satisfied) continue;
    ++stats.qualifying;

    const relax::ExactnessReport ex = relax::verify_exactness(sol, 1e-7);
    stats.worst_product = std::max(stats.worst_product, ex.max_product);
    if (ex.max_product > 1e-7) stats.ok = false;

    const oracle::OracleResult orc = oracle::enumerate_mpec(c);
    const double rel_gap = (orc.best_objective - sol.objective) /
                           std::max(1.0, std::abs(orc.best_objective));
    stats.worst_gap_rel = std::max(stats.worst_gap_rel, std::abs(rel_gap));
    if (std::abs(rel_gap) > 1e-6) stats.ok = false;
    pool_instance(sol, c, &orc);
  }
  if (stats.qualifying < 50) stats.ok = false;
  return stats;
}

void criterion_2() {
  bool ok = true;
  std::ostringstream os;
  const char* names[] = {"A", "B", "C"};
  const relax::ConditionGroup groups[] = {relax::ConditionGroup::A, relax::ConditionGroup::B,
                                          relax::ConditionGroup::C};
  for (int g = 0; g < 3; ++g) {
    const GroupStats stats = run_group_suite(groups[g]);
    ok = ok && stats.ok;
    os << names[g] << ": " << stats.qualifying << "/50 qualifying, max product "
       << stats.worst_product << ", max |rel gap| " << stats.worst_gap_rel << "; ";
  }
  report(2, ok, "condition-satisfying instances are exact (50 per group)", os.str());
}

// ---- criterion 3: the counterexample is detected -----------------------------
void criterion_3(const std::string& cli) {
  const NetworkCase c = casekit::build_counterexample_case();
  const qp::DispatchSolution sol = qp::solve_case(c);
  bool ok = sol.status == qp::SolveStatus::optimal;
  const relax::ExactnessReport ex = relax::verify_exactness(sol, 1e-7);
  ok = ok && ex.max_product > 1e-3;
  const oracle::OracleResult orc = oracle::enumerate_mpec(c);
  const double gap = orc.best_objective - sol.objective;
  ok = ok && gap > 1e-6 * std::max(1.0, std::abs(orc.best_objective));
  pool_instance(sol, c, &orc);

  int verify_exit = -1;
  if (!cli.empty()) {
    const std::string dir = "/tmp";
    const std::string path = dir + "/edrelax_acceptance_ce.json";
    casekit::save_case_file(path, c);
    const std::string cmd = cli + " verify " + path + " >/dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    verify_exit = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    ok = ok && verify_exit == 1;
  }
  std::ostringstream os;
  os << "max product " << ex.max_product << " MW^2, oracle gap " << gap << " $, verify exit "
     << verify_exit;
  report(3, ok, "constructed counterexample is flagged inexact", os.str());
}

// ---- criterion 4: KKT fidelity across the pool -------------------------------
void criterion_4() {
  double worst_stat = 0.0, worst_cs = 0.0;
  for (const SolvedInstance& rec : g_pool) {
    worst_stat = std::max(worst_stat, rec.stationarity_norm);
    worst_cs = std::max(worst_cs, rec.max_cs);
  }
  std::ostringstream os;
  os << g_pool.size() << " instances, max stationarity " << worst_stat << ", max cs product "
     << worst_cs;
  report(4, worst_stat <= 1e-6 && worst_cs <= 1e-6 && !g_pool.empty(),
         "stationarity and complementarity residuals within 1e-6", os.str());
}

// ---- criterion 5: proof identities are pure algebra --------------------------
void criterion_5() {
  Rng rng(0xACCE5);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    relax::StationarityPoint p;
    p.f_slope = rng.uniform(-40.0, 40.0);
    p.g_prime = rng.uniform(0.0, 50.0);
    p.alpha1 = 0.0;
    p.alpha3 = 0.0;
    p.alpha2 = rng.uniform(0.0, 10.0);
    p.alpha4 = rng.uniform(0.0, 10.0);
    p.gamma = rng.uniform(-30.0, 30.0);
    p.lambda = rng.uniform(-60.0, 60.0);
    p.gsf_mu = rng.uniform(-25.0, 25.0);
    p.eta_ch = rng.uniform(0.6, 1.0);
    p.eta_dc = rng.uniform(0.6, 0.999);
    p.dt = rng.uniform(0.1, 1.0);
    const double r_pch = relax::stationarity_charge(p);
    const double r_pdc = relax::stationarity_discharge(p);
    worst = std::max(worst, std::abs(relax::proof_identity_b(p, r_pch, r_pdc)));
    worst = std::max(worst, std::abs(relax::proof_identity_c(p, r_pch, r_pdc).residual));
  }
  std::ostringstream os;
  os << "max |residual| over 1000 draws = " << worst;
  report(5, worst <= 1e-10, "proof identities hold to 1e-10", os.str());
}

// ---- criterion 6: oracle consistency over the pool ---------------------------
void criterion_6() {
  bool ok = true;
  int with_oracle = 0;
  std::ostringstream os;
  for (const SolvedInstance& rec : g_pool) {
    if (!rec.has_oracle) continue;
    ++with_oracle;
    const double scale = std::max(1.0, std::abs(rec.oracle_objective));
    const double gap = rec.oracle_objective - rec.relaxed_objective;
    if (gap < -1e-6 * scale) {
      ok = false;
      os << "lower bound violated (gap " << gap << "); ";
    }
    const bool equal = std::abs(gap) <= 1e-6 * scale;
    if (equal != rec.exact_verdict) {
      ok = false;
      os << "gap/verdict mismatch (gap " << gap << ", product " << rec.max_product << "); ";
    }
  }
  os << with_oracle << " oracle comparisons";
  report(6, ok && with_oracle > 0, "relaxation bounds the oracle and matches the verdict",
         os.str());
}

// ---- criterion 7: the 30-bus scenario at scale -------------------------------
void criterion_7() {
  const NetworkCase c = casekit::build_ieee30_scenario();
  const auto t0 = std::chrono::steady_clock::now();
  const qp::DispatchSolution sol = qp::solve_case(c);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool ok = sol.status == qp::SolveStatus::optimal && seconds < 60.0;
  std::ostringstream os;
  os << "status " << qp::solve_status_name(sol.status) << ", " << seconds << " s, "
     << sol.iterations << " iterations";
  double min_lmp = 0.0, max_product = 0.0;
  if (sol.status == qp::SolveStatus::optimal) {
    const Eigen::MatrixXd lmp = relax::compute_lmp(sol, c.network).lmp;
    min_lmp = lmp.minCoeff();
    ok = ok && min_lmp > 0.0;
    const auto rep = relax::check_conditions_a(c.prices, c.storages, lmp,
                                               relax::CheckMode::a_posteriori, &sol.p_dc);
    ok = ok && rep.satisfied;
    max_product = relax::verify_exactness(sol, 1e-7).max_product;
    ok = ok && max_product <= 1e-7;
    pool_instance(sol, c, nullptr);
    os << ", min LMP " << min_lmp << " $/MWh, conditions A "
       << (rep.satisfied ? "hold" : "fail") << ", max product " << max_product;
  }
  report(7, ok, "30-bus scenario solves within budget and stays exact", os.str());
}

// ---- criterion 8: the energy recursion against direct evaluation -------------
void criterion_8() {
  Rng rng(88);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    StorageDevice s;
    s.eta_ch = rng.uniform(0.7, 1.0);
    s.eta_dc = rng.uniform(0.7, 1.0);
    s.self_discharge = trial % 4 == 0 ? 0.01 : rng.uniform(0.0, 0.08);
    s.e0 = rng.uniform(0.0, 100.0);
    const int T = rng.uniform_int(1, 16);
    std::vector<double> ch(static_cast<size_t>(T)), dc(static_cast<size_t>(T));
    for (int t = 0; t < T; ++t) {
      ch[static_cast<size_t>(t)] = rng.uniform(0.0, 12.0);
      dc[static_cast<size_t>(t)] = rng.uniform(0.0, 12.0);
    }
    const double dt = rng.uniform(0.1, 1.0);
    const auto fast = energy_trajectory(s, ch, dc, dt);
    const double xi = s.retention();
    for (int t = 1; t <= T; ++t) {
      double direct = std::pow(xi, t) * s.e0;
      for (int tau = 1; tau <= t; ++tau)
        direct += std::pow(xi, t - tau) *
                  (s.eta_ch * ch[static_cast<size_t>(tau - 1)] -
                   dc[static_cast<size_t>(tau - 1)] / s.eta_dc) *
                  dt;
      const double rel = std::abs(fast[static_cast<size_t>(t - 1)] - direct) /
                         std::max(1.0, std::abs(direct));
      worst = std::max(worst, rel);
    }
  }
  std::ostringstream os;
  os << "max relative deviation " << worst << " over 100 schedules";
  report(8, worst <= 1e-12, "energy recursion matches direct evaluation", os.str());
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  criterion_1();
  criterion_2();
  criterion_3(cli);
  criterion_7();  // runs before 4/6 so its instance joins the residual pool
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_8();
  std::sort(report_lines.begin(), report_lines.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [id, line] : report_lines) std::cout << line << std::endl;
  std::cout << (failures == 0 ? "acceptance: all criteria passed"
                              : "acceptance: " + std::to_string(failures) + " criterion(s) failed")
            << std::endl;
  return failures;
}
