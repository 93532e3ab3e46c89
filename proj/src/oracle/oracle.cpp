#include "edrelax/oracle/oracle.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>

namespace edrelax::oracle {

namespace {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("EDRELAX_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace

OracleResult enumerate_mpec(const NetworkCase& c, const OracleSettings& settings) {
  const qp::RelaxedQP base = qp::assemble_relaxed(c);
  const int S = base.n_storages;
  const int T = base.steps;
  const int bits = S * T;
  if (bits >= 63 || (1ull << bits) > settings.pattern_limit) {
    std::ostringstream os;
    os << "oracle: 2^(" << S << "*" << T << ") patterns exceed the limit of "
       << settings.pattern_limit;
    throw BudgetExceeded(os.str());
  }
  const std::uint64_t total = 1ull << bits;

  // row index of each charge/discharge window, keyed by (storage, step)
  std::vector<int> ch_row(static_cast<size_t>(bits), -1), dc_row(static_cast<size_t>(bits), -1);
  for (size_t r = 0; r < base.rows.size(); ++r) {
    const qp::ConstraintRow& row = base.rows[r];
    if (row.origin == qp::RowOrigin::charge_box)
      ch_row[static_cast<size_t>(row.entity * T + row.t)] = static_cast<int>(r);
    else if (row.origin == qp::RowOrigin::discharge_box)
      dc_row[static_cast<size_t>(row.entity * T + row.t)] = static_cast<int>(r);
  }

  // Largest net charge each storage can reach under a pattern: charging at the
  // rated limit in every charge-allowed step, discharging nothing. Patterns
  // below the requirement are infeasible and skipped.
  const double dt = c.horizon.dt_hours;
  auto pattern_prunable = [&](std::uint64_t pattern) {
    for (int i = 0; i < S; ++i) {
      const StorageDevice& s = c.storages[static_cast<size_t>(i)];
      if (s.e_req_relaxed()) continue;
      const double xi = s.retention();
      double best = 0.0;
      for (int t = 0; t < T; ++t) {
        const bool discharge_allowed = (pattern >> (i * T + t)) & 1u;
        if (!discharge_allowed)
          best = xi * best + s.eta_ch * s.ch_max[static_cast<size_t>(t)] * dt;
        else
          best = xi * best;
      }
      if (best < s.e_req - 1e-9) return true;
    }
    return false;
  };

  OracleResult out;
  out.patterns_total = total;
  out.case_fingerprint = base.fingerprint;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> objectives(total, nan);
  std::vector<char> state(total, 0);  // 0 unsolved, 1 optimal, 2 infeasible, 3 pruned, 4 failed

  const int threads = std::max(1, std::min<int>(resolve_threads(settings.threads),
                                                static_cast<int>(std::min<std::uint64_t>(total, 64))));
  std::atomic<std::uint64_t> cursor{0};
  auto worker = [&]() {
    qp::RelaxedQP local = base;  // per-thread copy; only bounds are mutated
    for (;;) {
      const std::uint64_t p = cursor.fetch_add(1);
      if (p >= total) return;
      if (!settings.disable_pruning && pattern_prunable(p)) {
        state[p] = 3;
        continue;
      }
      for (int b = 0; b < bits; ++b) {
        const bool discharge_allowed = (p >> b) & 1u;
        qp::ConstraintRow& ch = local.rows[static_cast<size_t>(ch_row[static_cast<size_t>(b)])];
        qp::ConstraintRow& dc = local.rows[static_cast<size_t>(dc_row[static_cast<size_t>(b)])];
        const int i = b / T;
        const int t = b % T;
        const StorageDevice& s = c.storages[static_cast<size_t>(i)];
        ch.up = discharge_allowed ? 0.0 : s.ch_max[static_cast<size_t>(t)];
        dc.up = discharge_allowed ? s.dc_max[static_cast<size_t>(t)] : 0.0;
      }
      const qp::DispatchSolution sol = qp::solve(local, settings.qp_settings);
      if (sol.status == qp::SolveStatus::optimal) {
        objectives[p] = sol.objective;
        state[p] = 1;
      } else if (sol.status == qp::SolveStatus::infeasible) {
        state[p] = 2;
      } else {
        state[p] = 4;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::uint64_t best = total;
  double best_obj = std::numeric_limits<double>::infinity();
  for (std::uint64_t p = 0; p < total; ++p) {
    switch (state[p]) {
      case 1:
        ++out.patterns_solved;
        if (objectives[p] < best_obj) {
          best_obj = objectives[p];
          best = p;
        }
        break;
      case 2: ++out.patterns_infeasible; break;
      case 3: ++out.patterns_pruned; break;
      case 4: {
        std::ostringstream os;
        os << "oracle: pattern " << p << " failed to solve";
        throw std::runtime_error(os.str());
      }
      default: break;
    }
  }
  if (best == total) throw AllPatternsInfeasible("oracle: every complementarity pattern is infeasible");

  // re-solve the winner to recover its schedule
  {
    qp::RelaxedQP local = base;
    for (int b = 0; b < bits; ++b) {
      const bool discharge_allowed = (best >> b) & 1u;
      qp::ConstraintRow& ch = local.rows[static_cast<size_t>(ch_row[static_cast<size_t>(b)])];
      qp::ConstraintRow& dc = local.rows[static_cast<size_t>(dc_row[static_cast<size_t>(b)])];
      const int i = b / T;
      const int t = b % T;
      const StorageDevice& s = c.storages[static_cast<size_t>(i)];
      ch.up = discharge_allowed ? 0.0 : s.ch_max[static_cast<size_t>(t)];
      dc.up = discharge_allowed ? s.dc_max[static_cast<size_t>(t)] : 0.0;
    }
    const qp::DispatchSolution sol = qp::solve(local, settings.qp_settings);
    out.p_ch = sol.p_ch;
    out.p_dc = sol.p_dc;
    out.p_g = sol.p_g;
  }
  out.best_objective = best_obj;
  out.best_pattern = best;
  if (settings.keep_pattern_table) out.pattern_objectives = std::move(objectives);
  return out;
}

ExactnessComparison compare(const qp::DispatchSolution& relaxed, const OracleResult& oracle,
                            double tol) {
  if (relaxed.case_fingerprint != oracle.case_fingerprint)
    throw CaseMismatch("compare: relaxed solution and oracle come from different cases");
  ExactnessComparison cmp;
  cmp.gap = oracle.best_objective - relaxed.objective;
  for (int i = 0; i < relaxed.p_ch.rows(); ++i)
    for (int t = 0; t < relaxed.p_ch.cols(); ++t) {
      const double product = relaxed.p_ch(i, t) * relaxed.p_dc(i, t);
      cmp.max_product = std::max(cmp.max_product, product);
      if (product > 1e-7) cmp.witness.emplace_back(i, t);
    }
  const double gap_tol = tol * std::max(1.0, std::abs(oracle.best_objective));
  cmp.exact = cmp.gap <= gap_tol && cmp.max_product <= 1e-7;
  return cmp;
}

}  // namespace edrelax::oracle
