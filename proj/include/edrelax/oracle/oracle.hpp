#pragma once

#include "edrelax/qp/solve.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace edrelax::oracle {

/// Ground truth for the complementarity-constrained dispatch at desk scale:
/// every (storage, step) is fixed to charge-allowed (p_dc = 0) or
/// discharge-allowed (p_ch = 0), the restricted convex QP is solved per
/// pattern, and the best objective wins. Any point satisfying the
/// complementarity constraint is feasible in at least one pattern, so the
/// minimum over patterns is the true optimum.
struct OracleSettings {
  std::uint64_t pattern_limit = 1ull << 20;
  int threads = 0;  // 0: use EDRELAX_THREADS or hardware concurrency
  bool keep_pattern_table = false;
  bool disable_pruning = false;  // test hook: pruning must never change results
  qp::SolveSettings qp_settings = tight_defaults();

  static qp::SolveSettings tight_defaults() {
    qp::SolveSettings s;
    s.primal_tol = 1e-8;
    s.dual_tol = 1e-8;
    s.cs_tol = 1e-8;
    return s;
  }
};

struct OracleResult {
  double best_objective = 0.0;
  std::uint64_t best_pattern = 0;  // bit per (storage, step), 1 = discharge-allowed
  Eigen::MatrixXd p_ch, p_dc, p_g;
  std::uint64_t patterns_total = 0;
  std::uint64_t patterns_solved = 0;
  std::uint64_t patterns_infeasible = 0;
  std::uint64_t patterns_pruned = 0;
  std::vector<double> pattern_objectives;  // optional; NaN for unsolved patterns
  std::uint64_t case_fingerprint = 0;
};

struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AllPatternsInfeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CaseMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exhaustive enumeration. Throws BudgetExceeded when 2^(S*T) exceeds the
/// pattern limit and AllPatternsInfeasible when no pattern admits a feasible
/// point. Deterministic: ties break toward the smallest pattern index.
OracleResult enumerate_mpec(const NetworkCase& c, const OracleSettings& settings = {});

struct ExactnessComparison {
  double gap = 0.0;  // oracle best - relaxed objective, >= -tol
  bool exact = false;
  double max_product = 0.0;
  std::vector<std::pair<int, int>> witness;  // complementarity violations
};

/// Compares a relaxed solution with the oracle on the same case (fingerprint
/// checked). Exact means the gap closes within tol and the relaxed schedule
/// honors complementarity within tol.
ExactnessComparison compare(const qp::DispatchSolution& relaxed, const OracleResult& oracle,
                            double tol = 1e-6);

}  // namespace edrelax::oracle
