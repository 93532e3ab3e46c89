#pragma once

#include "edrelax/qp/relaxed_qp.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace edrelax::qp {

enum class SolveStatus { optimal, infeasible, unbounded, max_iter };

const char* solve_status_name(SolveStatus s);

struct IpmSettings {
  double primal_tol = 1e-6;
  double dual_tol = 1e-6;
  double cs_tol = 1e-6;
  int max_iter = 200;
  bool polish = true;
  double regularization = 1e-9;
};

/// Raw interior-point result. Duals are reported per input row and side:
/// z_lo / z_up for inequality sides, y for equality rows (zero elsewhere).
/// The stationarity convention is
///   H x + c + sum_r a_r (y_r + z_up_r - z_lo_r) = 0.
struct IpmResult {
  SolveStatus status = SolveStatus::max_iter;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd z_lo, z_up;
  double qp_objective = 0.0;  // 1/2 x'Hx + c'x
  int iterations = 0;
  bool polished = false;
  double primal_residual = 0.0;    // normalized worst constraint violation
  double dual_residual = 0.0;      // normalized stationarity residual
  double max_comp_product = 0.0;   // max multiplier * slack over all sides
  int worst_row = -1;              // most violated row (infeasibility diagnosis)
  double worst_violation = 0.0;
};

/// Solves min 1/2 x'Hx + c'x over the double-sided rows (H diagonal PSD).
/// Mehrotra predictor-corrector on the regularized normal-equations system,
/// with an active-set polishing pass that sharpens complementarity to
/// machine precision when it succeeds.
IpmResult solve_ipm(int n_vars, std::span<const double> hessian_diag,
                    std::span<const double> linear_cost, std::span<const ConstraintRow> rows,
                    const IpmSettings& settings = {});

}  // namespace edrelax::qp
