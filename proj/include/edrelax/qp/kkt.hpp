#pragma once

#include "edrelax/qp/solve.hpp"

namespace edrelax::qp {

/// Discounted accumulation of the energy-window multipliers,
///   Gamma(t) = sum_{tau >= t} xi^(tau-t) (beta1(tau) - beta2(tau)) + xi^(T-t) phi,
/// computed by the backward recursion Gamma(t) = beta1(t) - beta2(t) + xi Gamma(t+1)
/// with the net-charge multiplier folded into the terminal step.
struct GammaSeries {
  Eigen::MatrixXd gamma;  // S x T, $/MWh
};

GammaSeries compute_gamma(const DispatchSolution& sol, const NetworkCase& c);

/// Stationarity residuals of the charge/discharge/generator variables,
/// evaluated from the named multipliers (independent of the solver's own
/// bookkeeping). At an optimal solution every entry is zero up to tolerance.
struct KktReport {
  Eigen::MatrixXd r_pch, r_pdc;  // S x T
  Eigen::MatrixXd r_pg;          // G x T
  double max_abs = 0.0;
  double rms = 0.0;
  double max_abs_normalized = 0.0;  // max_abs over the price magnitude scale
};

KktReport kkt_residuals(const DispatchSolution& sol, const NetworkCase& c);

}  // namespace edrelax::qp
