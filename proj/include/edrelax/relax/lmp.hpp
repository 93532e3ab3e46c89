#pragma once

#include "edrelax/qp/solve.hpp"

namespace edrelax::relax {

/// Locational marginal prices, buses x steps:
///   LMP_i(t) = lambda(t) + sum_j GSF(j,i) (mu1(j,t) - mu2(j,t)).
/// At any bus untouched by congestion this reduces to lambda(t).
struct LmpSeries {
  Eigen::MatrixXd lmp;  // N x T, $/MWh
};

LmpSeries compute_lmp(const qp::DispatchSolution& sol, const Network& net);

/// Price forecast with its reported mean absolute percentage error.
struct LmpForecast {
  Eigen::MatrixXd forecast;  // N x T, $/MWh
  double mape = 0.0;         // fraction, e.g. 0.01
};

/// Conservative lower bound on the realized LMP:
///   bound = forecast - 3 * mape * |forecast|.
/// For non-negative forecasts this is the (1 - 3 mape) scaling; taking the
/// magnitude keeps the bound below the forecast when prices go negative.
Eigen::MatrixXd lmp_lower_bound(const LmpForecast& f);

}  // namespace edrelax::relax
