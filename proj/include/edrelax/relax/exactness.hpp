#pragma once

#include "edrelax/qp/solve.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace edrelax::relax {

/// Complementarity audit of a relaxed solution: the relaxation is exact when
/// no storage charges and discharges in the same step.
struct ExactnessReport {
  double max_product = 0.0;  // max p_ch * p_dc, MW^2
  int argmax_storage = -1;
  int argmax_t = -1;
  double tol = 1e-7;
  bool exact = true;
  std::vector<std::pair<int, int>> violations;  // (storage, t) with product > tol
  std::optional<double> oracle_gap;             // filled by an oracle comparison
};

ExactnessReport verify_exactness(const qp::DispatchSolution& sol, double tol = 1e-7);

}  // namespace edrelax::relax
