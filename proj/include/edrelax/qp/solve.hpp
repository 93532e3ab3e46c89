#pragma once

#include "edrelax/qp/ipm.hpp"
#include "edrelax/qp/relaxed_qp.hpp"

#include <Eigen/Dense>

#include <string>

namespace edrelax::qp {

/// How to handle the substituted stored-energy rows inside the solver. The
/// public QP always carries the substituted (dense-in-time) rows; expansion
/// reintroduces per-step energy variables internally so the KKT factorization
/// stays sparse on long horizons. Duals are identical either way.
enum class StateExpansion { automatic, never, always };

struct SolveSettings {
  double primal_tol = 1e-6;
  double dual_tol = 1e-6;
  double cs_tol = 1e-6;
  int max_iter = 200;
  bool polish = true;
  StateExpansion expansion = StateExpansion::automatic;
};

/// Named multipliers of the relaxed model, laid out per storage/generator/line
/// by time. All inequality multipliers are non-negative.
struct DualSolution {
  Eigen::VectorXd lambda;            // T, $/MWh, balance equality
  Eigen::MatrixXd alpha1, alpha2;    // S x T, charge window lower/upper
  Eigen::MatrixXd alpha3, alpha4;    // S x T, discharge window lower/upper
  Eigen::MatrixXd beta1, beta2;      // S x T, energy window lower/upper
  Eigen::VectorXd phi;               // S, net-charging requirement
  Eigen::MatrixXd mu1, mu2;          // L x T, flow window lower/upper
  Eigen::MatrixXd gen_lo, gen_hi;    // G x T, output window lower/upper
  Eigen::MatrixXd ramp_lo, ramp_hi;  // G x (T-1), ramp window lower/upper
};

struct SolutionResiduals {
  double primal_feas = 0.0;        // normalized worst violation over model rows
  double dual_feas = 0.0;          // most negative named multiplier, as a magnitude
  double stationarity = 0.0;       // normalized gradient-of-Lagrangian residual
  double max_comp_product = 0.0;   // max multiplier * slack over all sides
};

struct DispatchSolution {
  SolveStatus status = SolveStatus::max_iter;
  Eigen::MatrixXd p_ch, p_dc;  // S x T, MW
  Eigen::MatrixXd p_g;         // G x T, MW
  Eigen::MatrixXd energy;      // S x T, MWh, recovered through the recursion
  DualSolution duals;
  double objective = 0.0;  // $, the model's operating cost
  SolutionResiduals residuals;
  int iterations = 0;
  bool polished = false;
  std::string diagnosis;  // infeasibility detail, empty when optimal
  std::uint64_t case_fingerprint = 0;
};

DispatchSolution solve(const RelaxedQP& qp, const SolveSettings& settings = {});

/// assemble + solve in one step.
DispatchSolution solve_case(const NetworkCase& c, const SolveSettings& settings = {});

}  // namespace edrelax::qp
