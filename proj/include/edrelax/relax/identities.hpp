#pragma once

#include "edrelax/relax/conditions.hpp"

namespace edrelax::relax {

/// Everything entering the charge/discharge stationarity expressions at one
/// (storage, step) sample. gsf_mu is the congestion term
/// sum_j GSF(j, bus) (mu1 - mu2); lmp() is the implied locational price.
struct StationarityPoint {
  double f_slope = 0.0;
  double g_prime = 0.0;
  double alpha1 = 0.0, alpha2 = 0.0, alpha3 = 0.0, alpha4 = 0.0;
  double gamma = 0.0;
  double lambda = 0.0;
  double gsf_mu = 0.0;
  double eta_ch = 1.0, eta_dc = 1.0;
  double dt = 1.0;

  double lmp() const { return lambda + gsf_mu; }
  double eta_cycle() const { return eta_ch * eta_dc; }
};

/// Charge-side stationarity residual (zero at any KKT point).
double stationarity_charge(const StationarityPoint& p);

/// Discharge-side stationarity residual.
double stationarity_discharge(const StationarityPoint& p);

/// Residual of the group-B proof identity: with alpha1 = alpha3 = 0,
///   (1/eta_dc - eta_ch) Gamma dt + g' - f' + alpha2 + alpha4
/// equals r_pch + r_pdc identically; the return value is the difference and
/// must vanish up to roundoff for arbitrary multiplier assignments. Nonzero
/// alpha1/alpha3 shift it by exactly alpha1 + alpha3 (reported, not an error).
double proof_identity_b(const StationarityPoint& p, double r_pch, double r_pdc);

struct IdentityCResult {
  double residual;          // identity defect, ~0 for pure algebra
  bool contradiction;       // group C premises force a negative multiplier sum
  double multiplier_sum;    // the value the identity pins on alpha2 + eta_cycle alpha4
};

/// Residual of the group-C proof identity (eta_cycle * discharge + charge
/// combination) plus the contradiction predicate: when C-1 and C-2 hold at
/// this point, the bracketed sum forces alpha2 + eta_cycle*alpha4 < 0, which
/// non-negative multipliers cannot satisfy — certifying no simultaneity.
IdentityCResult proof_identity_c(const StationarityPoint& p, double r_pch, double r_pdc,
                                 const ConditionSettings& settings = {});

}  // namespace edrelax::relax
