#include "edrelax/relax/identities.hpp"

namespace edrelax::relax {

double stationarity_charge(const StationarityPoint& p) {
  return -p.f_slope - p.alpha1 + p.alpha2 - p.eta_ch * p.gamma * p.dt + p.lambda + p.gsf_mu;
}

double stationarity_discharge(const StationarityPoint& p) {
  return p.g_prime - p.alpha3 + p.alpha4 + p.gamma * p.dt / p.eta_dc - p.lambda - p.gsf_mu;
}

double proof_identity_b(const StationarityPoint& p, double r_pch, double r_pdc) {
  const double lhs =
      (1.0 / p.eta_dc - p.eta_ch) * p.gamma * p.dt + p.g_prime - p.f_slope + p.alpha2 + p.alpha4;
  return lhs - (r_pch + r_pdc);
}

IdentityCResult proof_identity_c(const StationarityPoint& p, double r_pch, double r_pdc,
                                 const ConditionSettings& settings) {
  const double cyc = p.eta_cycle();
  const double lhs = (cyc * p.g_prime - p.f_slope) + (1.0 - cyc) * p.lmp() + p.alpha2 + cyc * p.alpha4;
  IdentityCResult out;
  out.residual = lhs - (cyc * r_pdc + r_pch);
  // Under C-1 (strict) and C-2, a simultaneity point would need the
  // multiplier sum below to be negative.
  out.multiplier_sum = -((cyc * p.g_prime - p.f_slope) + (1.0 - cyc) * p.lmp());
  const bool c1 = cyc * p.g_prime - p.f_slope > settings.strict_eps;
  const bool c2 = p.lmp() >= 0.0;
  out.contradiction = c1 && c2;
  return out;
}

}  // namespace edrelax::relax
