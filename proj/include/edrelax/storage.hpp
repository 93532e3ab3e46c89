#pragma once

#include "edrelax/types.hpp"

#include <span>
#include <vector>

namespace edrelax {

/// Stored energy after each step:
///   E(t) = xi^t E0 + sum_{tau=1..t} xi^(t-tau) (eta_ch p_ch(tau) - p_dc(tau)/eta_dc) dt
/// with xi = 1 - self_discharge. Throws std::invalid_argument on length mismatch.
std::vector<double> energy_trajectory(const StorageDevice& s, std::span<const double> p_ch,
                                      std::span<const double> p_dc, double dt_hours);

/// Left-hand side of the net-charging requirement:
///   sum_{tau=1..T} xi^(T-tau) (eta_ch p_ch(tau) - p_dc(tau)/eta_dc) dt
/// compared against e_req. Equals E(T) - xi^T E0.
double net_charge_lhs(const StorageDevice& s, std::span<const double> p_ch,
                      std::span<const double> p_dc, double dt_hours);

}  // namespace edrelax
