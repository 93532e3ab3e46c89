#include "edrelax/storage.hpp"

#include <stdexcept>

namespace edrelax {

static void check_lengths(const StorageDevice&, std::span<const double> p_ch,
                          std::span<const double> p_dc) {
  if (p_ch.size() != p_dc.size())
    throw std::invalid_argument("energy_trajectory: p_ch and p_dc length mismatch");
}

std::vector<double> energy_trajectory(const StorageDevice& s, std::span<const double> p_ch,
                                      std::span<const double> p_dc, double dt_hours) {
  check_lengths(s, p_ch, p_dc);
  const double xi = s.retention();
  std::vector<double> e(p_ch.size());
  double prev = s.e0;
  for (size_t t = 0; t < p_ch.size(); ++t) {
    // Recursive form of the discounted sum; identical to the direct
    // evaluation because xi^(t-tau) telescopes.
    prev = xi * prev + (s.eta_ch * p_ch[t] - p_dc[t] / s.eta_dc) * dt_hours;
    e[t] = prev;
  }
  return e;
}

double net_charge_lhs(const StorageDevice& s, std::span<const double> p_ch,
                      std::span<const double> p_dc, double dt_hours) {
  check_lengths(s, p_ch, p_dc);
  const double xi = s.retention();
  double acc = 0.0;
  for (size_t t = 0; t < p_ch.size(); ++t)
    acc = xi * acc + (s.eta_ch * p_ch[t] - p_dc[t] / s.eta_dc) * dt_hours;
  return acc;
}

}  // namespace edrelax
