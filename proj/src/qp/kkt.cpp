#include "edrelax/qp/kkt.hpp"

#include <cmath>

namespace edrelax::qp {

GammaSeries compute_gamma(const DispatchSolution& sol, const NetworkCase& c) {
  const int S = static_cast<int>(c.storages.size());
  const int T = c.horizon.steps;
  GammaSeries out;
  out.gamma.resize(S, T);
  for (int i = 0; i < S; ++i) {
    const double xi = c.storages[static_cast<size_t>(i)].retention();
    for (int t = T - 1; t >= 0; --t) {
      const double tail = (t == T - 1) ? sol.duals.phi(i) : xi * out.gamma(i, t + 1);
      out.gamma(i, t) = sol.duals.beta1(i, t) - sol.duals.beta2(i, t) + tail;
    }
  }
  return out;
}

KktReport kkt_residuals(const DispatchSolution& sol, const NetworkCase& c) {
  const int S = static_cast<int>(c.storages.size());
  const int G = static_cast<int>(c.generators.size());
  const int T = c.horizon.steps;
  const int L = static_cast<int>(c.network.lines.size());
  const double dt = c.horizon.dt_hours;
  const Eigen::MatrixXd& gsf = c.network.gsf;
  const GammaSeries gamma = compute_gamma(sol, c);

  KktReport rep;
  rep.r_pch.resize(S, T);
  rep.r_pdc.resize(S, T);
  rep.r_pg.resize(G, T);

  // congestion price seen at a bus: sum_j GSF(j, bus) (mu1 - mu2)
  Eigen::MatrixXd bus_mu = Eigen::MatrixXd::Zero(c.network.n_buses, T);
  for (int t = 0; t < T; ++t)
    for (int j = 0; j < L; ++j) {
      const double dm = sol.duals.mu1(j, t) - sol.duals.mu2(j, t);
      if (dm == 0.0) continue;
      for (int b = 0; b < c.network.n_buses; ++b) bus_mu(b, t) += gsf(j, b) * dm;
    }

  for (int i = 0; i < S; ++i) {
    const StorageDevice& s = c.storages[static_cast<size_t>(i)];
    const StoragePrice& p = c.prices.storages[static_cast<size_t>(i)];
    for (int t = 0; t < T; ++t) {
      const double lam = sol.duals.lambda(t);
      const double gmu = bus_mu(s.bus, t);
      rep.r_pch(i, t) = -p.f_slope - sol.duals.alpha1(i, t) + sol.duals.alpha2(i, t) -
                        s.eta_ch * gamma.gamma(i, t) * dt + lam + gmu;
      rep.r_pdc(i, t) = p.g_prime(sol.p_dc(i, t)) - sol.duals.alpha3(i, t) +
                        sol.duals.alpha4(i, t) + gamma.gamma(i, t) * dt / s.eta_dc - lam - gmu;
    }
  }

  for (int k = 0; k < G; ++k) {
    const Generator& g = c.generators[static_cast<size_t>(k)];
    for (int t = 0; t < T; ++t) {
      double r = g.marginal_cost(sol.p_g(k, t)) - sol.duals.lambda(t) - bus_mu(g.bus, t) -
                 sol.duals.gen_lo(k, t) + sol.duals.gen_hi(k, t);
      if (t < T - 1) r += sol.duals.ramp_lo(k, t) - sol.duals.ramp_hi(k, t);
      if (t > 0) r += sol.duals.ramp_hi(k, t - 1) - sol.duals.ramp_lo(k, t - 1);
      rep.r_pg(k, t) = r;
    }
  }

  double sq = 0.0;
  int count = 0;
  auto fold = [&](const Eigen::MatrixXd& m) {
    for (Eigen::Index idx = 0; idx < m.size(); ++idx) {
      rep.max_abs = std::max(rep.max_abs, std::abs(m.data()[idx]));
      sq += m.data()[idx] * m.data()[idx];
      ++count;
    }
  };
  fold(rep.r_pch);
  fold(rep.r_pdc);
  fold(rep.r_pg);
  rep.rms = count ? std::sqrt(sq / count) : 0.0;

  double scale = std::max(1.0, sol.duals.lambda.size() ? sol.duals.lambda.cwiseAbs().maxCoeff() : 0.0);
  for (int k = 0; k < G; ++k)
    for (int t = 0; t < T; ++t)
      scale = std::max(scale, std::abs(c.generators[static_cast<size_t>(k)].marginal_cost(sol.p_g(k, t))));
  for (int i = 0; i < S; ++i) {
    const StoragePrice& p = c.prices.storages[static_cast<size_t>(i)];
    scale = std::max({scale, std::abs(p.f_slope), std::abs(p.g_lin)});
  }
  rep.max_abs_normalized = rep.max_abs / scale;
  return rep;
}

}  // namespace edrelax::qp
