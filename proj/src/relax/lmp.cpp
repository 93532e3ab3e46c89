#include "edrelax/relax/lmp.hpp"

#include <stdexcept>

namespace edrelax::relax {

LmpSeries compute_lmp(const qp::DispatchSolution& sol, const Network& net) {
  const int N = net.n_buses;
  const int T = static_cast<int>(sol.duals.lambda.size());
  const int L = static_cast<int>(net.lines.size());
  if (net.gsf.rows() != L || net.gsf.cols() != N)
    throw std::invalid_argument("compute_lmp: network gsf not computed");
  LmpSeries out;
  out.lmp.resize(N, T);
  for (int t = 0; t < T; ++t) out.lmp.col(t).setConstant(sol.duals.lambda(t));
  for (int t = 0; t < T; ++t)
    for (int j = 0; j < L; ++j) {
      const double dm = sol.duals.mu1(j, t) - sol.duals.mu2(j, t);
      if (dm == 0.0) continue;
      for (int b = 0; b < N; ++b) out.lmp(b, t) += net.gsf(j, b) * dm;
    }
  return out;
}

Eigen::MatrixXd lmp_lower_bound(const LmpForecast& f) {
  if (f.mape < 0.0) throw std::invalid_argument("lmp_lower_bound: negative mape");
  return f.forecast.array() - 3.0 * f.mape * f.forecast.array().abs();
}

}  // namespace edrelax::relax
