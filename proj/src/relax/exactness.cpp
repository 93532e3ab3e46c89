#include "edrelax/relax/exactness.hpp"

namespace edrelax::relax {

ExactnessReport verify_exactness(const qp::DispatchSolution& sol, double tol) {
  ExactnessReport rep;
  rep.tol = tol;
  for (int i = 0; i < sol.p_ch.rows(); ++i)
    for (int t = 0; t < sol.p_ch.cols(); ++t) {
      const double product = sol.p_ch(i, t) * sol.p_dc(i, t);
      if (product > rep.max_product) {
        rep.max_product = product;
        rep.argmax_storage = i;
        rep.argmax_t = t;
      }
      if (product > tol) rep.violations.emplace_back(i, t);
    }
  rep.exact = rep.max_product <= tol;
  return rep;
}

}  // namespace edrelax::relax
