#include "edrelax/gsf.hpp"

#include <stdexcept>

namespace edrelax {

Eigen::MatrixXd compute_gsf(const Network& net) {
  const int n = net.n_buses;
  const int l = static_cast<int>(net.lines.size());
  if (net.slack_bus < 0 || net.slack_bus >= n)
    throw std::runtime_error("compute_gsf: slack bus out of range");

  Eigen::MatrixXd gsf = Eigen::MatrixXd::Zero(l, n);
  if (l == 0) return gsf;  // single bus or edgeless network

  // Nodal susceptance matrix B = A^T diag(1/x) A with A the line incidence.
  Eigen::MatrixXd b_bus = Eigen::MatrixXd::Zero(n, n);
  for (const Line& ln : net.lines) {
    if (ln.reactance <= 0.0) throw std::runtime_error("compute_gsf: non-positive reactance");
    if (ln.from_bus < 0 || ln.from_bus >= n || ln.to_bus < 0 || ln.to_bus >= n)
      throw std::runtime_error("compute_gsf: line endpoint out of range");
    const double b = 1.0 / ln.reactance;
    b_bus(ln.from_bus, ln.from_bus) += b;
    b_bus(ln.to_bus, ln.to_bus) += b;
    b_bus(ln.from_bus, ln.to_bus) -= b;
    b_bus(ln.to_bus, ln.from_bus) -= b;
  }

  // Reduce by the slack bus and invert; slack keeps a zero column.
  std::vector<int> reduced(static_cast<size_t>(n), -1);
  int m = 0;
  for (int i = 0; i < n; ++i)
    if (i != net.slack_bus) reduced[static_cast<size_t>(i)] = m++;

  Eigen::MatrixXd b_red(m, m);
  for (int i = 0; i < n; ++i) {
    if (reduced[static_cast<size_t>(i)] < 0) continue;
    for (int j = 0; j < n; ++j) {
      if (reduced[static_cast<size_t>(j)] < 0) continue;
      b_red(reduced[static_cast<size_t>(i)], reduced[static_cast<size_t>(j)]) = b_bus(i, j);
    }
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(b_red);
  if (!lu.isInvertible())
    throw std::runtime_error(
        "compute_gsf: reduced susceptance matrix is singular (disconnected network)");
  const Eigen::MatrixXd theta = lu.inverse();  // bus angles per unit injection

  // Flow on line j for a unit injection at bus i (withdrawn at the slack):
  // (theta_from - theta_to) / x_j.
  for (int j = 0; j < l; ++j) {
    const Line& ln = net.lines[static_cast<size_t>(j)];
    const double b = 1.0 / ln.reactance;
    const int rf = reduced[static_cast<size_t>(ln.from_bus)];
    const int rt = reduced[static_cast<size_t>(ln.to_bus)];
    for (int i = 0; i < n; ++i) {
      const int ri = reduced[static_cast<size_t>(i)];
      if (ri < 0) continue;  // slack column stays zero
      const double th_from = rf < 0 ? 0.0 : theta(rf, ri);
      const double th_to = rt < 0 ? 0.0 : theta(rt, ri);
      gsf(j, i) = b * (th_from - th_to);
    }
  }
  return gsf;
}

}  // namespace edrelax
