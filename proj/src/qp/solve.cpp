#include "edrelax/qp/solve.hpp"

#include "edrelax/storage.hpp"

#include <cmath>
#include <sstream>

namespace edrelax::qp {

namespace {

struct InternalProblem {
  int n_vars = 0;
  std::vector<double> hdiag;
  std::vector<double> cost;
  std::vector<ConstraintRow> rows;  // rows[0..m_public) mirror the public rows
  bool expanded = false;
};

/// Rebuilds the solver form. Without expansion this is the public problem
/// verbatim. With expansion, each energy-window row becomes a bound on a new
/// per-step energy variable, the net-charge row becomes a bound on the final
/// energy variable, and the recursion itself is appended as equality links.
InternalProblem build_internal(const RelaxedQP& qp, bool expand) {
  InternalProblem p;
  const int n = qp.n_vars();
  const int S = qp.n_storages;
  const int T = qp.steps;
  p.n_vars = expand ? n + S * T : n;
  p.hdiag = qp.hessian_diag;
  p.cost = qp.linear_cost;
  p.hdiag.resize(static_cast<size_t>(p.n_vars), 0.0);
  p.cost.resize(static_cast<size_t>(p.n_vars), 0.0);
  p.expanded = expand;
  if (!expand) {
    p.rows = qp.rows;
    return p;
  }

  auto evar = [&](int storage, int t) { return n + storage * T + t; };
  p.rows.reserve(qp.rows.size() + static_cast<size_t>(S * T));
  for (const ConstraintRow& row : qp.rows) {
    if (row.origin == RowOrigin::energy_window) {
      const StorageDevice& s = qp.source.storages[static_cast<size_t>(row.entity)];
      ConstraintRow box;
      box.origin = row.origin;
      box.entity = row.entity;
      box.t = row.t;
      box.lo = s.e_min[static_cast<size_t>(row.t)];
      box.up = s.e_max[static_cast<size_t>(row.t)];
      box.terms = {{evar(row.entity, row.t), 1.0}};
      p.rows.push_back(std::move(box));
    } else if (row.origin == RowOrigin::net_charge) {
      const StorageDevice& s = qp.source.storages[static_cast<size_t>(row.entity)];
      const double carried = std::pow(s.retention(), T) * s.e0;
      ConstraintRow req;
      req.origin = row.origin;
      req.entity = row.entity;
      req.lo = s.e_req + carried;
      req.up = kInfinity;
      req.terms = {{evar(row.entity, T - 1), 1.0}};
      p.rows.push_back(std::move(req));
    } else {
      p.rows.push_back(row);
    }
  }
  for (int i = 0; i < S; ++i) {
    const StorageDevice& s = qp.source.storages[static_cast<size_t>(i)];
    const double xi = s.retention();
    const double dt = qp.source.horizon.dt_hours;
    for (int t = 0; t < T; ++t) {
      ConstraintRow link;
      link.origin = RowOrigin::energy_window;  // internal only; duals not exported
      link.entity = i;
      link.t = t;
      link.terms = {{evar(i, t), 1.0},
                    {qp.pch_index(i, t), -s.eta_ch * dt},
                    {qp.pdc_index(i, t), dt / s.eta_dc}};
      double rhs = 0.0;
      if (t == 0)
        rhs = xi * s.e0;
      else
        link.terms.push_back({evar(i, t - 1), -xi});
      link.lo = link.up = rhs;
      p.rows.push_back(std::move(link));
    }
  }
  return p;
}

bool internal_row_is_equality(const ConstraintRow& row) {
  if (is_unbounded(row.lo) || is_unbounded(row.up)) return false;
  return row.up - row.lo <= 1e-12 * std::max({1.0, std::abs(row.lo), std::abs(row.up)});
}

}  // namespace

DispatchSolution solve(const RelaxedQP& qp, const SolveSettings& settings) {
  const int S = qp.n_storages;
  const int G = qp.n_generators;
  const int T = qp.steps;
  const int L = static_cast<int>(qp.source.network.lines.size());
  const int n = qp.n_vars();

  const bool expand = settings.expansion == StateExpansion::always ||
                      (settings.expansion == StateExpansion::automatic && S * T >= 32);
  const InternalProblem prob = build_internal(qp, expand);

  IpmSettings ipm_settings;
  ipm_settings.primal_tol = settings.primal_tol;
  ipm_settings.dual_tol = settings.dual_tol;
  ipm_settings.cs_tol = settings.cs_tol;
  ipm_settings.max_iter = settings.max_iter;
  ipm_settings.polish = settings.polish;
  const IpmResult raw = solve_ipm(prob.n_vars, prob.hdiag, prob.cost, prob.rows, ipm_settings);

  DispatchSolution sol;
  sol.status = raw.status;
  sol.iterations = raw.iterations;
  sol.polished = raw.polished;
  sol.case_fingerprint = qp.fingerprint;

  // primal
  sol.p_ch.resize(S, T);
  sol.p_dc.resize(S, T);
  sol.p_g.resize(G, T);
  for (int i = 0; i < S; ++i)
    for (int t = 0; t < T; ++t) {
      sol.p_ch(i, t) = raw.x[qp.pch_index(i, t)];
      sol.p_dc(i, t) = raw.x[qp.pdc_index(i, t)];
    }
  for (int k = 0; k < G; ++k)
    for (int t = 0; t < T; ++t) sol.p_g(k, t) = raw.x[qp.pg_index(k, t)];
  sol.energy.resize(S, T);
  for (int i = 0; i < S; ++i) {
    std::vector<double> ch(static_cast<size_t>(T)), dc(static_cast<size_t>(T));
    for (int t = 0; t < T; ++t) {
      ch[static_cast<size_t>(t)] = sol.p_ch(i, t);
      dc[static_cast<size_t>(t)] = sol.p_dc(i, t);
    }
    const auto e = energy_trajectory(qp.source.storages[static_cast<size_t>(i)], ch, dc,
                                     qp.source.horizon.dt_hours);
    for (int t = 0; t < T; ++t) sol.energy(i, t) = e[static_cast<size_t>(t)];
  }
  sol.objective = qp.objective_value(std::span<const double>(raw.x.data(), static_cast<size_t>(n)));

  // named duals; rows 0..m_public of the internal problem mirror the public
  // rows, so indices line up. Tagged rows that degenerated to equalities
  // (pinned windows, oracle-fixed boxes) split their free multiplier into the
  // non-negative pair.
  DualSolution& d = sol.duals;
  d.lambda = Eigen::VectorXd::Zero(T);
  d.alpha1 = Eigen::MatrixXd::Zero(S, T);
  d.alpha2 = Eigen::MatrixXd::Zero(S, T);
  d.alpha3 = Eigen::MatrixXd::Zero(S, T);
  d.alpha4 = Eigen::MatrixXd::Zero(S, T);
  d.beta1 = Eigen::MatrixXd::Zero(S, T);
  d.beta2 = Eigen::MatrixXd::Zero(S, T);
  d.phi = Eigen::VectorXd::Zero(S);
  d.mu1 = Eigen::MatrixXd::Zero(L, T);
  d.mu2 = Eigen::MatrixXd::Zero(L, T);
  d.gen_lo = Eigen::MatrixXd::Zero(G, T);
  d.gen_hi = Eigen::MatrixXd::Zero(G, T);
  d.ramp_lo = Eigen::MatrixXd::Zero(G, std::max(T - 1, 0));
  d.ramp_hi = Eigen::MatrixXd::Zero(G, std::max(T - 1, 0));

  const size_t m_public = qp.rows.size();
  for (size_t r = 0; r < m_public; ++r) {
    const ConstraintRow& pub = qp.rows[r];
    const ConstraintRow& internal = prob.rows[r];
    double zl = raw.z_lo[static_cast<Eigen::Index>(r)];
    double zu = raw.z_up[static_cast<Eigen::Index>(r)];
    const double yv = raw.y[static_cast<Eigen::Index>(r)];
    if (pub.origin != RowOrigin::balance && internal_row_is_equality(internal)) {
      zu = std::max(yv, 0.0);
      zl = std::max(-yv, 0.0);
    }
    switch (pub.origin) {
      case RowOrigin::charge_box:
        d.alpha1(pub.entity, pub.t) = zl;
        d.alpha2(pub.entity, pub.t) = zu;
        break;
      case RowOrigin::discharge_box:
        d.alpha3(pub.entity, pub.t) = zl;
        d.alpha4(pub.entity, pub.t) = zu;
        break;
      case RowOrigin::gen_box:
        d.gen_lo(pub.entity, pub.t) = zl;
        d.gen_hi(pub.entity, pub.t) = zu;
        break;
      case RowOrigin::energy_window:
        d.beta1(pub.entity, pub.t) = zl;
        d.beta2(pub.entity, pub.t) = zu;
        break;
      case RowOrigin::net_charge:
        d.phi(pub.entity) = zl;
        break;
      case RowOrigin::ramp:
        d.ramp_lo(pub.entity, pub.t) = zl;
        d.ramp_hi(pub.entity, pub.t) = zu;
        break;
      case RowOrigin::balance:
        // the balance row is written supply = demand; the model convention
        // prices demand, so lambda is the negated equality multiplier
        d.lambda(pub.t) = -yv;
        break;
      case RowOrigin::flow:
        d.mu1(pub.entity, pub.t) = zl;
        d.mu2(pub.entity, pub.t) = zu;
        break;
    }
  }

  // Residuals are recomputed on the public rows with the mapped duals, so a
  // mapping defect cannot go unnoticed.
  {
    Eigen::VectorXd x = raw.x.head(n);
    Eigen::VectorXd grad(n);
    for (int v = 0; v < n; ++v)
      grad[v] = qp.linear_cost[static_cast<size_t>(v)] +
                qp.hessian_diag[static_cast<size_t>(v)] * x[v];
    double primal = 0.0, max_sz = 0.0, neg_dual = 0.0;
    for (size_t r = 0; r < m_public; ++r) {
      const ConstraintRow& row = qp.rows[r];
      double ax = 0.0;
      for (const Coefficient& t : row.terms) ax += t.value * x[t.var];
      double zl = 0.0, zu = 0.0, ycontrib = 0.0;
      switch (row.origin) {
        case RowOrigin::charge_box:
          zl = d.alpha1(row.entity, row.t);
          zu = d.alpha2(row.entity, row.t);
          break;
        case RowOrigin::discharge_box:
          zl = d.alpha3(row.entity, row.t);
          zu = d.alpha4(row.entity, row.t);
          break;
        case RowOrigin::gen_box:
          zl = d.gen_lo(row.entity, row.t);
          zu = d.gen_hi(row.entity, row.t);
          break;
        case RowOrigin::energy_window:
          zl = d.beta1(row.entity, row.t);
          zu = d.beta2(row.entity, row.t);
          break;
        case RowOrigin::net_charge:
          zl = d.phi(row.entity);
          break;
        case RowOrigin::ramp:
          zl = d.ramp_lo(row.entity, row.t);
          zu = d.ramp_hi(row.entity, row.t);
          break;
        case RowOrigin::balance:
          ycontrib = -d.lambda(row.t);
          break;
        case RowOrigin::flow:
          zl = d.mu1(row.entity, row.t);
          zu = d.mu2(row.entity, row.t);
          break;
      }
      const double coeff = ycontrib + zu - zl;
      if (coeff != 0.0)
        for (const Coefficient& t : row.terms) grad[t.var] += t.value * coeff;
      if (!is_unbounded(row.lo)) {
        primal = std::max(primal, (row.lo - ax) / std::max(1.0, std::abs(row.lo)));
        max_sz = std::max(max_sz, zl * std::max(ax - row.lo, 0.0));
      }
      if (!is_unbounded(row.up)) {
        primal = std::max(primal, (ax - row.up) / std::max(1.0, std::abs(row.up)));
        max_sz = std::max(max_sz, zu * std::max(row.up - ax, 0.0));
      }
      neg_dual = std::max({neg_dual, -zl, -zu});
    }
    double scale = 1.0;
    for (int v = 0; v < n; ++v)
      scale = std::max({scale, std::abs(qp.linear_cost[static_cast<size_t>(v)]),
                        std::abs(qp.hessian_diag[static_cast<size_t>(v)] * x[v])});
    sol.residuals.primal_feas = std::max(primal, 0.0);
    sol.residuals.stationarity = (n > 0 ? grad.lpNorm<Eigen::Infinity>() : 0.0) / scale;
    sol.residuals.dual_feas = neg_dual;
    sol.residuals.max_comp_product = max_sz;
  }

  if (sol.status == SolveStatus::infeasible) {
    std::ostringstream os;
    const int wr = raw.worst_row;
    if (wr >= 0 && wr < static_cast<int>(prob.rows.size())) {
      const ConstraintRow& row = prob.rows[static_cast<size_t>(wr)];
      os << "worst violated block: " << row_origin_name(row.origin);
      if (row.entity >= 0) os << " entity " << row.entity;
      if (row.t >= 0) os << " step " << row.t;
      os << " (violation " << raw.worst_violation << ")";
    } else {
      os << "infeasible";
    }
    sol.diagnosis = os.str();
  }
  return sol;
}

DispatchSolution solve_case(const NetworkCase& c, const SolveSettings& settings) {
  return solve(assemble_relaxed(c), settings);
}

}  // namespace edrelax::qp
