#include "edrelax/qp/ipm.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <stdexcept>

namespace edrelax::qp {

const char* solve_status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::max_iter: return "max_iter";
  }
  return "?";
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

constexpr double kStepFraction = 0.995;

struct Side {
  double s = 1.0;  // slack
  double z = 0.0;  // multiplier
  double ds = 0.0;
  double dz = 0.0;
  double rc = 0.0;  // complementarity rhs for the current Newton solve
  bool present = false;
};

struct IneqRow {
  int row_index;  // into the caller's row array
  std::vector<Coefficient> terms;
  double lo, up;
  Side low, high;
  double ax = 0.0;    // current a'x
  double r_lo = 0.0;  // a'x - s_lo - lo
  double r_up = 0.0;  // a'x + s_up - up
};

struct EqRow {
  int row_index;
  std::vector<Coefficient> terms;
  double rhs;
};

std::vector<Coefficient> sorted_terms(const ConstraintRow& row) {
  std::vector<Coefficient> t(row.terms);
  std::sort(t.begin(), t.end(),
            [](const Coefficient& a, const Coefficient& b) { return a.var < b.var; });
  std::vector<Coefficient> out;
  out.reserve(t.size());
  for (const Coefficient& c : t) {
    if (!out.empty() && out.back().var == c.var)
      out.back().value += c.value;
    else
      out.push_back(c);
  }
  out.erase(
      std::remove_if(out.begin(), out.end(), [](const Coefficient& c) { return c.value == 0.0; }),
      out.end());
  return out;
}

bool row_is_equality(const ConstraintRow& row) {
  if (is_unbounded(row.lo) || is_unbounded(row.up)) return false;
  return row.up - row.lo <= 1e-12 * std::max({1.0, std::abs(row.lo), std::abs(row.up)});
}

/// Rows sharing a support are folded together as V' diag(w) V with one dense
/// product per family (the flow rows of a step all touch the same variables).
struct SupportGroup {
  std::vector<int> support;  // sorted variable indices
  std::vector<int> members;  // indices into the ineq array
  Eigen::MatrixXd coeffs;    // members x support
  std::vector<int> slots;    // K value slots for (p, q <= p)
};

/// Regularized normal-equations KKT matrix
///   [ H + sum w_r a_r a_r' + delta I    A_e' ]
///   [ A_e                           -delta I ]
/// with a fixed pattern; per-iteration work is a value refresh plus an LDLT
/// refactorization.
class KktSystem {
 public:
  KktSystem(int n, const std::vector<double>& hdiag, const std::vector<EqRow>& eq,
            const std::vector<IneqRow>& ineq, double delta)
      : n_(n), m_e_(static_cast<int>(eq.size())), delta_(delta), hdiag_(hdiag), eq_(&eq) {
    const int dim = n_ + m_e_;
    std::vector<Triplet> trips;
    for (int d = 0; d < dim; ++d) trips.emplace_back(d, d, 0.0);
    for (int e = 0; e < m_e_; ++e)
      for (const Coefficient& c : eq[static_cast<size_t>(e)].terms)
        trips.emplace_back(n_ + e, c.var, 0.0);

    std::map<std::vector<int>, int> group_of;
    for (size_t r = 0; r < ineq.size(); ++r) {
      const auto& terms = ineq[r].terms;
      if (terms.size() == 1) {
        diag_contrib_.push_back(
            {static_cast<int>(r), terms[0].var, terms[0].value * terms[0].value, 0});
        continue;
      }
      std::vector<int> support(terms.size());
      for (size_t i = 0; i < terms.size(); ++i) support[i] = terms[i].var;
      auto [it, inserted] = group_of.try_emplace(std::move(support), static_cast<int>(groups_.size()));
      if (inserted) {
        SupportGroup g;
        g.support = it->first;
        groups_.push_back(std::move(g));
      }
      groups_[static_cast<size_t>(it->second)].members.push_back(static_cast<int>(r));
    }
    for (SupportGroup& g : groups_) {
      const int k = static_cast<int>(g.support.size());
      g.coeffs.resize(static_cast<int>(g.members.size()), k);
      for (size_t m = 0; m < g.members.size(); ++m)
        for (int i = 0; i < k; ++i)
          g.coeffs(static_cast<int>(m), i) =
              ineq[static_cast<size_t>(g.members[m])].terms[static_cast<size_t>(i)].value;
      for (int p = 0; p < k; ++p)
        for (int q = 0; q <= p; ++q)
          trips.emplace_back(g.support[static_cast<size_t>(p)], g.support[static_cast<size_t>(q)],
                             0.0);
    }

    K_.resize(dim, dim);
    K_.setFromTriplets(trips.begin(), trips.end(),
                       [](const double& a, const double& b) { return a + b; });
    K_.makeCompressed();

    diag_slot_.resize(static_cast<size_t>(dim));
    for (int d = 0; d < dim; ++d) diag_slot_[static_cast<size_t>(d)] = find_slot(d, d);
    for (SupportGroup& g : groups_) {
      const int k = static_cast<int>(g.support.size());
      g.slots.reserve(static_cast<size_t>(k) * (static_cast<size_t>(k) + 1) / 2);
      for (int p = 0; p < k; ++p)
        for (int q = 0; q <= p; ++q)
          g.slots.push_back(
              find_slot(g.support[static_cast<size_t>(p)], g.support[static_cast<size_t>(q)]));
    }
    for (auto& d : diag_contrib_) d.slot = diag_slot_[static_cast<size_t>(d.var)];
    eq_slots_.clear();
    for (int e = 0; e < m_e_; ++e)
      for (const Coefficient& c : eq[static_cast<size_t>(e)].terms)
        eq_slots_.push_back({find_slot(n_ + e, c.var), c.value});

    base_vals_.assign(static_cast<size_t>(K_.nonZeros()), 0.0);
    rebuild_base();
    solver_.analyzePattern(K_);
  }

  void rebuild_base() {
    std::fill(base_vals_.begin(), base_vals_.end(), 0.0);
    for (int v = 0; v < n_; ++v)
      base_vals_[static_cast<size_t>(diag_slot_[static_cast<size_t>(v)])] =
          hdiag_[static_cast<size_t>(v)] + delta_;
    for (int e = 0; e < m_e_; ++e)
      base_vals_[static_cast<size_t>(diag_slot_[static_cast<size_t>(n_ + e)])] = -delta_;
    for (const auto& [slot, value] : eq_slots_) base_vals_[static_cast<size_t>(slot)] += value;
  }

  bool factorize(const std::vector<double>& weights) {
    double* vals = K_.valuePtr();
    std::memcpy(vals, base_vals_.data(), base_vals_.size() * sizeof(double));
    for (const auto& d : diag_contrib_)
      vals[d.slot] += weights[static_cast<size_t>(d.row)] * d.coeff_sq;
    for (const SupportGroup& g : groups_) {
      const int k = static_cast<int>(g.support.size());
      const int m = static_cast<int>(g.members.size());
      scratch_.resize(m, k);
      for (int r = 0; r < m; ++r)
        scratch_.row(r) =
            g.coeffs.row(r) * std::sqrt(weights[static_cast<size_t>(g.members[static_cast<size_t>(r)])]);
      gram_.noalias() = scratch_.transpose() * scratch_;
      int slot = 0;
      for (int p = 0; p < k; ++p)
        for (int q = 0; q <= p; ++q) vals[g.slots[static_cast<size_t>(slot++)]] += gram_(p, q);
    }
    solver_.factorize(K_);
    return solver_.info() == Eigen::Success;
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd sol = solver_.solve(rhs);
    Eigen::VectorXd resid = rhs - K_.selfadjointView<Eigen::Lower>() * sol;
    sol += solver_.solve(resid);
    return sol;
  }

  void set_delta(double d) { delta_ = d; }
  double delta() const { return delta_; }
  int dim() const { return n_ + m_e_; }

 private:
  int find_slot(int row, int col) const {
    const int* begin = K_.innerIndexPtr() + K_.outerIndexPtr()[col];
    const int* end = K_.innerIndexPtr() + K_.outerIndexPtr()[col + 1];
    const int* it = std::lower_bound(begin, end, row);
    if (it == end || *it != row) throw std::logic_error("ipm: missing KKT slot");
    return static_cast<int>(it - K_.innerIndexPtr());
  }

  struct DiagContrib {
    int row;
    int var;
    double coeff_sq;
    int slot;
  };

  int n_, m_e_;
  double delta_;
  std::vector<double> hdiag_;
  const std::vector<EqRow>* eq_;
  SpMat K_;
  std::vector<double> base_vals_;
  std::vector<int> diag_slot_;
  std::vector<std::pair<int, double>> eq_slots_;
  std::vector<DiagContrib> diag_contrib_;
  std::vector<SupportGroup> groups_;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower> solver_;
  mutable Eigen::MatrixXd scratch_, gram_;
};

struct Measures {
  double primal = 0.0;
  double dual = 0.0;
  double max_sz = 0.0;
  int worst_row = -1;
  double worst_violation = 0.0;
};

class Ipm {
 public:
  Ipm(int n, std::span<const double> hdiag, std::span<const double> c,
      std::span<const ConstraintRow> rows, const IpmSettings& settings)
      : n_(n),
        n_rows_(static_cast<int>(rows.size())),
        settings_(settings),
        hdiag_(hdiag.begin(), hdiag.end()),
        c_(c.begin(), c.end()) {
    for (size_t r = 0; r < rows.size(); ++r) {
      const ConstraintRow& row = rows[r];
      auto terms = sorted_terms(row);
      if (terms.empty()) {
        if (row.lo > 1e-9 || row.up < -1e-9) {
          trivially_infeasible_ = true;
          infeasible_row_ = static_cast<int>(r);
        }
        continue;
      }
      if (row_is_equality(row)) {
        eq_.push_back({static_cast<int>(r), std::move(terms), 0.5 * (row.lo + row.up)});
      } else {
        IneqRow ir;
        ir.row_index = static_cast<int>(r);
        ir.terms = std::move(terms);
        ir.lo = row.lo;
        ir.up = row.up;
        ir.low.present = !is_unbounded(row.lo);
        ir.high.present = !is_unbounded(row.up);
        if (ir.low.present || ir.high.present) ineq_.push_back(std::move(ir));
      }
    }
    x_ = Eigen::VectorXd::Zero(n_);
    y_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(eq_.size()));
  }

  IpmResult run() {
    IpmResult out;
    if (trivially_infeasible_) {
      out.status = SolveStatus::infeasible;
      out.worst_row = infeasible_row_;
      finalize(out);
      return out;
    }

    initial_point();
    kkt_ = std::make_unique<KktSystem>(n_, hdiag_, eq_, ineq_, settings_.regularization);
    weights_.assign(ineq_.size(), 0.0);

    const double cs_target = std::max(settings_.cs_tol * 1e-2, 5e-13);
    double best_mu = std::numeric_limits<double>::infinity();
    int stall = 0;
    bool done = false;

    for (int iter = 0; iter < settings_.max_iter && !done; ++iter) {
      refresh_row_state();
      const Measures m = measures();
      const double mu = complementarity_mu();

      const bool tols_ok = m.primal <= settings_.primal_tol && m.dual <= settings_.dual_tol;
      if (tols_ok && m.max_sz <= cs_target) {
        out.status = SolveStatus::optimal;
        done = true;
        break;
      }
      if (mu < 0.9 * best_mu) {
        best_mu = mu;
        stall = 0;
      } else if (++stall >= 6) {
        if (tols_ok && m.max_sz <= settings_.cs_tol) {
          out.status = SolveStatus::optimal;
          done = true;
          break;
        }
        if (check_infeasible()) {
          out.status = SolveStatus::infeasible;
          done = true;
          break;
        }
        stall = 0;
      }
      if (iter > 20 && dual_norm() > 1e12 && check_infeasible()) {
        out.status = SolveStatus::infeasible;
        done = true;
        break;
      }

      if (!factorize_with_retries()) break;  // gives up as max_iter

      // predictor
      for (IneqRow& r : ineq_) {
        if (r.low.present) r.low.rc = -r.low.s * r.low.z;
        if (r.high.present) r.high.rc = -r.high.s * r.high.z;
      }
      solve_direction();
      const double alpha_aff = max_step();
      const double mu_aff = affine_mu(std::min(1.0, kStepFraction * alpha_aff));
      double sigma = mu > 0 ? std::pow(mu_aff / mu, 3) : 0.1;
      sigma = std::clamp(sigma, 1e-8, 0.9);

      // corrector
      for (IneqRow& r : ineq_) {
        if (r.low.present) r.low.rc = -r.low.s * r.low.z - r.low.ds * r.low.dz + sigma * mu;
        if (r.high.present) r.high.rc = -r.high.s * r.high.z - r.high.ds * r.high.dz + sigma * mu;
      }
      solve_direction();
      take_step(std::min(1.0, kStepFraction * max_step()));
      out.iterations = iter + 1;
    }

    if (!done) {
      refresh_row_state();
      measures();
      if (check_infeasible())
        out.status = SolveStatus::infeasible;
      else
        out.status = SolveStatus::max_iter;
    }

    if (out.status == SolveStatus::optimal && settings_.polish) out.polished = polish();
    finalize(out);
    return out;
  }

 private:
  struct ActiveSide {
    int ineq_index;
    bool upper;
  };

  void initial_point() {
    std::vector<double> lo(static_cast<size_t>(n_), -kInfinity);
    std::vector<double> up(static_cast<size_t>(n_), kInfinity);
    auto absorb = [&](const std::vector<Coefficient>& terms, double l, double u) {
      if (terms.size() != 1 || terms[0].value <= 0.0) return;
      const double v = terms[0].value;
      auto idx = static_cast<size_t>(terms[0].var);
      if (!is_unbounded(l)) lo[idx] = std::max(lo[idx], l / v);
      if (!is_unbounded(u)) up[idx] = std::min(up[idx], u / v);
    };
    for (const IneqRow& r : ineq_) absorb(r.terms, r.lo, r.up);
    for (const EqRow& r : eq_) absorb(r.terms, r.rhs, r.rhs);
    for (int v = 0; v < n_; ++v) {
      const double l = lo[static_cast<size_t>(v)], u = up[static_cast<size_t>(v)];
      if (std::isfinite(l) && std::isfinite(u))
        x_[v] = 0.5 * (l + u);
      else if (std::isfinite(l))
        x_[v] = l + 1.0;
      else if (std::isfinite(u))
        x_[v] = u - 1.0;
      else
        x_[v] = 0.0;
    }
    for (IneqRow& r : ineq_) {
      double ax = 0.0;
      for (const Coefficient& t : r.terms) ax += t.value * x_[t.var];
      if (r.low.present) {
        r.low.s = std::max(ax - r.lo, 1.0);
        r.low.z = 1.0;
      }
      if (r.high.present) {
        r.high.s = std::max(r.up - ax, 1.0);
        r.high.z = 1.0;
      }
    }
  }

  void refresh_row_state() {
    for (IneqRow& r : ineq_) {
      double ax = 0.0;
      for (const Coefficient& t : r.terms) ax += t.value * x_[t.var];
      r.ax = ax;
      if (r.low.present) r.r_lo = ax - r.low.s - r.lo;
      if (r.high.present) r.r_up = ax + r.high.s - r.up;
    }
  }

  Eigen::VectorXd dual_gradient() const {
    Eigen::VectorXd g(n_);
    for (int v = 0; v < n_; ++v)
      g[v] = c_[static_cast<size_t>(v)] + hdiag_[static_cast<size_t>(v)] * x_[v];
    for (size_t e = 0; e < eq_.size(); ++e)
      for (const Coefficient& t : eq_[e].terms)
        g[t.var] += t.value * y_[static_cast<Eigen::Index>(e)];
    for (const IneqRow& r : ineq_) {
      const double zz = (r.high.present ? r.high.z : 0.0) - (r.low.present ? r.low.z : 0.0);
      if (zz != 0.0)
        for (const Coefficient& t : r.terms) g[t.var] += t.value * zz;
    }
    return g;
  }

  Measures measures() {
    Measures m;
    for (const EqRow& e : eq_) {
      double ax = 0.0;
      for (const Coefficient& t : e.terms) ax += t.value * x_[t.var];
      const double viol = std::abs(ax - e.rhs);
      const double scaled = viol / std::max(1.0, std::abs(e.rhs));
      if (scaled > m.primal) {
        m.primal = scaled;
        m.worst_row = e.row_index;
        m.worst_violation = viol;
      }
    }
    for (const IneqRow& r : ineq_) {
      double viol = 0.0, bound = 1.0;
      if (r.low.present && r.ax < r.lo) {
        viol = r.lo - r.ax;
        bound = std::abs(r.lo);
      }
      if (r.high.present && r.ax - r.up > viol) {
        viol = r.ax - r.up;
        bound = std::abs(r.up);
      }
      const double scaled = viol / std::max(1.0, bound);
      if (scaled > m.primal) {
        m.primal = scaled;
        m.worst_row = r.row_index;
        m.worst_violation = viol;
      }
      if (r.low.present) m.max_sz = std::max(m.max_sz, r.low.s * r.low.z);
      if (r.high.present) m.max_sz = std::max(m.max_sz, r.high.s * r.high.z);
    }
    const Eigen::VectorXd g = dual_gradient();
    double scale = std::max(1.0, n_ > 0 ? Eigen::Map<const Eigen::VectorXd>(c_.data(), n_)
                                              .lpNorm<Eigen::Infinity>()
                                        : 1.0);
    for (int v = 0; v < n_; ++v)
      scale = std::max(scale, std::abs(hdiag_[static_cast<size_t>(v)] * x_[v]));
    m.dual = (n_ > 0 ? g.lpNorm<Eigen::Infinity>() : 0.0) / scale;
    last_measures_ = m;
    return m;
  }

  double complementarity_mu() const {
    double acc = 0.0;
    int count = 0;
    for (const IneqRow& r : ineq_) {
      if (r.low.present) {
        acc += r.low.s * r.low.z;
        ++count;
      }
      if (r.high.present) {
        acc += r.high.s * r.high.z;
        ++count;
      }
    }
    return count ? acc / count : 0.0;
  }

  double dual_norm() const {
    double nrm = y_.size() ? y_.lpNorm<Eigen::Infinity>() : 0.0;
    for (const IneqRow& r : ineq_) {
      if (r.low.present) nrm = std::max(nrm, r.low.z);
      if (r.high.present) nrm = std::max(nrm, r.high.z);
    }
    return nrm;
  }

  bool factorize_with_retries() {
    for (int attempt = 0; attempt < 5; ++attempt) {
      for (size_t r = 0; r < ineq_.size(); ++r) {
        const IneqRow& row = ineq_[r];
        double w = 0.0;
        if (row.low.present) w += row.low.z / row.low.s;
        if (row.high.present) w += row.high.z / row.high.s;
        weights_[r] = w;
      }
      if (kkt_->factorize(weights_)) return true;
      kkt_->set_delta(kkt_->delta() * 100.0);
      kkt_->rebuild_base();
    }
    return false;
  }

  void solve_direction() {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(kkt_->dim());
    const Eigen::VectorXd g = dual_gradient();
    rhs.head(n_) = -g;
    for (const IneqRow& r : ineq_) {
      double q = 0.0;
      if (r.high.present) q += (r.high.rc + r.high.z * r.r_up) / r.high.s;
      if (r.low.present) q -= (r.low.rc - r.low.z * r.r_lo) / r.low.s;
      if (q != 0.0)
        for (const Coefficient& t : r.terms) rhs[t.var] -= t.value * q;
    }
    for (size_t e = 0; e < eq_.size(); ++e) {
      double ax = 0.0;
      for (const Coefficient& t : eq_[e].terms) ax += t.value * x_[t.var];
      rhs[n_ + static_cast<int>(e)] = -(ax - eq_[e].rhs);
    }

    const Eigen::VectorXd sol = kkt_->solve(rhs);
    dx_ = sol.head(n_);
    dy_ = sol.tail(kkt_->dim() - n_);

    for (IneqRow& r : ineq_) {
      double adx = 0.0;
      for (const Coefficient& t : r.terms) adx += t.value * dx_[t.var];
      if (r.low.present) {
        r.low.ds = adx + r.r_lo;
        r.low.dz = (r.low.rc - r.low.z * r.low.ds) / r.low.s;
      }
      if (r.high.present) {
        r.high.ds = -adx - r.r_up;
        r.high.dz = (r.high.rc - r.high.z * r.high.ds) / r.high.s;
      }
    }
  }

  double max_step() const {
    double alpha = 1.0;
    auto cap = [&alpha](double v, double dv) {
      if (dv < 0.0) alpha = std::min(alpha, -v / dv);
    };
    for (const IneqRow& r : ineq_) {
      if (r.low.present) {
        cap(r.low.s, r.low.ds);
        cap(r.low.z, r.low.dz);
      }
      if (r.high.present) {
        cap(r.high.s, r.high.ds);
        cap(r.high.z, r.high.dz);
      }
    }
    return alpha;
  }

  double affine_mu(double alpha) const {
    double acc = 0.0;
    int count = 0;
    for (const IneqRow& r : ineq_) {
      if (r.low.present) {
        acc += (r.low.s + alpha * r.low.ds) * (r.low.z + alpha * r.low.dz);
        ++count;
      }
      if (r.high.present) {
        acc += (r.high.s + alpha * r.high.ds) * (r.high.z + alpha * r.high.dz);
        ++count;
      }
    }
    return count ? acc / count : 0.0;
  }

  void take_step(double alpha) {
    x_ += alpha * dx_;
    y_ += alpha * dy_;
    for (IneqRow& r : ineq_) {
      if (r.low.present) {
        r.low.s += alpha * r.low.ds;
        r.low.z += alpha * r.low.dz;
      }
      if (r.high.present) {
        r.high.s += alpha * r.high.ds;
        r.high.z += alpha * r.high.dz;
      }
    }
  }

  /// Farkas-style infeasibility test on the current dual direction.
  bool check_infeasible() const {
    const double nrm = dual_norm();
    if (nrm < 1e-4) return false;
    Eigen::VectorXd ray = Eigen::VectorXd::Zero(n_);
    double value = 0.0;
    for (size_t e = 0; e < eq_.size(); ++e) {
      for (const Coefficient& t : eq_[e].terms)
        ray[t.var] += t.value * y_[static_cast<Eigen::Index>(e)];
      value += eq_[e].rhs * y_[static_cast<Eigen::Index>(e)];
    }
    for (const IneqRow& r : ineq_) {
      const double zz = (r.high.present ? r.high.z : 0.0) - (r.low.present ? r.low.z : 0.0);
      for (const Coefficient& t : r.terms) ray[t.var] += t.value * zz;
      if (r.high.present) value += r.up * r.high.z;
      if (r.low.present) value -= r.lo * r.low.z;
    }
    const double stat = ray.lpNorm<Eigen::Infinity>() / nrm;
    const double val = value / nrm;
    return stat <= 1e-7 && val < -1e-8 && last_measures_.primal > 10.0 * settings_.primal_tol;
  }

  /// Re-solves with the detected active sides pinned as equalities; accepted
  /// only when it does not degrade any convergence measure. On success the
  /// complementarity products become exact zeros up to roundoff.
  bool polish() {
    std::vector<ActiveSide> active;
    for (size_t r = 0; r < ineq_.size(); ++r) {
      const IneqRow& row = ineq_[r];
      const bool lo_act = row.low.present && row.low.z > row.low.s;
      const bool up_act = row.high.present && row.high.z > row.high.s;
      if (lo_act && up_act)
        active.push_back({static_cast<int>(r), row.high.z >= row.low.z});
      else if (lo_act || up_act)
        active.push_back({static_cast<int>(r), up_act});
    }

    const double delta = 1e-11;
    for (int attempt = 0; attempt < 4; ++attempt) {
      const int m_c = static_cast<int>(eq_.size() + active.size());
      const int dim = n_ + m_c;
      std::vector<Triplet> trips;
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
      for (int v = 0; v < n_; ++v) {
        trips.emplace_back(v, v, hdiag_[static_cast<size_t>(v)] + delta);
        rhs[v] = -c_[static_cast<size_t>(v)];
      }
      for (int k = 0; k < m_c; ++k) trips.emplace_back(n_ + k, n_ + k, -delta);
      int cidx = 0;
      for (const EqRow& e : eq_) {
        for (const Coefficient& t : e.terms) trips.emplace_back(n_ + cidx, t.var, t.value);
        rhs[n_ + cidx] = e.rhs;
        ++cidx;
      }
      for (const ActiveSide& a : active) {
        const IneqRow& row = ineq_[static_cast<size_t>(a.ineq_index)];
        for (const Coefficient& t : row.terms) trips.emplace_back(n_ + cidx, t.var, t.value);
        rhs[n_ + cidx] = a.upper ? row.up : row.lo;
        ++cidx;
      }
      SpMat kp(dim, dim);
      kp.setFromTriplets(trips.begin(), trips.end());
      Eigen::SimplicialLDLT<SpMat, Eigen::Lower> fact;
      fact.compute(kp);
      if (fact.info() != Eigen::Success) return false;
      Eigen::VectorXd sol = fact.solve(rhs);
      for (int round = 0; round < 2; ++round) {
        Eigen::VectorXd resid = rhs - kp.selfadjointView<Eigen::Lower>() * sol;
        sol += fact.solve(resid);
      }
      const Eigen::VectorXd px = sol.head(n_);
      const Eigen::VectorXd pnu = sol.tail(m_c);

      // reclassify: drop wrong-signed multipliers, add violated rows
      bool adjusted = false;
      const double z_tol = 1e-7 * std::max(1.0, m_c ? pnu.lpNorm<Eigen::Infinity>() : 0.0);
      std::vector<ActiveSide> kept;
      kept.reserve(active.size());
      for (size_t a = 0; a < active.size(); ++a) {
        const double nu = pnu[static_cast<Eigen::Index>(eq_.size() + a)];
        const double named = active[a].upper ? nu : -nu;
        if (named < -z_tol)
          adjusted = true;
        else
          kept.push_back(active[a]);
      }
      std::vector<char> in_set(ineq_.size(), 0);
      for (const ActiveSide& a : kept) in_set[static_cast<size_t>(a.ineq_index)] = 1;
      for (size_t r = 0; r < ineq_.size(); ++r) {
        if (in_set[r]) continue;
        const IneqRow& row = ineq_[r];
        double ax = 0.0;
        for (const Coefficient& t : row.terms) ax += t.value * px[t.var];
        const double tol = 1e-9 * std::max(1.0, std::abs(ax));
        if (row.low.present && ax < row.lo - tol) {
          kept.push_back({static_cast<int>(r), false});
          adjusted = true;
        } else if (row.high.present && ax > row.up + tol) {
          kept.push_back({static_cast<int>(r), true});
          adjusted = true;
        }
      }
      if (adjusted) {
        active = std::move(kept);
        continue;
      }

      return try_accept_polish(px, pnu, active);
    }
    return false;
  }

  bool try_accept_polish(const Eigen::VectorXd& px, const Eigen::VectorXd& pnu,
                         const std::vector<ActiveSide>& active) {
    // candidate duals
    Eigen::VectorXd cy(static_cast<Eigen::Index>(eq_.size()));
    for (size_t e = 0; e < eq_.size(); ++e) cy[static_cast<Eigen::Index>(e)] = pnu[static_cast<Eigen::Index>(e)];
    std::vector<double> zlo(ineq_.size(), 0.0), zup(ineq_.size(), 0.0);
    for (size_t a = 0; a < active.size(); ++a) {
      const double nu = pnu[static_cast<Eigen::Index>(eq_.size() + a)];
      const auto idx = static_cast<size_t>(active[a].ineq_index);
      if (active[a].upper)
        zup[idx] = std::max(nu, 0.0);
      else
        zlo[idx] = std::max(-nu, 0.0);
    }

    // candidate measures
    double cprimal = 0.0, cmax_sz = 0.0;
    for (const EqRow& e : eq_) {
      double ax = 0.0;
      for (const Coefficient& t : e.terms) ax += t.value * px[t.var];
      cprimal = std::max(cprimal, std::abs(ax - e.rhs) / std::max(1.0, std::abs(e.rhs)));
    }
    for (size_t r = 0; r < ineq_.size(); ++r) {
      const IneqRow& row = ineq_[r];
      double ax = 0.0;
      for (const Coefficient& t : row.terms) ax += t.value * px[t.var];
      if (row.low.present) {
        cprimal = std::max(cprimal, (row.lo - ax) / std::max(1.0, std::abs(row.lo)));
        cmax_sz = std::max(cmax_sz, std::max(ax - row.lo, 0.0) * zlo[r]);
      }
      if (row.high.present) {
        cprimal = std::max(cprimal, (ax - row.up) / std::max(1.0, std::abs(row.up)));
        cmax_sz = std::max(cmax_sz, std::max(row.up - ax, 0.0) * zup[r]);
      }
    }
    Eigen::VectorXd g(n_);
    for (int v = 0; v < n_; ++v)
      g[v] = c_[static_cast<size_t>(v)] + hdiag_[static_cast<size_t>(v)] * px[v];
    for (size_t e = 0; e < eq_.size(); ++e)
      for (const Coefficient& t : eq_[e].terms)
        g[t.var] += t.value * cy[static_cast<Eigen::Index>(e)];
    for (size_t r = 0; r < ineq_.size(); ++r) {
      const double zz = zup[r] - zlo[r];
      if (zz != 0.0)
        for (const Coefficient& t : ineq_[r].terms) g[t.var] += t.value * zz;
    }
    double dual_scale = 1.0;
    for (int v = 0; v < n_; ++v)
      dual_scale = std::max({dual_scale, std::abs(c_[static_cast<size_t>(v)]),
                             std::abs(hdiag_[static_cast<size_t>(v)] * px[v])});
    const double cdual = g.lpNorm<Eigen::Infinity>() / dual_scale;

    if (cprimal > settings_.primal_tol || cdual > settings_.dual_tol ||
        cmax_sz > std::max(last_measures_.max_sz, 1e-12))
      return false;

    // adopt the polished point
    x_ = px;
    y_ = cy;
    for (size_t r = 0; r < ineq_.size(); ++r) {
      IneqRow& row = ineq_[r];
      double ax = 0.0;
      for (const Coefficient& t : row.terms) ax += t.value * x_[t.var];
      row.ax = ax;
      if (row.low.present) {
        row.low.z = zlo[r];
        row.low.s = std::max(ax - row.lo, 0.0);
      }
      if (row.high.present) {
        row.high.z = zup[r];
        row.high.s = std::max(row.up - ax, 0.0);
      }
    }
    return true;
  }

  /// The Farkas certificate's largest entry names the conflicting row far
  /// more reliably than the largest violation at the final iterate.
  int certificate_row() const {
    int row = -1;
    double weight = 0.0;
    for (size_t e = 0; e < eq_.size(); ++e) {
      const double w = std::abs(y_[static_cast<Eigen::Index>(e)]);
      if (w > weight) {
        weight = w;
        row = eq_[e].row_index;
      }
    }
    for (const IneqRow& r : ineq_) {
      const double w = (r.low.present ? r.low.z : 0.0) + (r.high.present ? r.high.z : 0.0);
      if (w > weight) {
        weight = w;
        row = r.row_index;
      }
    }
    return row;
  }

  void finalize(IpmResult& out) {
    out.x = x_;
    out.y = Eigen::VectorXd::Zero(n_rows_);
    out.z_lo = Eigen::VectorXd::Zero(n_rows_);
    out.z_up = Eigen::VectorXd::Zero(n_rows_);
    for (size_t e = 0; e < eq_.size(); ++e)
      out.y[eq_[e].row_index] = y_[static_cast<Eigen::Index>(e)];
    for (const IneqRow& r : ineq_) {
      if (r.low.present) out.z_lo[r.row_index] = r.low.z;
      if (r.high.present) out.z_up[r.row_index] = r.high.z;
    }
    refresh_row_state();
    const Measures m = measures();
    out.primal_residual = m.primal;
    out.dual_residual = m.dual;
    out.max_comp_product = m.max_sz;
    if (out.worst_row < 0) {
      out.worst_row = m.worst_row;
      if (out.status == SolveStatus::infeasible && !trivially_infeasible_) {
        const int certified = certificate_row();
        if (certified >= 0) out.worst_row = certified;
      }
    }
    out.worst_violation = m.worst_violation;
    double obj = 0.0;
    for (int v = 0; v < n_; ++v)
      obj += 0.5 * hdiag_[static_cast<size_t>(v)] * x_[v] * x_[v] +
             c_[static_cast<size_t>(v)] * x_[v];
    out.qp_objective = obj;
  }

  int n_;
  int n_rows_;
  IpmSettings settings_;
  std::vector<double> hdiag_, c_;
  std::vector<EqRow> eq_;
  std::vector<IneqRow> ineq_;
  std::vector<double> weights_;
  Eigen::VectorXd x_, y_, dx_, dy_;
  std::unique_ptr<KktSystem> kkt_;
  Measures last_measures_;
  bool trivially_infeasible_ = false;
  int infeasible_row_ = -1;
};

}  // namespace

IpmResult solve_ipm(int n_vars, std::span<const double> hessian_diag,
                    std::span<const double> linear_cost, std::span<const ConstraintRow> rows,
                    const IpmSettings& settings) {
  Ipm ipm(n_vars, hessian_diag, linear_cost, rows, settings);
  return ipm.run();
}

}  // namespace edrelax::qp
