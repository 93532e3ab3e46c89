#pragma once

#include "edrelax/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace edrelax::qp {

/// Which model constraint a row came from. Tags keep the map from solver
/// duals back to the named multipliers trivial.
enum class RowOrigin {
  charge_box,     // 0 <= p_ch <= ch_max            duals alpha_1, alpha_2
  discharge_box,  // 0 <= p_dc <= dc_max            duals alpha_3, alpha_4
  gen_box,        // p_min <= p_g <= p_max(t)
  energy_window,  // e_min <= E(t) <= e_max         duals beta_1, beta_2
  net_charge,     // net charge >= e_req            dual phi
  ramp,           // per-step generator ramp window
  balance,        // system power balance           dual lambda (equality)
  flow,           // line flow window               duals mu_1, mu_2
};

const char* row_origin_name(RowOrigin o);

struct Coefficient {
  int var;
  double value;
};

/// One double-sided linear row lo <= a.x <= up. Equality rows have lo == up.
/// `entity` is the storage/generator/line index the row belongs to, `t` the
/// 0-based step (-1 for whole-horizon rows).
struct ConstraintRow {
  RowOrigin origin;
  int entity = -1;
  int t = -1;
  double lo = -kInfinity;
  double up = kInfinity;
  std::vector<Coefficient> terms;
};

/// The relaxed convex QP: the dispatch model without the complementarity
/// constraint, stored with tagged rows. Stored energy is substituted out via
/// the trajectory recursion, so the decision vector is exactly
/// [p_ch | p_dc | p_g], each laid out entity-major, time-minor.
struct RelaxedQP {
  int n_storages = 0;
  int n_generators = 0;
  int steps = 0;

  std::vector<double> hessian_diag;  // 1/2 x'Hx convention: entries are 2*c2 / 2*g2
  std::vector<double> linear_cost;
  std::vector<ConstraintRow> rows;

  NetworkCase source;  // the case this QP was assembled from
  std::uint64_t fingerprint = 0;

  int n_vars() const { return (2 * n_storages + n_generators) * steps; }
  int pch_index(int storage, int t) const { return storage * steps + t; }
  int pdc_index(int storage, int t) const { return (n_storages + storage) * steps + t; }
  int pg_index(int gen, int t) const { return (2 * n_storages + gen) * steps + t; }

  /// Total operating cost of a primal point: sum of g(p_dc) - f(p_ch) + h(p_g).
  double objective_value(std::span<const double> x) const;
};

/// Builds the relaxed QP for a validated case. Throws ValidationError when the
/// case has error-severity violations.
RelaxedQP assemble_relaxed(const NetworkCase& c);

}  // namespace edrelax::qp
