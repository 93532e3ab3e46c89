#include "edrelax/qp/relaxed_qp.hpp"

#include "edrelax/gsf.hpp"
#include "edrelax/validate.hpp"

#include <cmath>

namespace edrelax::qp {

const char* row_origin_name(RowOrigin o) {
  switch (o) {
    case RowOrigin::charge_box: return "charge_box";
    case RowOrigin::discharge_box: return "discharge_box";
    case RowOrigin::gen_box: return "gen_box";
    case RowOrigin::energy_window: return "energy_window";
    case RowOrigin::net_charge: return "net_charge";
    case RowOrigin::ramp: return "ramp";
    case RowOrigin::balance: return "balance";
    case RowOrigin::flow: return "flow";
  }
  return "?";
}

double RelaxedQP::objective_value(std::span<const double> x) const {
  double cost = 0.0;
  for (int i = 0; i < n_storages; ++i) {
    const StoragePrice& p = source.prices.storages[static_cast<size_t>(i)];
    for (int t = 0; t < steps; ++t) {
      const double ch = x[static_cast<size_t>(pch_index(i, t))];
      const double dc = x[static_cast<size_t>(pdc_index(i, t))];
      cost += p.g_quad * dc * dc + p.g_lin * dc - p.f_slope * ch;
    }
  }
  for (int k = 0; k < n_generators; ++k) {
    const Generator& g = source.generators[static_cast<size_t>(k)];
    for (int t = 0; t < steps; ++t) {
      const double pg = x[static_cast<size_t>(pg_index(k, t))];
      cost += g.cost_quadratic * pg * pg + g.cost_linear * pg;
    }
  }
  return cost;
}

RelaxedQP assemble_relaxed(const NetworkCase& c) {
  ValidationReport report = validate_case(c);
  if (report.has_errors()) throw ValidationError(report);

  RelaxedQP qp;
  qp.source = c;
  if (qp.source.network.gsf.size() == 0 && !qp.source.network.lines.empty())
    qp.source.network.gsf = compute_gsf(qp.source.network);
  qp.fingerprint = fingerprint_case(c);
  qp.n_storages = static_cast<int>(c.storages.size());
  qp.n_generators = static_cast<int>(c.generators.size());
  qp.steps = c.horizon.steps;
  const int S = qp.n_storages;
  const int G = qp.n_generators;
  const int T = qp.steps;
  const double dt = c.horizon.dt_hours;
  const int n = qp.n_vars();

  qp.hessian_diag.assign(static_cast<size_t>(n), 0.0);
  qp.linear_cost.assign(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < S; ++i) {
    const StoragePrice& p = c.prices.storages[static_cast<size_t>(i)];
    for (int t = 0; t < T; ++t) {
      qp.linear_cost[static_cast<size_t>(qp.pch_index(i, t))] = -p.f_slope;
      qp.linear_cost[static_cast<size_t>(qp.pdc_index(i, t))] = p.g_lin;
      qp.hessian_diag[static_cast<size_t>(qp.pdc_index(i, t))] = 2.0 * p.g_quad;
    }
  }
  for (int k = 0; k < G; ++k) {
    const Generator& g = c.generators[static_cast<size_t>(k)];
    for (int t = 0; t < T; ++t) {
      qp.linear_cost[static_cast<size_t>(qp.pg_index(k, t))] = g.cost_linear;
      qp.hessian_diag[static_cast<size_t>(qp.pg_index(k, t))] = 2.0 * g.cost_quadratic;
    }
  }

  auto& rows = qp.rows;

  // Charging and discharging power windows.
  for (int i = 0; i < S; ++i) {
    const StorageDevice& s = c.storages[static_cast<size_t>(i)];
    for (int t = 0; t < T; ++t) {
      rows.push_back({RowOrigin::charge_box, i, t, 0.0, s.ch_max[static_cast<size_t>(t)],
                      {{qp.pch_index(i, t), 1.0}}});
      rows.push_back({RowOrigin::discharge_box, i, t, 0.0, s.dc_max[static_cast<size_t>(t)],
                      {{qp.pdc_index(i, t), 1.0}}});
    }
  }

  // Generator output windows.
  for (int k = 0; k < G; ++k) {
    const Generator& g = c.generators[static_cast<size_t>(k)];
    for (int t = 0; t < T; ++t)
      rows.push_back({RowOrigin::gen_box, k, t, g.p_min, g.p_max_at(t),
                      {{qp.pg_index(k, t), 1.0}}});
  }

  // Energy windows with the stored-energy recursion substituted in: the row
  // for (i, t) accumulates xi^(t-tau) weights over tau <= t, and the constant
  // xi^t E0 moves to the bounds.
  for (int i = 0; i < S; ++i) {
    const StorageDevice& s = c.storages[static_cast<size_t>(i)];
    const double xi = s.retention();
    for (int t = 0; t < T; ++t) {
      ConstraintRow row;
      row.origin = RowOrigin::energy_window;
      row.entity = i;
      row.t = t;
      row.terms.reserve(static_cast<size_t>(2 * (t + 1)));
      double w = 1.0;  // xi^(t - tau), built backwards from tau = t
      for (int tau = t; tau >= 0; --tau) {
        row.terms.push_back({qp.pch_index(i, tau), w * s.eta_ch * dt});
        row.terms.push_back({qp.pdc_index(i, tau), -w * dt / s.eta_dc});
        w *= xi;
      }
      const double carried = std::pow(xi, t + 1) * s.e0;
      row.lo = s.e_min[static_cast<size_t>(t)] - carried;
      row.up = s.e_max[static_cast<size_t>(t)] - carried;
      rows.push_back(std::move(row));
    }
  }

  // Net charging requirement over the whole horizon.
  for (int i = 0; i < S; ++i) {
    const StorageDevice& s = c.storages[static_cast<size_t>(i)];
    const double xi = s.retention();
    ConstraintRow row;
    row.origin = RowOrigin::net_charge;
    row.entity = i;
    row.terms.reserve(static_cast<size_t>(2 * T));
    double w = 1.0;  // xi^(T - tau)
    for (int tau = T - 1; tau >= 0; --tau) {
      row.terms.push_back({qp.pch_index(i, tau), w * s.eta_ch * dt});
      row.terms.push_back({qp.pdc_index(i, tau), -w * dt / s.eta_dc});
      w *= xi;
    }
    row.lo = s.e_req;
    row.up = kInfinity;
    rows.push_back(std::move(row));
  }

  // Ramp windows, coupling consecutive steps. Rows that can never bind given
  // the output windows are dropped (renewable units carry inactive ramps).
  for (int k = 0; k < G; ++k) {
    const Generator& g = c.generators[static_cast<size_t>(k)];
    for (int t = 0; t + 1 < T; ++t) {
      const double rise_span = g.p_max_at(t + 1) - g.p_min;
      const double fall_span = g.p_max_at(t) - g.p_min;
      if (g.ramp_up >= rise_span && -g.ramp_down >= fall_span) continue;
      rows.push_back({RowOrigin::ramp, k, t, g.ramp_down, g.ramp_up,
                      {{qp.pg_index(k, t + 1), 1.0}, {qp.pg_index(k, t), -1.0}}});
    }
  }

  // System balance per step (equality).
  for (int t = 0; t < T; ++t) {
    ConstraintRow row;
    row.origin = RowOrigin::balance;
    row.t = t;
    row.terms.reserve(static_cast<size_t>(2 * S + G));
    for (int i = 0; i < S; ++i) {
      row.terms.push_back({qp.pch_index(i, t), -1.0});
      row.terms.push_back({qp.pdc_index(i, t), 1.0});
    }
    for (int k = 0; k < G; ++k) row.terms.push_back({qp.pg_index(k, t), 1.0});
    const double demand = c.loads.demand.col(t).sum();
    row.lo = row.up = demand;
    rows.push_back(std::move(row));
  }

  // Line flow windows. The load part of the injection is constant and moves
  // into the bounds.
  const Eigen::MatrixXd& gsf = qp.source.network.gsf;
  const int L = static_cast<int>(c.network.lines.size());
  for (int j = 0; j < L; ++j) {
    const Line& ln = c.network.lines[static_cast<size_t>(j)];
    for (int t = 0; t < T; ++t) {
      ConstraintRow row;
      row.origin = RowOrigin::flow;
      row.entity = j;
      row.t = t;
      for (int i = 0; i < S; ++i) {
        const double w = gsf(j, c.storages[static_cast<size_t>(i)].bus);
        if (std::abs(w) < 1e-12) continue;
        row.terms.push_back({qp.pch_index(i, t), -w});
        row.terms.push_back({qp.pdc_index(i, t), w});
      }
      for (int k = 0; k < G; ++k) {
        const double w = gsf(j, c.generators[static_cast<size_t>(k)].bus);
        if (std::abs(w) < 1e-12) continue;
        row.terms.push_back({qp.pg_index(k, t), w});
      }
      double load_flow = 0.0;
      for (int b = 0; b < c.network.n_buses; ++b) load_flow += gsf(j, b) * c.loads.demand(b, t);
      row.lo = is_unbounded(ln.flow_min) ? -kInfinity : ln.flow_min + load_flow;
      row.up = is_unbounded(ln.flow_max) ? kInfinity : ln.flow_max + load_flow;
      rows.push_back(std::move(row));
    }
  }

  return qp;
}

}  // namespace edrelax::qp
