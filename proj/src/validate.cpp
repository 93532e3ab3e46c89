#include "edrelax/validate.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

namespace edrelax {

namespace {

struct Reporter {
  ValidationReport& r;
  void error(std::string code, std::string msg) {
    r.violations.push_back({std::move(code), Severity::error, std::move(msg)});
  }
  void warn(std::string code, std::string msg) {
    r.violations.push_back({std::move(code), Severity::warning, std::move(msg)});
  }
};

std::string at(const char* what, int idx) {
  std::ostringstream os;
  os << what << "[" << idx << "]";
  return os.str();
}

bool finite_all(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& v : violations)
    os << (v.severity == Severity::error ? "error" : "warning") << " [" << v.code << "] "
       << v.message << "\n";
  return os.str();
}

ValidationReport validate_case(const NetworkCase& c) {
  ValidationReport report;
  Reporter out{report};
  const int T = c.horizon.steps;
  const int N = c.network.n_buses;

  if (T < 1) out.error("horizon.steps", "horizon must have at least one step");
  if (!(c.horizon.dt_hours > 0.0)) out.error("horizon.dt", "step length must be positive");

  // Network.
  if (N < 1) out.error("network.n_buses", "network needs at least one bus");
  if (c.network.slack_bus < 0 || c.network.slack_bus >= N)
    out.error("network.slack", "slack bus index out of range");
  for (size_t j = 0; j < c.network.lines.size(); ++j) {
    const Line& ln = c.network.lines[j];
    const std::string where = at("line", static_cast<int>(j));
    if (ln.from_bus < 0 || ln.from_bus >= N || ln.to_bus < 0 || ln.to_bus >= N)
      out.error("line.endpoint", where + ": endpoint bus out of range");
    if (!(ln.reactance > 0.0)) out.error("line.reactance", where + ": reactance must be positive");
    if (ln.flow_min > ln.flow_max)
      out.error("line.flow_bounds", where + ": flow_min exceeds flow_max");
  }
  if (c.network.gsf.size() > 0) {
    if (c.network.gsf.rows() != static_cast<Eigen::Index>(c.network.lines.size()) ||
        c.network.gsf.cols() != N) {
      out.error("network.gsf.shape", "gsf matrix shape does not match lines x buses");
    } else {
      if (c.network.slack_bus >= 0 && c.network.slack_bus < N &&
          c.network.gsf.col(c.network.slack_bus).cwiseAbs().maxCoeff() > 1e-9)
        out.error("network.gsf.slack", "gsf column at the slack bus must be zero");
      if (c.network.gsf.cwiseAbs().maxCoeff() > 1.0 + 1e-7)
        out.error("network.gsf.magnitude", "gsf entries exceed 1 in magnitude");
    }
  }

  // Generators.
  if (c.generators.empty()) out.error("generators.count", "case needs at least one generator");
  for (size_t k = 0; k < c.generators.size(); ++k) {
    const Generator& g = c.generators[k];
    const std::string where = at("generator", static_cast<int>(k));
    if (g.bus < 0 || g.bus >= N) out.error("generator.bus", where + ": bus out of range");
    if (g.p_min < 0.0) out.error("generator.p_min", where + ": p_min must be non-negative");
    if (g.p_min > g.p_max) out.error("generator.p_bounds", where + ": p_min exceeds p_max");
    if (g.cost_quadratic < 0.0)
      out.error("generator.cost.convexity", where + ": quadratic cost coefficient negative");
    if (g.ramp_up < 0.0 || g.ramp_down > 0.0)
      out.error("generator.ramp.sign", where + ": need ramp_down <= 0 <= ramp_up");
    if (!g.p_max_profile.empty()) {
      if (static_cast<int>(g.p_max_profile.size()) != T)
        out.error("generator.p_max_profile.length", where + ": profile length != horizon steps");
      for (double v : g.p_max_profile)
        if (!std::isfinite(v) || v < g.p_min) {
          out.error("generator.p_max_profile.range",
                    where + ": profile entry below p_min or non-finite");
          break;
        }
    }
  }

  // Storages.
  for (size_t i = 0; i < c.storages.size(); ++i) {
    const StorageDevice& s = c.storages[i];
    const std::string where = at("storage", static_cast<int>(i));
    if (s.bus < 0 || s.bus >= N) out.error("storage.bus", where + ": bus out of range");
    if (!(s.eta_ch > 0.0 && s.eta_ch <= 1.0))
      out.error("storage.eta_ch", where + ": eta_ch must lie in (0,1]");
    if (!(s.eta_dc > 0.0 && s.eta_dc <= 1.0))
      out.error("storage.eta_dc", where + ": eta_dc must lie in (0,1]");
    if (s.eta_ch > 0.0 && s.eta_dc > 0.0 && !(s.eta_cycle() < 1.0))
      out.error("storage.efficiency.round_trip",
                where + ": perfect round-trip efficiency (eta_ch*eta_dc must be < 1)");
    if (!(s.self_discharge >= 0.0 && s.self_discharge < 1.0))
      out.error("storage.self_discharge", where + ": self-discharge must lie in [0,1)");
    auto check_vec = [&](const std::vector<double>& v, const char* name, bool nonneg) {
      if (static_cast<int>(v.size()) != T) {
        out.error(std::string("storage.") + name + ".length",
                  where + ": " + name + " length != horizon steps");
        return false;
      }
      if (!finite_all(v)) {
        out.error(std::string("storage.") + name + ".finite", where + ": non-finite entry");
        return false;
      }
      if (nonneg)
        for (double x : v)
          if (x < 0.0) {
            out.error(std::string("storage.") + name + ".sign", where + ": negative entry");
            return false;
          }
      return true;
    };
    const bool ch_ok = check_vec(s.ch_max, "ch_max", true);
    const bool dc_ok = check_vec(s.dc_max, "dc_max", true);
    (void)ch_ok;
    (void)dc_ok;
    const bool emin_ok = check_vec(s.e_min, "e_min", false);
    const bool emax_ok = check_vec(s.e_max, "e_max", false);
    if (emin_ok && emax_ok) {
      for (int t = 0; t < T; ++t) {
        if (s.e_min[static_cast<size_t>(t)] < 0.0 ||
            s.e_min[static_cast<size_t>(t)] > s.e_max[static_cast<size_t>(t)]) {
          out.error("storage.energy_bounds", where + ": need 0 <= e_min(t) <= e_max(t)");
          break;
        }
      }
      if (T >= 1 && (s.e0 < s.e_min[0] - 1e-9 || s.e0 > s.e_max[0] + 1e-9))
        out.error("storage.e0.range", where + ": initial energy outside the period-1 window");
    }
  }

  // Prices.
  if (c.prices.storages.size() != c.storages.size())
    out.error("prices.count", "price entries must match the storage count");
  if (c.prices.scenario < 1 || c.prices.scenario > 3)
    out.error("prices.scenario", "scenario tag must be 1, 2 or 3");
  for (size_t i = 0; i < c.prices.storages.size(); ++i) {
    const StoragePrice& p = c.prices.storages[i];
    const std::string where = at("price", static_cast<int>(i));
    if (p.g_quad < 0.0)
      out.error("prices.g.convexity", where + ": discharging cost not convex (g_quad < 0)");
    if (p.g_lin < 0.0)
      out.error("prices.g.monotone", where + ": discharging cost decreasing at zero (g_lin < 0)");
    const bool g_zero = p.g_quad == 0.0 && p.g_lin == 0.0;
    bool tag_ok = true;
    switch (c.prices.scenario) {
      case 1: tag_ok = p.f_slope < 0.0 && !g_zero; break;
      case 2: tag_ok = p.f_slope == 0.0 && g_zero; break;
      case 3: tag_ok = p.f_slope > 0.0 && !g_zero; break;
      default: break;
    }
    if (!tag_ok)
      out.error("prices.scenario_signs",
                where + ": (f', g') signs inconsistent with the scenario tag");
  }

  // Loads.
  if (c.loads.demand.rows() != N || c.loads.demand.cols() != T)
    out.error("loads.shape", "load matrix must be buses x steps");
  else if (!c.loads.demand.allFinite())
    out.error("loads.finite", "load matrix has non-finite entries");

  // Aggregate feasibility screen (warning only): enough capacity for peak load.
  if (!c.generators.empty() && c.loads.demand.rows() == N && c.loads.demand.cols() == T) {
    for (int t = 0; t < T; ++t) {
      double cap = 0.0;
      for (const Generator& g : c.generators) cap += g.p_max_at(t);
      for (const StorageDevice& s : c.storages)
        if (static_cast<int>(s.dc_max.size()) == T) cap += s.dc_max[static_cast<size_t>(t)];
      const double load = c.loads.demand.col(t).sum();
      if (cap < load) {
        std::ostringstream os;
        os << "generation capacity " << cap << " MW below load " << load << " MW at step " << t;
        out.warn("case.capacity_screen", os.str());
        break;
      }
    }
  }

  return report;
}

std::uint64_t fingerprint_case(const NetworkCase& c) {
  // FNV-1a over the numeric content; enough to catch case/solution mixups.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  auto mix_i = [&](int v) { mix(static_cast<double>(v)); };
  mix_i(c.horizon.steps);
  mix(c.horizon.dt_hours);
  mix_i(c.network.n_buses);
  mix_i(c.network.slack_bus);
  for (const Line& l : c.network.lines) {
    mix_i(l.from_bus);
    mix_i(l.to_bus);
    mix(l.reactance);
    mix(l.flow_min);
    mix(l.flow_max);
  }
  for (const Generator& g : c.generators) {
    mix_i(g.bus);
    mix(g.p_min);
    mix(g.p_max);
    mix(g.ramp_up);
    mix(g.ramp_down);
    mix(g.cost_quadratic);
    mix(g.cost_linear);
    for (double v : g.p_max_profile) mix(v);
  }
  for (const StorageDevice& s : c.storages) {
    mix_i(s.bus);
    for (double v : s.ch_max) mix(v);
    for (double v : s.dc_max) mix(v);
    mix(s.eta_ch);
    mix(s.eta_dc);
    mix(s.self_discharge);
    mix(s.e0);
    for (double v : s.e_min) mix(v);
    for (double v : s.e_max) mix(v);
    mix(s.e_req);
  }
  mix_i(c.prices.scenario);
  for (const StoragePrice& p : c.prices.storages) {
    mix(p.f_slope);
    mix(p.g_quad);
    mix(p.g_lin);
  }
  for (Eigen::Index i = 0; i < c.loads.demand.size(); ++i) mix(c.loads.demand.data()[i]);
  return h;
}

}  // namespace edrelax
