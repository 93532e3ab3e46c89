#include "edrelax/casekit/json_io.hpp"

#include "edrelax/gsf.hpp"
#include "edrelax/validate.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace edrelax::casekit {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw CaseFormatError("case document: " + path + ": " + what);
}

const json& member(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing");
  return *it;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

double num_field(const json& j, const std::string& path, const char* key) {
  return as_number(member(j, path, key), path + "." + key);
}

int int_field(const json& j, const std::string& path, const char* key) {
  return as_int(member(j, path, key), path + "." + key);
}

/// Accepts either a scalar (broadcast) or a length-T array.
std::vector<double> step_vector(const json& j, const std::string& path, int steps) {
  if (j.is_number()) return broadcast(j.get<double>(), steps);
  if (!j.is_array()) fail(path, "expected a number or an array");
  if (static_cast<int>(j.size()) != steps) fail(path, "array length must equal horizon.steps");
  std::vector<double> v;
  v.reserve(j.size());
  for (size_t i = 0; i < j.size(); ++i) v.push_back(as_number(j[i], path));
  return v;
}

Eigen::MatrixXd matrix_field(const json& j, const std::string& path, int rows, int cols) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    fail(path, "expected an array with one row per bus");
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const json& row = j[static_cast<size_t>(r)];
    std::ostringstream rp;
    rp << path << "[" << r << "]";
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      fail(rp.str(), "expected one entry per step");
    for (int cidx = 0; cidx < cols; ++cidx) m(r, cidx) = as_number(row[static_cast<size_t>(cidx)], rp.str());
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const std::vector<double>& v) {
  return json(v);
}

bool is_constant(const std::vector<double>& v) {
  for (double x : v)
    if (x != v.front()) return false;
  return !v.empty();
}

json step_vector_to_json(const std::vector<double>& v) {
  if (is_constant(v)) return json(v.front());
  return vector_to_json(v);
}

}  // namespace

ParsedCase parse_case(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw CaseFormatError(std::string("case document: not valid JSON: ") + e.what());
  }
  if (member(doc, "$", "format").get<std::string>() != kCaseFormat)
    fail("format", std::string("expected \"") + kCaseFormat + "\"");

  ParsedCase out;
  NetworkCase& c = out.network_case;

  const json& jh = member(doc, "$", "horizon");
  c.horizon.steps = int_field(jh, "horizon", "steps");
  c.horizon.dt_hours = num_field(jh, "horizon", "dt_hours");
  const int T = c.horizon.steps;

  const json& jn = member(doc, "$", "network");
  c.network.n_buses = int_field(jn, "network", "n_buses");
  c.network.slack_bus = int_field(jn, "network", "slack_bus");
  const json& jlines = member(jn, "network", "lines");
  if (!jlines.is_array()) fail("network.lines", "expected an array");
  for (size_t j = 0; j < jlines.size(); ++j) {
    std::ostringstream lp;
    lp << "network.lines[" << j << "]";
    const json& jl = jlines[j];
    Line ln;
    ln.from_bus = int_field(jl, lp.str(), "from");
    ln.to_bus = int_field(jl, lp.str(), "to");
    ln.reactance = num_field(jl, lp.str(), "reactance");
    ln.flow_min = num_field(jl, lp.str(), "flow_min");
    ln.flow_max = num_field(jl, lp.str(), "flow_max");
    c.network.lines.push_back(ln);
  }

  const json& jgens = member(doc, "$", "generators");
  if (!jgens.is_array()) fail("generators", "expected an array");
  for (size_t k = 0; k < jgens.size(); ++k) {
    std::ostringstream gp;
    gp << "generators[" << k << "]";
    const json& jg = jgens[k];
    Generator g;
    g.bus = int_field(jg, gp.str(), "bus");
    g.p_min = num_field(jg, gp.str(), "p_min");
    g.p_max = num_field(jg, gp.str(), "p_max");
    g.ramp_up = jg.contains("ramp_up") ? num_field(jg, gp.str(), "ramp_up") : kInfinity;
    g.ramp_down = jg.contains("ramp_down") ? num_field(jg, gp.str(), "ramp_down") : -kInfinity;
    g.cost_quadratic = num_field(jg, gp.str(), "cost_quadratic");
    g.cost_linear = num_field(jg, gp.str(), "cost_linear");
    if (jg.contains("p_max_profile")) {
      const json& prof = jg["p_max_profile"];
      g.p_max_profile = step_vector(prof, gp.str() + ".p_max_profile", T);
      g.p_max = *std::max_element(g.p_max_profile.begin(), g.p_max_profile.end());
    }
    c.generators.push_back(std::move(g));
  }

  const json& jsto = member(doc, "$", "storages");
  if (!jsto.is_array()) fail("storages", "expected an array");
  for (size_t i = 0; i < jsto.size(); ++i) {
    std::ostringstream sp;
    sp << "storages[" << i << "]";
    const json& js = jsto[i];
    StorageDevice s;
    s.bus = int_field(js, sp.str(), "bus");
    s.ch_max = step_vector(member(js, sp.str(), "ch_max"), sp.str() + ".ch_max", T);
    s.dc_max = step_vector(member(js, sp.str(), "dc_max"), sp.str() + ".dc_max", T);
    s.eta_ch = num_field(js, sp.str(), "eta_ch");
    s.eta_dc = num_field(js, sp.str(), "eta_dc");
    s.self_discharge = js.contains("self_discharge") ? num_field(js, sp.str(), "self_discharge") : 0.0;
    s.e0 = num_field(js, sp.str(), "e0");
    s.e_min = step_vector(member(js, sp.str(), "e_min"), sp.str() + ".e_min", T);
    s.e_max = step_vector(member(js, sp.str(), "e_max"), sp.str() + ".e_max", T);
    s.e_req = js.contains("e_req") ? num_field(js, sp.str(), "e_req") : kEnergyReqRelaxed;
    c.storages.push_back(std::move(s));
  }

  const json& jp = member(doc, "$", "prices");
  c.prices.scenario = int_field(jp, "prices", "scenario");
  const json& jps = member(jp, "prices", "storages");
  if (!jps.is_array()) fail("prices.storages", "expected an array");
  for (size_t i = 0; i < jps.size(); ++i) {
    std::ostringstream pp;
    pp << "prices.storages[" << i << "]";
    const json& je = jps[i];
    StoragePrice p;
    p.f_slope = num_field(je, pp.str(), "f_slope");
    p.g_quad = num_field(je, pp.str(), "g_quad");
    p.g_lin = num_field(je, pp.str(), "g_lin");
    c.prices.storages.push_back(p);
  }

  c.loads.demand = matrix_field(member(doc, "$", "loads"), "loads", c.network.n_buses, T);

  if (doc.contains("forecasts") && !doc["forecasts"].is_null()) {
    const json& jf = doc["forecasts"];
    relax::LmpForecast f;
    f.mape = num_field(jf, "forecasts", "mape");
    f.forecast = matrix_field(member(jf, "forecasts", "lmp"), "forecasts.lmp", c.network.n_buses, T);
    out.forecast = std::move(f);
  }

  if (!c.network.lines.empty()) c.network.gsf = compute_gsf(c.network);
  ValidationReport report = validate_case(c);
  if (report.has_errors()) throw ValidationError(report);
  return out;
}

std::string serialize_case(const NetworkCase& c, const std::optional<relax::LmpForecast>& forecast) {
  json doc;
  doc["format"] = kCaseFormat;
  doc["horizon"] = {{"steps", c.horizon.steps}, {"dt_hours", c.horizon.dt_hours}};
  json lines = json::array();
  for (const Line& ln : c.network.lines)
    lines.push_back({{"from", ln.from_bus},
                     {"to", ln.to_bus},
                     {"reactance", ln.reactance},
                     {"flow_min", ln.flow_min},
                     {"flow_max", ln.flow_max}});
  doc["network"] = {{"n_buses", c.network.n_buses},
                    {"slack_bus", c.network.slack_bus},
                    {"lines", std::move(lines)}};
  json gens = json::array();
  for (const Generator& g : c.generators) {
    json jg = {{"bus", g.bus},
               {"p_min", g.p_min},
               {"p_max", g.p_max},
               {"cost_quadratic", g.cost_quadratic},
               {"cost_linear", g.cost_linear}};
    if (!is_unbounded(g.ramp_up)) jg["ramp_up"] = g.ramp_up;
    if (!is_unbounded(g.ramp_down)) jg["ramp_down"] = g.ramp_down;
    if (!g.p_max_profile.empty()) jg["p_max_profile"] = step_vector_to_json(g.p_max_profile);
    gens.push_back(std::move(jg));
  }
  doc["generators"] = std::move(gens);
  json stos = json::array();
  for (const StorageDevice& s : c.storages) {
    json js = {{"bus", s.bus},
               {"ch_max", step_vector_to_json(s.ch_max)},
               {"dc_max", step_vector_to_json(s.dc_max)},
               {"eta_ch", s.eta_ch},
               {"eta_dc", s.eta_dc},
               {"self_discharge", s.self_discharge},
               {"e0", s.e0},
               {"e_min", step_vector_to_json(s.e_min)},
               {"e_max", step_vector_to_json(s.e_max)},
               {"e_req", s.e_req}};
    stos.push_back(std::move(js));
  }
  doc["storages"] = std::move(stos);
  json prices = json::array();
  for (const StoragePrice& p : c.prices.storages)
    prices.push_back({{"f_slope", p.f_slope}, {"g_quad", p.g_quad}, {"g_lin", p.g_lin}});
  doc["prices"] = {{"scenario", c.prices.scenario}, {"storages", std::move(prices)}};
  doc["loads"] = matrix_to_json(c.loads.demand);
  if (forecast)
    doc["forecasts"] = {{"mape", forecast->mape}, {"lmp", matrix_to_json(forecast->forecast)}};
  return doc.dump(2) + "\n";
}

ParsedCase load_case_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CaseFormatError("cannot open case file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_case(ss.str());
}

void save_case_file(const std::string& path, const NetworkCase& c,
                    const std::optional<relax::LmpForecast>& forecast) {
  std::ofstream out(path);
  if (!out) throw CaseFormatError("cannot write case file: " + path);
  out << serialize_case(c, forecast);
}

std::string serialize_solution(const qp::DispatchSolution& sol) {
  json doc;
  doc["format"] = kSolutionFormat;
  doc["status"] = qp::solve_status_name(sol.status);
  doc["objective"] = sol.objective;
  doc["iterations"] = sol.iterations;
  doc["polished"] = sol.polished;
  doc["case_fingerprint"] = sol.case_fingerprint;
  doc["diagnosis"] = sol.diagnosis;
  doc["residuals"] = {{"primal_feas", sol.residuals.primal_feas},
                      {"dual_feas", sol.residuals.dual_feas},
                      {"stationarity", sol.residuals.stationarity},
                      {"max_comp_product", sol.residuals.max_comp_product}};
  doc["p_ch"] = matrix_to_json(sol.p_ch);
  doc["p_dc"] = matrix_to_json(sol.p_dc);
  doc["p_g"] = matrix_to_json(sol.p_g);
  doc["energy"] = matrix_to_json(sol.energy);
  json duals;
  duals["lambda"] = std::vector<double>(sol.duals.lambda.data(),
                                        sol.duals.lambda.data() + sol.duals.lambda.size());
  duals["alpha1"] = matrix_to_json(sol.duals.alpha1);
  duals["alpha2"] = matrix_to_json(sol.duals.alpha2);
  duals["alpha3"] = matrix_to_json(sol.duals.alpha3);
  duals["alpha4"] = matrix_to_json(sol.duals.alpha4);
  duals["beta1"] = matrix_to_json(sol.duals.beta1);
  duals["beta2"] = matrix_to_json(sol.duals.beta2);
  duals["phi"] = std::vector<double>(sol.duals.phi.data(), sol.duals.phi.data() + sol.duals.phi.size());
  duals["mu1"] = matrix_to_json(sol.duals.mu1);
  duals["mu2"] = matrix_to_json(sol.duals.mu2);
  duals["gen_lo"] = matrix_to_json(sol.duals.gen_lo);
  duals["gen_hi"] = matrix_to_json(sol.duals.gen_hi);
  duals["ramp_lo"] = matrix_to_json(sol.duals.ramp_lo);
  duals["ramp_hi"] = matrix_to_json(sol.duals.ramp_hi);
  doc["duals"] = std::move(duals);
  return doc.dump(2) + "\n";
}

namespace {

Eigen::MatrixXd json_matrix(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of rows");
  const int rows = static_cast<int>(j.size());
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  const int cols = static_cast<int>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int cidx = 0; cidx < cols; ++cidx)
      m(r, cidx) = j[static_cast<size_t>(r)][static_cast<size_t>(cidx)].get<double>();
  return m;
}

Eigen::VectorXd json_vector(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

}  // namespace

qp::DispatchSolution parse_solution(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw CaseFormatError(std::string("solution document: not valid JSON: ") + e.what());
  }
  if (member(doc, "$", "format").get<std::string>() != kSolutionFormat)
    fail("format", std::string("expected \"") + kSolutionFormat + "\"");
  qp::DispatchSolution sol;
  const std::string status = member(doc, "$", "status").get<std::string>();
  if (status == "optimal")
    sol.status = qp::SolveStatus::optimal;
  else if (status == "infeasible")
    sol.status = qp::SolveStatus::infeasible;
  else if (status == "unbounded")
    sol.status = qp::SolveStatus::unbounded;
  else
    sol.status = qp::SolveStatus::max_iter;
  sol.objective = num_field(doc, "$", "objective");
  sol.iterations = doc.value("iterations", 0);
  sol.polished = doc.value("polished", false);
  sol.case_fingerprint = doc.value("case_fingerprint", std::uint64_t{0});
  sol.diagnosis = doc.value("diagnosis", std::string{});
  if (doc.contains("residuals")) {
    const json& jr = doc["residuals"];
    sol.residuals.primal_feas = jr.value("primal_feas", 0.0);
    sol.residuals.dual_feas = jr.value("dual_feas", 0.0);
    sol.residuals.stationarity = jr.value("stationarity", 0.0);
    sol.residuals.max_comp_product = jr.value("max_comp_product", 0.0);
  }
  sol.p_ch = json_matrix(member(doc, "$", "p_ch"), "p_ch");
  sol.p_dc = json_matrix(member(doc, "$", "p_dc"), "p_dc");
  sol.p_g = json_matrix(member(doc, "$", "p_g"), "p_g");
  if (doc.contains("energy")) sol.energy = json_matrix(doc["energy"], "energy");
  if (doc.contains("duals")) {
    const json& jd = doc["duals"];
    if (jd.contains("lambda")) sol.duals.lambda = json_vector(jd["lambda"]);
    auto get = [&](const char* key, Eigen::MatrixXd& target) {
      if (jd.contains(key)) target = json_matrix(jd[key], key);
    };
    get("alpha1", sol.duals.alpha1);
    get("alpha2", sol.duals.alpha2);
    get("alpha3", sol.duals.alpha3);
    get("alpha4", sol.duals.alpha4);
    get("beta1", sol.duals.beta1);
    get("beta2", sol.duals.beta2);
    if (jd.contains("phi")) sol.duals.phi = json_vector(jd["phi"]);
    get("mu1", sol.duals.mu1);
    get("mu2", sol.duals.mu2);
    get("gen_lo", sol.duals.gen_lo);
    get("gen_hi", sol.duals.gen_hi);
    get("ramp_lo", sol.duals.ramp_lo);
    get("ramp_hi", sol.duals.ramp_hi);
  }
  return sol;
}

std::string serialize_condition_report(const relax::ConditionReport& rep) {
  json doc;
  doc["group"] = relax::condition_group_name(rep.group);
  doc["mode"] = rep.mode == relax::CheckMode::a_priori ? "a_priori" : "a_posteriori";
  doc["satisfied"] = rep.satisfied;
  doc["min_price_margin"] = rep.min_price_margin;
  doc["min_lmp_margin"] = rep.min_lmp_margin;
  doc["price_strict"] = rep.price_strict;
  doc["lmp_strict"] = rep.lmp_strict;
  json entries = json::array();
  for (const relax::ConditionEntry& e : rep.entries) {
    if (e.price_ok && e.lmp_ok) continue;  // only failing entries are listed
    entries.push_back({{"storage", e.storage},
                       {"t", e.t},
                       {"price_margin", e.price_margin},
                       {"lmp_margin", e.lmp_margin},
                       {"price_ok", e.price_ok},
                       {"lmp_ok", e.lmp_ok}});
  }
  doc["failing_entries"] = std::move(entries);
  return doc.dump(2) + "\n";
}

std::string serialize_exactness_report(const relax::ExactnessReport& rep) {
  json doc;
  doc["max_product"] = rep.max_product;
  doc["tol"] = rep.tol;
  doc["exact"] = rep.exact;
  doc["argmax_storage"] = rep.argmax_storage;
  doc["argmax_t"] = rep.argmax_t;
  json viol = json::array();
  for (const auto& [i, t] : rep.violations) viol.push_back({{"storage", i}, {"t", t}});
  doc["violations"] = std::move(viol);
  if (rep.oracle_gap) doc["oracle_gap"] = *rep.oracle_gap;
  return doc.dump(2) + "\n";
}

}  // namespace edrelax::casekit
