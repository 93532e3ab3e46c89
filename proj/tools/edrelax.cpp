#include "edrelax/casekit/builders.hpp"
#include "edrelax/casekit/json_io.hpp"
#include "edrelax/casekit/matpower.hpp"
#include "edrelax/casekit/random.hpp"
#include "edrelax/oracle/oracle.hpp"
#include "edrelax/qp/kkt.hpp"
#include "edrelax/qp/solve.hpp"
#include "edrelax/relax/conditions.hpp"
#include "edrelax/relax/exactness.hpp"
#include "edrelax/relax/lmp.hpp"
#include "edrelax/validate.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

namespace {

using namespace edrelax;

constexpr int kExitOk = 0;
constexpr int kExitConditionFailed = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitSolverFailure = 3;
constexpr int kExitBudget = 4;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitNoInput = 66;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot write: " + path);
  out << content;
}

int status_exit_code(qp::SolveStatus s) {
  switch (s) {
    case qp::SolveStatus::optimal: return kExitOk;
    case qp::SolveStatus::infeasible: return kExitInfeasible;
    default: return kExitSolverFailure;
  }
}

/// Forecast CSV: header `bus,step,lmp_forecast`, one row per (bus, step),
/// 0-based indices, full coverage required.
Eigen::MatrixXd parse_forecast_csv(const std::string& text, int n_buses, int steps) {
  Eigen::MatrixXd m(n_buses, steps);
  Eigen::MatrixXi seen = Eigen::MatrixXi::Zero(n_buses, steps);
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.rfind("bus", 0) == 0) continue;
    std::istringstream ls(line);
    std::string tok;
    double vals[3];
    for (int f = 0; f < 3; ++f) {
      if (!std::getline(ls, tok, ',')) throw std::runtime_error(
          "forecast csv line " + std::to_string(line_no) + ": expected bus,step,lmp_forecast");
      vals[f] = std::stod(tok);
    }
    const int b = static_cast<int>(vals[0]);
    const int t = static_cast<int>(vals[1]);
    if (b < 0 || b >= n_buses || t < 0 || t >= steps)
      throw std::runtime_error("forecast csv line " + std::to_string(line_no) +
                               ": bus/step out of range");
    m(b, t) = vals[2];
    seen(b, t) = 1;
  }
  if (seen.sum() != n_buses * steps)
    throw std::runtime_error("forecast csv: missing entries (" +
                             std::to_string(n_buses * steps - seen.sum()) + " of " +
                             std::to_string(n_buses * steps) + ")");
  return m;
}

std::string dispatch_csv(const NetworkCase& c, const qp::DispatchSolution& sol) {
  std::ostringstream os;
  os.precision(10);
  os << "step,total_load,total_wind,total_p_ch,total_p_dc,net_storage_power,lambda\n";
  for (int t = 0; t < c.horizon.steps; ++t) {
    double wind = 0.0;
    for (size_t k = 0; k < c.generators.size(); ++k)
      if (c.generators[k].is_renewable()) wind += sol.p_g(static_cast<int>(k), t);
    const double ch = sol.p_ch.rows() ? sol.p_ch.col(t).sum() : 0.0;
    const double dc = sol.p_dc.rows() ? sol.p_dc.col(t).sum() : 0.0;
    os << t << ',' << c.loads.demand.col(t).sum() << ',' << wind << ',' << ch << ',' << dc << ','
       << (dc - ch) << ',' << sol.duals.lambda(t) << '\n';
  }
  return os.str();
}

int resolve_threads() {
  if (const char* env = std::getenv("EDRELAX_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

struct CheckOptions {
  std::string case_path;
  std::string group = "auto";
  std::string forecast_path;
  double mape = 0.0;
  bool posteriori = false;
  std::string out_path;
};

int run_check(const CheckOptions& opt) {
  const casekit::ParsedCase parsed = casekit::load_case_file(opt.case_path);
  const NetworkCase& c = parsed.network_case;

  std::optional<relax::LmpForecast> forecast = parsed.forecast;
  if (!opt.forecast_path.empty()) {
    relax::LmpForecast f;
    f.forecast = parse_forecast_csv(read_file(opt.forecast_path), c.network.n_buses, c.horizon.steps);
    f.mape = opt.mape;
    forecast = std::move(f);
  }

  const bool a_priori = !opt.posteriori && forecast.has_value();
  if (!a_priori && opt.group == "auto" && !forecast) {
    // a-posteriori auto mode: all three groups evaluated on realized duals
  }

  Eigen::MatrixXd lmp_ref;
  relax::CheckMode mode;
  std::optional<qp::DispatchSolution> sol;
  if (a_priori) {
    mode = relax::CheckMode::a_priori;
    lmp_ref = relax::lmp_lower_bound(*forecast);
    std::cerr << "a-priori check: forecast lower bound = (1 - 3*mape) * forecast, mape = "
              << forecast->mape << ", min bound = " << lmp_ref.minCoeff() << " $/MWh\n";
  } else {
    mode = relax::CheckMode::a_posteriori;
    sol = qp::solve_case(c);
    if (sol->status != qp::SolveStatus::optimal) {
      std::cerr << "check: solve " << qp::solve_status_name(sol->status) << "; " << sol->diagnosis
                << "\n";
      return status_exit_code(sol->status);
    }
    lmp_ref = relax::compute_lmp(*sol, c.network).lmp;
  }
  const Eigen::MatrixXd* realized =
      sol.has_value() && sol->p_dc.size() > 0 ? &sol->p_dc : nullptr;

  const auto check = [&](relax::ConditionGroup g) {
    switch (g) {
      case relax::ConditionGroup::A:
        return relax::check_conditions_a(c.prices, c.storages, lmp_ref, mode, realized);
      case relax::ConditionGroup::B:
        return relax::check_conditions_b(c.prices, c.storages, lmp_ref, mode, realized);
      default:
        return relax::check_conditions_c(c.prices, c.storages, lmp_ref, mode, realized);
    }
  };

  relax::ConditionReport chosen;
  std::string rationale;
  if (opt.group == "a" || opt.group == "b" || opt.group == "c") {
    chosen = check(opt.group == "a"   ? relax::ConditionGroup::A
                   : opt.group == "b" ? relax::ConditionGroup::B
                                      : relax::ConditionGroup::C);
  } else if (a_priori) {
    const relax::Recommendation rec = relax::recommend_group(*forecast, c.prices, c.storages);
    rationale = rec.rationale;
    if (!rec.group) {
      std::cerr << "check: no condition group certifies a-priori: " << rec.rationale << "\n";
      if (!opt.out_path.empty())
        write_output(opt.out_path, casekit::serialize_condition_report(rec.report_a));
      return kExitConditionFailed;
    }
    chosen = rec.group == relax::ConditionGroup::A   ? rec.report_a
             : rec.group == relax::ConditionGroup::B ? rec.report_b
                                                     : rec.report_c;
  } else {
    // a-posteriori auto: same priority rule evaluated on realized duals
    const relax::ConditionReport rc = check(relax::ConditionGroup::C);
    const relax::ConditionReport ra = check(relax::ConditionGroup::A);
    const relax::ConditionReport rb = check(relax::ConditionGroup::B);
    chosen = rc.satisfied ? rc : (ra.satisfied ? ra : rb);
    rationale = "a-posteriori auto selection over realized duals";
  }

  std::cerr << "conditions " << relax::condition_group_name(chosen.group) << " ("
            << (chosen.mode == relax::CheckMode::a_priori ? "a-priori" : "a-posteriori")
            << "): " << (chosen.satisfied ? "satisfied" : "violated")
            << "; min price margin " << chosen.min_price_margin << ", min LMP margin "
            << chosen.min_lmp_margin << "\n";
  if (!rationale.empty()) std::cerr << rationale << "\n";
  if (!opt.out_path.empty())
    write_output(opt.out_path, casekit::serialize_condition_report(chosen));
  return chosen.satisfied ? kExitOk : kExitConditionFailed;
}

int run_sweep(std::uint64_t seed, int instances, const std::string& target, int buses,
              int storages, int steps, std::uint64_t oracle_limit, const std::string& out_path) {
  casekit::Targeting targeting = casekit::Targeting::unconstrained;
  if (target == "satisfy-a") targeting = casekit::Targeting::satisfy_a;
  else if (target == "satisfy-c") targeting = casekit::Targeting::satisfy_c;
  else if (target == "violate-a2") targeting = casekit::Targeting::violate_a2;
  else if (target != "unconstrained") throw CLI::ValidationError("--target", "unknown targeting");

  struct Row {
    std::uint64_t seed;
    std::string status;
    bool a = false, b = false, cc = false;
    double max_product = 0.0;
    std::optional<double> gap;
    std::optional<bool> exact;
  };
  std::vector<Row> rows(static_cast<size_t>(instances));
  std::atomic<int> cursor{0};
  auto worker = [&]() {
    for (;;) {
      const int idx = cursor.fetch_add(1);
      if (idx >= instances) return;
      Row& row = rows[static_cast<size_t>(idx)];
      casekit::ScenarioSpec spec;
      spec.seed = seed + static_cast<std::uint64_t>(idx);
      spec.n_buses = buses;
      spec.n_storages = storages;
      spec.horizon_steps = steps;
      spec.targeting = targeting;
      row.seed = spec.seed;
      const NetworkCase c = casekit::generate_random(spec);
      const qp::DispatchSolution sol = qp::solve_case(c);
      row.status = qp::solve_status_name(sol.status);
      if (sol.status != qp::SolveStatus::optimal) continue;
      const Eigen::MatrixXd lmp = relax::compute_lmp(sol, c.network).lmp;
      row.a = relax::check_conditions_a(c.prices, c.storages, lmp,
                                        relax::CheckMode::a_posteriori, &sol.p_dc)
                  .satisfied;
      row.b = relax::check_conditions_b(c.prices, c.storages, lmp,
                                        relax::CheckMode::a_posteriori, &sol.p_dc)
                  .satisfied;
      row.cc = relax::check_conditions_c(c.prices, c.storages, lmp,
                                         relax::CheckMode::a_posteriori, &sol.p_dc)
                   .satisfied;
      row.max_product = relax::verify_exactness(sol).max_product;
      const int bits = static_cast<int>(c.storages.size()) * c.horizon.steps;
      if (bits < 63 && (1ull << bits) <= oracle_limit) {
        oracle::OracleSettings os;
        os.threads = 1;  // instances already run in parallel
        os.pattern_limit = oracle_limit;
        const oracle::OracleResult orc = oracle::enumerate_mpec(c, os);
        const oracle::ExactnessComparison cmp = oracle::compare(sol, orc);
        row.gap = cmp.gap;
        row.exact = cmp.exact;
      }
    }
  };
  const int threads = std::max(1, std::min(resolve_threads(), instances));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::ostringstream csv;
  csv.precision(12);
  csv << "instance,seed,status,cond_a,cond_b,cond_c,max_product,oracle_gap,exact\n";
  int per_group_sat[3] = {0, 0, 0};
  int per_group_exact[3] = {0, 0, 0};
  int with_oracle = 0, exact_count = 0;
  for (int i = 0; i < instances; ++i) {
    const Row& row = rows[static_cast<size_t>(i)];
    csv << i << ',' << row.seed << ',' << row.status << ',' << row.a << ',' << row.b << ','
        << row.cc << ',' << row.max_product << ',';
    if (row.gap) csv << *row.gap;
    csv << ',';
    if (row.exact) csv << (*row.exact ? 1 : 0);
    csv << '\n';
    if (row.exact) {
      ++with_oracle;
      if (*row.exact) ++exact_count;
      const bool sats[3] = {row.a, row.b, row.cc};
      for (int g = 0; g < 3; ++g)
        if (sats[g]) {
          ++per_group_sat[g];
          if (*row.exact) ++per_group_exact[g];
        }
    }
  }
  if (!out_path.empty()) write_output(out_path, csv.str());
  else std::cout << csv.str();
  std::cerr << "sweep: " << instances << " instances, " << with_oracle << " with oracle; exact "
            << exact_count << "/" << with_oracle << "\n";
  const char* names[3] = {"A", "B", "C"};
  for (int g = 0; g < 3; ++g)
    if (per_group_sat[g] > 0)
      std::cerr << "  conditions " << names[g] << " satisfied on " << per_group_sat[g]
                << " instances; exact on " << per_group_exact[g] << " of them\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"storage-concerned economic dispatch: relaxed QP solver and exactness certificates"};
  app.require_subcommand(1);

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "solve the relaxed dispatch QP");
  std::string solve_case_path, solve_out, solve_csv;
  qp::SolveSettings solve_settings;
  solve_cmd->add_option("case", solve_case_path, "case JSON path")->required();
  solve_cmd->add_option("--out", solve_out, "solution JSON path ('-' for stdout)");
  solve_cmd->add_option("--csv", solve_csv, "dispatch trajectory CSV path");
  solve_cmd->add_option("--primal-tol", solve_settings.primal_tol, "primal feasibility tolerance");
  solve_cmd->add_option("--dual-tol", solve_settings.dual_tol, "dual feasibility tolerance");
  solve_cmd->add_option("--cs-tol", solve_settings.cs_tol, "complementary slackness tolerance");
  solve_cmd->add_option("--max-iter", solve_settings.max_iter, "interior point iteration limit");

  // check
  auto* check_cmd = app.add_subcommand("check", "evaluate the exactness condition groups");
  CheckOptions check_opt;
  check_cmd->add_option("case", check_opt.case_path, "case JSON path")->required();
  check_cmd->add_option("--group", check_opt.group, "a|b|c|auto (default auto)");
  check_cmd->add_option("--forecast", check_opt.forecast_path, "LMP forecast CSV (bus,step,lmp_forecast)");
  check_cmd->add_option("--mape", check_opt.mape, "forecast MAPE as a fraction, e.g. 0.01");
  check_cmd->add_flag("--posteriori", check_opt.posteriori, "solve and check realized duals");
  check_cmd->add_option("--out", check_opt.out_path, "condition report JSON path");

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "audit complementarity of a solution");
  std::string verify_path, verify_out;
  double verify_tol = 1e-7;
  verify_cmd->add_option("input", verify_path, "case or solution JSON path")->required();
  verify_cmd->add_option("--tol", verify_tol, "max allowed p_ch*p_dc (MW^2)");
  verify_cmd->add_option("--out", verify_out, "exactness report JSON path");

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "enumerate complementarity patterns");
  std::string oracle_case_path, oracle_out;
  std::uint64_t oracle_limit = 1ull << 20;
  oracle_cmd->add_option("case", oracle_case_path, "case JSON path")->required();
  oracle_cmd->add_option("--limit", oracle_limit, "pattern budget (default 2^20)");
  oracle_cmd->add_option("--out", oracle_out, "comparison report JSON path");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "randomized certificate/exactness sweep");
  int sweep_instances = 20, sweep_buses = 3, sweep_storages = 1, sweep_steps = 4;
  std::uint64_t sweep_seed = 1;
  std::uint64_t sweep_limit = 1ull << 16;
  std::string sweep_target = "unconstrained", sweep_out;
  sweep_cmd->add_option("--instances", sweep_instances, "instance count")->required();
  sweep_cmd->add_option("--seed", sweep_seed, "base seed")->required();
  sweep_cmd->add_option("--target", sweep_target, "satisfy-a|satisfy-c|violate-a2|unconstrained");
  sweep_cmd->add_option("--buses", sweep_buses, "buses per instance");
  sweep_cmd->add_option("--storages", sweep_storages, "storages per instance");
  sweep_cmd->add_option("--steps", sweep_steps, "horizon steps per instance");
  sweep_cmd->add_option("--oracle-limit", sweep_limit, "per-instance oracle pattern budget");
  sweep_cmd->add_option("--out", sweep_out, "aggregate CSV path");

  // gen
  auto* gen_cmd = app.add_subcommand("gen", "write a bundled case");
  std::string gen_name, gen_out;
  gen_cmd->add_option("name", gen_name, "ieee30|counterexample")->required();
  gen_cmd->add_option("--out", gen_out, "case JSON path (default <name>.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (solve_cmd->parsed()) {
      const casekit::ParsedCase parsed = casekit::load_case_file(solve_case_path);
      const qp::DispatchSolution sol = qp::solve_case(parsed.network_case, solve_settings);
      if (sol.status != qp::SolveStatus::optimal)
        std::cerr << "solve: " << qp::solve_status_name(sol.status)
                  << (sol.diagnosis.empty() ? "" : "; " + sol.diagnosis) << "\n";
      else
        std::cerr << "solve: optimal, objective " << sol.objective << " $, " << sol.iterations
                  << " iterations" << (sol.polished ? " (polished)" : "") << "\n";
      if (!solve_out.empty()) write_output(solve_out, casekit::serialize_solution(sol));
      if (!solve_csv.empty() && sol.status == qp::SolveStatus::optimal)
        write_output(solve_csv, dispatch_csv(parsed.network_case, sol));
      return status_exit_code(sol.status);
    }
    if (check_cmd->parsed()) return run_check(check_opt);
    if (verify_cmd->parsed()) {
      const std::string text = read_file(verify_path);
      qp::DispatchSolution sol;
      if (text.find("\"edrelax-sol/1\"") != std::string::npos) {
        sol = casekit::parse_solution(text);
      } else {
        const casekit::ParsedCase parsed = casekit::parse_case(text);
        sol = qp::solve_case(parsed.network_case);
        if (sol.status != qp::SolveStatus::optimal) {
          std::cerr << "verify: solve " << qp::solve_status_name(sol.status) << "\n";
          return status_exit_code(sol.status);
        }
      }
      const relax::ExactnessReport rep = relax::verify_exactness(sol, verify_tol);
      std::cerr << "verify: max p_ch*p_dc = " << rep.max_product << " MW^2 (tol " << rep.tol
                << "), " << (rep.exact ? "exact" : "NOT exact") << "\n";
      for (const auto& [i, t] : rep.violations)
        std::cerr << "  simultaneity at storage " << i << ", step " << t << "\n";
      if (!verify_out.empty()) write_output(verify_out, casekit::serialize_exactness_report(rep));
      return rep.exact ? kExitOk : kExitConditionFailed;
    }
    if (oracle_cmd->parsed()) {
      const casekit::ParsedCase parsed = casekit::load_case_file(oracle_case_path);
      oracle::OracleSettings os;
      os.pattern_limit = oracle_limit;
      oracle::OracleResult orc;
      try {
        orc = oracle::enumerate_mpec(parsed.network_case, os);
      } catch (const oracle::BudgetExceeded& e) {
        std::cerr << e.what() << "\n";
        return kExitBudget;
      }
      const qp::DispatchSolution sol = qp::solve_case(parsed.network_case);
      if (sol.status != qp::SolveStatus::optimal) {
        std::cerr << "oracle: relaxed solve " << qp::solve_status_name(sol.status) << "\n";
        return status_exit_code(sol.status);
      }
      const oracle::ExactnessComparison cmp = oracle::compare(sol, orc);
      std::cerr << "oracle: " << orc.patterns_total << " patterns (" << orc.patterns_solved
                << " solved, " << orc.patterns_infeasible << " infeasible, " << orc.patterns_pruned
                << " pruned)\n"
                << "relaxed objective " << sol.objective << " $, oracle best " << orc.best_objective
                << " $, gap " << cmp.gap << " $ -> " << (cmp.exact ? "exact" : "NOT exact") << "\n";
      if (!oracle_out.empty()) {
        std::ostringstream js;
        js << "{\n  \"patterns\": " << orc.patterns_total << ",\n  \"solved\": "
           << orc.patterns_solved << ",\n  \"infeasible\": " << orc.patterns_infeasible
           << ",\n  \"pruned\": " << orc.patterns_pruned << ",\n  \"relaxed_objective\": "
           << sol.objective << ",\n  \"oracle_objective\": " << orc.best_objective
           << ",\n  \"gap\": " << cmp.gap << ",\n  \"max_product\": " << cmp.max_product
           << ",\n  \"exact\": " << (cmp.exact ? "true" : "false") << "\n}\n";
        write_output(oracle_out, js.str());
      }
      return cmp.exact ? kExitOk : kExitConditionFailed;
    }
    if (sweep_cmd->parsed())
      return run_sweep(sweep_seed, sweep_instances, sweep_target, sweep_buses, sweep_storages,
                       sweep_steps, sweep_limit, sweep_out);
    if (gen_cmd->parsed()) {
      NetworkCase c;
      if (gen_name == "ieee30")
        c = casekit::build_ieee30_scenario();
      else if (gen_name == "counterexample")
        c = casekit::build_counterexample_case();
      else {
        std::cerr << "gen: unknown case '" << gen_name << "' (expected ieee30|counterexample)\n";
        return kExitUsage;
      }
      const std::string out = gen_out.empty() ? gen_name + ".json" : gen_out;
      write_output(out, casekit::serialize_case(c));
      std::cerr << "gen: wrote " << out << "\n";
      return kExitOk;
    }
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitNoInput;
  } catch (const casekit::CaseFormatError& e) {
    std::cerr << e.what() << "\n";
    return kExitData;
  } catch (const casekit::MatpowerError& e) {
    std::cerr << e.what() << "\n";
    return kExitData;
  } catch (const ValidationError& e) {
    std::cerr << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolverFailure;
  }
  return kExitUsage;
}
