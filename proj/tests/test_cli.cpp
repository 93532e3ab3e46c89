// End-to-end checks of the command line driver: exit codes, file outputs and
// determinism. Invoked as: edrelax_cli_tests <path-to-edrelax-binary>.

#include "edrelax/casekit/builders.hpp"
#include "edrelax/casekit/json_io.hpp"
#include "edrelax/types.hpp"

#include "support.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
  if (ok) {
    std::cout << "  ok: " << what << "\n";
  } else {
    std::cout << "  FAILED: " << what << "\n";
    ++failures;
  }
}

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string g_dir;
std::string g_cli;

RunResult run(const std::string& args) {
  const std::string out_path = g_dir + "/cmd.out";
  const std::string err_path = g_dir + "/cmd.err";
  const std::string cmd = g_cli + " " + args + " >" + out_path + " 2>" + err_path;
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: edrelax_cli_tests <edrelax-binary>\n";
    return 2;
  }
  g_cli = argv[1];
  char tmpl[] = "/tmp/edrelax_cli_XXXXXX";
  if (!mkdtemp(tmpl)) {
    std::cerr << "cannot create temp dir\n";
    return 2;
  }
  g_dir = tmpl;

  using namespace edrelax;

  // gen writes a parsable counterexample case
  const std::string ce = g_dir + "/ce.json";
  {
    const RunResult r = run("gen counterexample --out " + ce);
    expect(r.exit_code == 0, "gen counterexample exits 0");
    const auto parsed = casekit::load_case_file(ce);
    expect(parsed.network_case.storages.size() == 1, "generated case parses");
  }

  // solve produces a solution document and a dispatch CSV
  const std::string sol_path = g_dir + "/ce_sol.json";
  {
    const std::string csv_path = g_dir + "/ce.csv";
    const RunResult r = run("solve " + ce + " --out " + sol_path + " --csv " + csv_path);
    expect(r.exit_code == 0, "solve exits 0 on the counterexample");
    const std::string csv = slurp(csv_path);
    int lines = 0;
    for (char ch : csv)
      if (ch == '\n') ++lines;
    expect(lines == 3, "dispatch CSV has header plus one row per step");
    expect(csv.rfind("step,total_load,total_wind,total_p_ch,total_p_dc,net_storage_power,lambda",
                     0) == 0,
           "dispatch CSV header is the documented one");
    const auto sol = casekit::parse_solution(slurp(sol_path));
    expect(sol.status == qp::SolveStatus::optimal, "stored solution is optimal");
  }

  // verify flags the counterexample as inexact, from case and from solution
  {
    expect(run("verify " + ce).exit_code == 1, "verify exits 1 on the counterexample case");
    expect(run("verify " + sol_path).exit_code == 1, "verify exits 1 on the stored solution");
  }

  // condition check against realized duals
  {
    const RunResult r = run("check " + ce + " --group a --posteriori");
    expect(r.exit_code == 1, "check --group a exits 1 on the counterexample");
  }

  // a-priori check with a forecast CSV; the :20 -> 19.4 bound shows up
  {
    NetworkCase toy = testing::arbitrage_toy();
    const std::string toy_path = g_dir + "/toy.json";
    casekit::save_case_file(toy_path, toy);
    std::ofstream fcsv(g_dir + "/forecast.csv");
    fcsv << "bus,step,lmp_forecast\n";
    for (int t = 0; t < 2; ++t) fcsv << "0," << t << ",20.0\n";
    fcsv.close();
    const RunResult r =
        run("check " + toy_path + " --forecast " + g_dir + "/forecast.csv --mape 0.01");
    expect(r.exit_code == 0, "a-priori check exits 0 for the scenario-2 toy");
    expect(r.err.find("19.4") != std::string::npos, "the 19.4 lower bound is printed");
  }

  // oracle: inexact case yields exit 1; a tiny budget yields exit 4
  {
    expect(run("oracle " + ce).exit_code == 1, "oracle exits 1 on the counterexample");
    expect(run("oracle " + ce + " --limit 2").exit_code == 4, "oracle exits 4 over budget");
  }

  // streaming solution to stdout
  {
    const RunResult r = run("solve " + ce + " --out -");
    expect(r.exit_code == 0, "solve --out - exits 0");
    expect(r.out.find("edrelax-sol/1") != std::string::npos, "solution JSON reaches stdout");
  }

  // sweep determinism
  {
    const std::string s1 = g_dir + "/s1.csv", s2 = g_dir + "/s2.csv";
    const RunResult r1 = run("sweep --instances 4 --seed 7 --target satisfy-c --out " + s1);
    const RunResult r2 = run("sweep --instances 4 --seed 7 --target satisfy-c --out " + s2);
    expect(r1.exit_code == 0 && r2.exit_code == 0, "sweep exits 0");
    expect(slurp(s1) == slurp(s2), "repeated sweeps produce identical CSV bytes");
    expect(slurp(s1).rfind("instance,seed,status,", 0) == 0, "sweep CSV header");
  }

  // infeasible case exits 2 with a diagnosis
  {
    NetworkCase infeasible = testing::single_bus_case({500.0}, 0.01, 20.0, /*p_max=*/100.0);
    const std::string path = g_dir + "/infeasible.json";
    casekit::save_case_file(path, infeasible);
    const RunResult r = run("solve " + path);
    expect(r.exit_code == 2, "infeasible case exits 2");
    expect(r.err.find("infeasible") != std::string::npos, "diagnosis on stderr");
  }

  // usage and data errors
  {
    expect(run("frobnicate").exit_code == 64, "unknown subcommand exits 64");
    expect(run("solve " + g_dir + "/missing.json").exit_code == 66, "missing file exits 66");
    std::ofstream bad(g_dir + "/bad.json");
    bad << "{\"format\": \"edrelax-case/1\"";
    bad.close();
    expect(run("solve " + g_dir + "/bad.json").exit_code == 65, "malformed case exits 65");
  }

  // the bundled 30-bus scenario round-trips through gen
  {
    const std::string path = g_dir + "/ieee30.json";
    const RunResult r = run("gen ieee30 --out " + path);
    expect(r.exit_code == 0, "gen ieee30 exits 0");
    const auto parsed = casekit::load_case_file(path);
    expect(parsed.network_case.network.n_buses == 30 && parsed.network_case.storages.size() == 50,
           "bundled scenario has 30 buses and 50 storages");
  }

  if (failures == 0) {
    std::cout << "cli tests: all passed\n";
    return 0;
  }
  std::cout << "cli tests: " << failures << " failure(s)\n";
  return 1;
}
