#include "edrelax/casekit/matpower.hpp"

#include "edrelax/gsf.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <sstream>

namespace edrelax::casekit {

namespace {

[[noreturn]] void fail(int line_no, const std::string& what) {
  std::ostringstream os;
  os << "matpower case: line " << line_no << ": " << what;
  throw MatpowerError(os.str());
}

std::string strip_comment(const std::string& line) {
  const size_t pos = line.find('%');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

bool contains_assign(const std::string& line, const char* name) {
  const size_t pos = line.find(name);
  if (pos == std::string::npos) return false;
  const size_t eq = line.find('=', pos);
  return eq != std::string::npos;
}

/// One numeric matrix row; tolerates a trailing ';' and blank lines.
bool parse_row(const std::string& text, int line_no, std::vector<double>& out) {
  out.clear();
  std::string cleaned = text;
  std::replace(cleaned.begin(), cleaned.end(), ';', ' ');
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  std::istringstream is(cleaned);
  std::string tok;
  while (is >> tok) {
    try {
      size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) fail(line_no, "unexpected token '" + tok + "'");
      out.push_back(v);
    } catch (const std::invalid_argument&) {
      fail(line_no, "unexpected token '" + tok + "'");
    } catch (const std::out_of_range&) {
      fail(line_no, "number out of range '" + tok + "'");
    }
  }
  return !out.empty();
}

struct Matrix {
  std::vector<std::vector<double>> rows;
  int first_line = 0;
};

}  // namespace

MatpowerCase parse_matpower_subset(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  double base_mva = 100.0;
  bool saw_base = false;
  std::map<std::string, Matrix> matrices;

  std::string collecting;  // matrix currently being read
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = strip_comment(raw);
    if (!collecting.empty()) {
      const size_t close = line.find(']');
      const std::string body = close == std::string::npos ? line : line.substr(0, close);
      std::vector<double> row;
      if (parse_row(body, line_no, row)) matrices[collecting].rows.push_back(std::move(row));
      if (close != std::string::npos) collecting.clear();
      continue;
    }
    for (const char* name : {"mpc.bus", "mpc.branch", "mpc.gen"}) {
      // avoid matching mpc.gencost when scanning for mpc.gen
      if (!contains_assign(line, name)) continue;
      const size_t pos = line.find(name);
      const char next = pos + std::strlen(name) < line.size() ? line[pos + std::strlen(name)] : ' ';
      if (next != ' ' && next != '=' && next != '\t') continue;
      const size_t open = line.find('[');
      if (open == std::string::npos) continue;
      collecting = name;
      matrices[collecting].first_line = line_no;
      const size_t close = line.find(']', open);
      const std::string body =
          close == std::string::npos ? line.substr(open + 1) : line.substr(open + 1, close - open - 1);
      std::vector<double> row;
      if (parse_row(body, line_no, row)) matrices[collecting].rows.push_back(std::move(row));
      if (close != std::string::npos) collecting.clear();
      break;
    }
    if (contains_assign(line, "mpc.baseMVA")) {
      const size_t eq = line.find('=');
      std::vector<double> row;
      if (!parse_row(line.substr(eq + 1), line_no, row) || row.size() != 1)
        fail(line_no, "cannot read baseMVA");
      base_mva = row[0];
      saw_base = true;
    }
  }

  if (!matrices.count("mpc.bus")) throw MatpowerError("matpower case: missing mpc.bus matrix");
  if (!matrices.count("mpc.branch")) throw MatpowerError("matpower case: missing mpc.branch matrix");

  MatpowerCase out;
  out.base_mva = base_mva;
  (void)saw_base;

  std::map<int, int> bus_index;
  const Matrix& bus = matrices["mpc.bus"];
  for (size_t r = 0; r < bus.rows.size(); ++r) {
    const auto& row = bus.rows[r];
    if (row.size() < 3) fail(bus.first_line + static_cast<int>(r), "bus row needs BUS_I, BUS_TYPE, PD");
    const int id = static_cast<int>(std::llround(row[0]));
    if (bus_index.count(id))
      fail(bus.first_line + static_cast<int>(r), "duplicate bus id " + std::to_string(id));
    bus_index[id] = static_cast<int>(out.bus_ids.size());
    out.bus_ids.push_back(id);
    out.bus_load_mw.push_back(row[2]);
    if (static_cast<int>(std::llround(row[1])) == 3)
      out.network.slack_bus = bus_index[id];
  }
  out.network.n_buses = static_cast<int>(out.bus_ids.size());

  auto lookup = [&](double raw_id, int line) {
    const int id = static_cast<int>(std::llround(raw_id));
    auto it = bus_index.find(id);
    if (it == bus_index.end())
      fail(line, "inconsistent bus numbering: bus " + std::to_string(id) + " not in mpc.bus");
    return it->second;
  };

  const Matrix& branch = matrices["mpc.branch"];
  for (size_t r = 0; r < branch.rows.size(); ++r) {
    const auto& row = branch.rows[r];
    const int line = branch.first_line + static_cast<int>(r);
    if (row.size() < 6) fail(line, "branch row needs F_BUS T_BUS R X B RATE_A");
    Line ln;
    ln.from_bus = lookup(row[0], line);
    ln.to_bus = lookup(row[1], line);
    ln.reactance = row[3];  // p.u. on the system base
    const double rate_a = row[5];
    ln.flow_min = rate_a > 0.0 ? -rate_a : -kInfinity;
    ln.flow_max = rate_a > 0.0 ? rate_a : kInfinity;
    out.network.lines.push_back(ln);
  }

  if (matrices.count("mpc.gen")) {
    const Matrix& gen = matrices["mpc.gen"];
    for (size_t r = 0; r < gen.rows.size(); ++r) {
      const auto& row = gen.rows[r];
      const int line = gen.first_line + static_cast<int>(r);
      if (row.size() < 10) fail(line, "gen row needs at least 10 columns (through PMIN)");
      if (row[7] <= 0.0) continue;  // out of service
      Generator g;
      g.bus = lookup(row[0], line);
      g.p_max = row[8];
      g.p_min = row[9];
      out.generators.push_back(g);
    }
  }

  out.network.gsf = compute_gsf(out.network);
  return out;
}

}  // namespace edrelax::casekit
