#pragma once

#include "edrelax/types.hpp"

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace edrelax::casekit {

struct MatpowerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Network skeleton extracted from the bus/branch/gen matrices of a MATPOWER
/// case file. Bus numbering is remapped to dense 0-based indices in matrix
/// order; the original ids are kept for reference. Cost tables, storage and
/// load profiles are supplied separately by the caller.
struct MatpowerCase {
  double base_mva = 100.0;
  std::vector<int> bus_ids;          // original numbering, index = internal id
  std::vector<double> bus_load_mw;   // PD column snapshot
  Network network;                   // lines + slack, gsf computed
  std::vector<Generator> generators; // bus and output limits only (in-service units)
};

/// Parses the `mpc.baseMVA`, `mpc.bus`, `mpc.branch` and `mpc.gen`
/// assignments of a MATPOWER case text. A zero RATE_A becomes an unbounded
/// flow window. Malformed rows report their line number.
MatpowerCase parse_matpower_subset(std::string_view text);

}  // namespace edrelax::casekit
