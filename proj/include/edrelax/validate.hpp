#pragma once

#include "edrelax/types.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace edrelax {

enum class Severity { error, warning };

struct Violation {
  std::string code;     // machine-readable, e.g. "storage.efficiency.round_trip"
  Severity severity = Severity::error;
  std::string message;  // human-readable, names the offending field
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has_errors() const {
    for (const auto& v : violations)
      if (v.severity == Severity::error) return true;
    return false;
  }
  std::string to_string() const;
};

/// Checks every structural invariant of the case. Never throws; a violated
/// invariant becomes a report entry. Warnings (e.g. the capacity screen) do
/// not block solving.
ValidationReport validate_case(const NetworkCase& c);

/// Thrown by operations that require a valid case.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const ValidationReport& r)
      : std::runtime_error("case validation failed:\n" + r.to_string()), report(r) {}
  ValidationReport report;
};

}  // namespace edrelax
