#pragma once

#include "edrelax/qp/solve.hpp"
#include "edrelax/relax/conditions.hpp"
#include "edrelax/relax/exactness.hpp"
#include "edrelax/relax/lmp.hpp"
#include "edrelax/types.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace edrelax::casekit {

inline constexpr const char* kCaseFormat = "edrelax-case/1";
inline constexpr const char* kSolutionFormat = "edrelax-sol/1";

struct CaseFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParsedCase {
  NetworkCase network_case;
  std::optional<relax::LmpForecast> forecast;
};

/// Parses and validates an edrelax-case/1 document. Scalar storage limits are
/// broadcast to per-step vectors and the GSF matrix is computed from the line
/// reactances. Schema problems throw CaseFormatError naming the JSON path;
/// invariant violations throw ValidationError.
ParsedCase parse_case(const std::string& json_text);

/// Inverse of parse_case: emits every case field (forecast section included
/// when given). parse(serialize(c)) reproduces the case field for field.
std::string serialize_case(const NetworkCase& c,
                           const std::optional<relax::LmpForecast>& forecast = std::nullopt);

ParsedCase load_case_file(const std::string& path);
void save_case_file(const std::string& path, const NetworkCase& c,
                    const std::optional<relax::LmpForecast>& forecast = std::nullopt);

/// Solution round trip: full primal and dual content plus the case
/// fingerprint, so downstream commands can audit a stored solution.
std::string serialize_solution(const qp::DispatchSolution& sol);
qp::DispatchSolution parse_solution(const std::string& json_text);

std::string serialize_condition_report(const relax::ConditionReport& rep);
std::string serialize_exactness_report(const relax::ExactnessReport& rep);

}  // namespace edrelax::casekit
