#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsvar/noether.hpp"
#include "tsvar/solver.hpp"
#include "tsvar/timescale.hpp"
#include "tsvar/variational.hpp"

namespace tsvar {

using json = nlohmann::json;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kSchemaVersion = "tsvar/1";

// Time scales: {"points":[...], "gaps":["S"|"D",...]}, or the shorthands
// {"uniform":{"a","b","h"}} and {"dense":{"a","b","resolution"}}.
json to_json(const TimeScale& scale);
TimeScale scale_from_json(const json& j);

// {"kind", "points", "values":[[..]..], "magnitude", "approximate"}
json to_json(const Residual& r);

// One candidate per line:
// {"slopes", "values", "action", "first_el", "second_el", "provenance"}
json to_json(const Candidate& c);

// {"invariance", "conserved", "deviation"}
json to_json(const NoetherReport& r);

/// Plain-data view of a residual report read back from JSON.
struct ResidualRecord {
  std::string kind;
  std::vector<double> points;
  std::vector<std::vector<double>> values;
  double magnitude = 0;
  bool approximate = false;
};

struct CandidateRecord {
  std::vector<double> slopes;
  std::vector<std::vector<double>> values;
  double action = 0;
  double first_el = 0;
  double second_el = 0;
  std::string provenance;
};

struct NoetherRecord {
  double invariance = 0;
  std::vector<double> conserved;
  double deviation = 0;
};

ResidualRecord residual_from_json(const json& j);
CandidateRecord candidate_from_json(const json& j);
NoetherRecord noether_from_json(const json& j);

/// Everything a problem file can carry.
struct ProblemFile {
  VariationalProblem problem;
  std::optional<GridFunction> trajectory;
  std::optional<Transformation> transformation;
  NewtonOptions solver;
};

/// Parses the "tsvar/1" problem schema; throws InputError on any defect.
ProblemFile problem_from_json(const json& j);
ProblemFile load_problem(const std::string& path);
json read_json_file(const std::string& path);

/// Expands per-gap slopes from q_a using the gap widths.
GridFunction trajectory_from_slopes(const VariationalProblem& p,
                                    const std::vector<std::vector<double>>& slopes);

}  // namespace tsvar
