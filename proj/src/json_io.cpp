#include "tsvar/json_io.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

namespace tsvar {

namespace {

json rows(const GridFunction& f) {
  json out = json::array();
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto row = f.at(i);
    out.push_back(json(std::vector<double>(row.begin(), row.end())));
  }
  return out;
}

std::vector<std::vector<double>> read_rows(const json& j) {
  std::vector<std::vector<double>> out;
  for (const auto& row : j) {
    if (row.is_array()) {
      out.push_back(row.get<std::vector<double>>());
    } else {
      out.push_back({row.get<double>()});
    }
  }
  return out;
}

std::vector<double> read_vector(const json& j, const char* what) {
  if (j.is_number()) return {j.get<double>()};
  if (j.is_array()) return j.get<std::vector<double>>();
  throw InputError(fmt::format("{} must be a number or an array of numbers", what));
}

template <class F>
auto with_context(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    throw InputError(fmt::format("{}: {}", where, e.what()));
  }
}

}  // namespace

json to_json(const TimeScale& scale) {
  json gaps = json::array();
  for (std::size_t i = 0; i + 1 < scale.size(); ++i) {
    gaps.push_back(scale.gap(i) == GapKind::Scattered ? "S" : "D");
  }
  auto pts = scale.points();
  return json{{"points", std::vector<double>(pts.begin(), pts.end())}, {"gaps", gaps}};
}

TimeScale scale_from_json(const json& j) {
  return with_context("scale", [&] {
    if (!j.is_object()) throw InputError("scale must be an object");
    if (j.contains("uniform")) {
      const auto& u = j.at("uniform");
      return TimeScale::uniform(u.at("a").get<double>(), u.at("b").get<double>(),
                                u.at("h").get<double>());
    }
    if (j.contains("dense")) {
      const auto& d = j.at("dense");
      auto res = d.at("resolution").get<long long>();
      if (res < 0) throw InputError("resolution must be positive");
      return TimeScale::dense_interval(d.at("a").get<double>(), d.at("b").get<double>(),
                                       static_cast<std::size_t>(res));
    }
    auto points = j.at("points").get<std::vector<double>>();
    if (!j.contains("gaps")) return TimeScale::from_points(std::move(points));
    std::vector<GapKind> gaps;
    for (const auto& g : j.at("gaps")) {
      auto s = g.get<std::string>();
      if (s == "S") {
        gaps.push_back(GapKind::Scattered);
      } else if (s == "D") {
        gaps.push_back(GapKind::Dense);
      } else {
        throw InputError(fmt::format("unknown gap kind '{}' (expected S or D)", s));
      }
    }
    return TimeScale::with_gaps(std::move(points), std::move(gaps));
  });
}

json to_json(const Residual& r) {
  json values = json::array();
  for (std::size_t i = 0; i < r.domain.size(); ++i) {
    values.push_back(std::vector<double>(r.values.begin() + static_cast<std::ptrdiff_t>(i * r.dim),
                                         r.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * r.dim)));
  }
  auto pts = r.domain.points();
  return json{{"kind", r.kind},
              {"points", std::vector<double>(pts.begin(), pts.end())},
              {"values", values},
              {"magnitude", r.magnitude},
              {"approximate", r.approximate}};
}

json to_json(const Candidate& c) {
  json values;
  if (c.trajectory.dim() == 1) {
    values = c.trajectory.values();
  } else {
    values = rows(c.trajectory);
  }
  return json{{"slopes", c.slopes},          {"values", values},
              {"action", c.action},          {"first_el", c.first_el},
              {"second_el", c.second_el},    {"provenance", to_string(c.provenance)}};
}

json to_json(const NoetherReport& r) {
  return json{{"invariance", r.invariance_magnitude},
              {"conserved", r.conserved.values()},
              {"deviation", r.conservation_deviation}};
}

ResidualRecord residual_from_json(const json& j) {
  return with_context("residual report", [&] {
    return ResidualRecord{j.at("kind").get<std::string>(), j.at("points").get<std::vector<double>>(),
                          read_rows(j.at("values")), j.at("magnitude").get<double>(),
                          j.at("approximate").get<bool>()};
  });
}

CandidateRecord candidate_from_json(const json& j) {
  return with_context("candidate", [&] {
    return CandidateRecord{j.at("slopes").get<std::vector<double>>(), read_rows(j.at("values")),
                           j.at("action").get<double>(),  j.at("first_el").get<double>(),
                           j.at("second_el").get<double>(), j.at("provenance").get<std::string>()};
  });
}

NoetherRecord noether_from_json(const json& j) {
  return with_context("noether report", [&] {
    return NoetherRecord{j.at("invariance").get<double>(), j.at("conserved").get<std::vector<double>>(),
                         j.at("deviation").get<double>()};
  });
}

GridFunction trajectory_from_slopes(const VariationalProblem& p,
                                    const std::vector<std::vector<double>>& slopes) {
  const auto& s = p.scale;
  const auto n = p.dim();
  if (slopes.size() + 1 != s.size()) {
    throw InputError(fmt::format("expected {} slopes, got {}", s.size() - 1, slopes.size()));
  }
  std::vector<double> q(s.size() * n);
  for (std::size_t k = 0; k < n; ++k) q[k] = p.q_a[k];
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (slopes[i].size() != n) throw InputError(fmt::format("slope {} must have {} components", i, n));
    double width = s.time(i + 1) - s.time(i);
    for (std::size_t k = 0; k < n; ++k) q[(i + 1) * n + k] = q[i * n + k] + slopes[i][k] * width;
  }
  auto last = (s.size() - 1) * n;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(q[last + k] - p.q_b[k]) > 1e-9) {
      throw InputError(fmt::format("slopes reach q(b)[{}] = {} instead of q_b = {}", k, q[last + k], p.q_b[k]));
    }
    q[last + k] = p.q_b[k];
  }
  return GridFunction(s, n, std::move(q));
}

ProblemFile problem_from_json(const json& j) {
  if (!j.is_object()) throw InputError("problem file must be a JSON object");
  if (j.contains("schema") && j.at("schema") != kSchemaVersion) {
    throw InputError(fmt::format("unsupported schema {} (expected {})", j.at("schema").dump(), kSchemaVersion));
  }
  if (!j.contains("scale")) throw InputError("problem file has no \"scale\"");
  if (!j.contains("lagrangian")) throw InputError("problem file has no \"lagrangian\"");
  auto scale = scale_from_json(j.at("scale"));
  auto q_a = with_context("q_a", [&] { return read_vector(j.at("q_a"), "q_a"); });
  auto q_b = with_context("q_b", [&] { return read_vector(j.at("q_b"), "q_b"); });
  auto n = with_context("n", [&] {
    return j.contains("n") ? j.at("n").get<std::size_t>() : q_a.size();
  });
  auto lagrangian = with_context("lagrangian", [&] {
    return Lagrangian::parse(j.at("lagrangian").get<std::string>(), n);
  });
  auto problem = with_context("problem", [&] {
    return VariationalProblem(scale, lagrangian, q_a, q_b);
  });

  std::optional<GridFunction> trajectory;
  if (j.contains("trajectory")) {
    const auto& t = j.at("trajectory");
    trajectory = with_context("trajectory", [&] {
      if (t.contains("slopes")) return trajectory_from_slopes(problem, read_rows(t.at("slopes")));
      auto values = read_rows(t.at("values"));
      if (values.size() != scale.size()) {
        throw InputError(fmt::format("trajectory has {} points, scale has {}", values.size(), scale.size()));
      }
      std::vector<double> flat;
      for (const auto& row : values) {
        if (row.size() != n) throw InputError(fmt::format("trajectory rows must have {} components", n));
        flat.insert(flat.end(), row.begin(), row.end());
      }
      GridFunction q(scale, n, std::move(flat));
      problem.check_trajectory(q);
      return q;
    });
  }

  std::optional<Transformation> transformation;
  if (j.contains("transformation")) {
    const auto& t = j.at("transformation");
    transformation = with_context("transformation", [&] {
      std::vector<std::string> xi;
      if (t.at("xi").is_string()) {
        xi.push_back(t.at("xi").get<std::string>());
      } else {
        xi = t.at("xi").get<std::vector<std::string>>();
      }
      if (xi.size() != n) throw InputError(fmt::format("xi needs {} components", n));
      return Transformation::parse(t.at("tau").get<std::string>(), xi);
    });
  }

  NewtonOptions opts;
  if (j.contains("solver")) {
    with_context("solver", [&] {
      const auto& s = j.at("solver");
      if (s.contains("tol")) opts.tol = s.at("tol").get<double>();
      if (s.contains("max_iter")) opts.max_iter = s.at("max_iter").get<int>();
      if (s.contains("max_halvings")) opts.max_halvings = s.at("max_halvings").get<int>();
      if (s.contains("fd_step")) opts.fd_step = s.at("fd_step").get<double>();
      opts.validate();
      return 0;
    });
  }
  return ProblemFile{std::move(problem), std::move(trajectory), std::move(transformation), opts};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open {}", path));
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(fmt::format("{}: {}", path, e.what()));
  }
}

ProblemFile load_problem(const std::string& path) { return problem_from_json(read_json_file(path)); }

}  // namespace tsvar
