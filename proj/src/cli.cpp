#include "tsvar/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "tsvar/json_io.hpp"
#include "tsvar/noether.hpp"
#include "tsvar/solver.hpp"

namespace tsvar::cli {

namespace {

struct Options {
  std::string file;
  std::string json_path;
  std::optional<double> tol;

  std::string enumerate;
  bool filter_second_el = false;

  bool first_el = false;
  bool second_el = false;
  bool erdmann = false;

  int sweep = 0;
  unsigned seed = 42;
  bool solve_first = false;
};

std::string g12(double x) { return fmt::format("{:.12g}", x); }

void write_json(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw InputError(fmt::format("cannot write {}", path));
  f << text;
}

bool probe_pure_quadratic(const VariationalProblem& p) {
  const auto n = p.dim();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> t_dist(p.scale.front(), p.scale.back());
  std::uniform_real_distribution<double> x_dist(-2.0, 2.0);
  auto random_vec = [&] {
    std::vector<double> v(n);
    for (auto& x : v) x = x_dist(rng);
    return v;
  };
  for (int probe = 0; probe < 8; ++probe) {
    auto u = random_vec(), v = random_vec(), w = random_vec();
    std::vector<double> mid(n);
    for (std::size_t k = 0; k < n; ++k) mid[k] = 0.5 * (v[k] + w[k]);
    double t = t_dist(rng);
    auto jv = p.lagrangian.jet(t, u, v);
    auto jw = p.lagrangian.jet(t_dist(rng), random_vec(), w);
    auto jm = p.lagrangian.jet(t_dist(rng), random_vec(), mid);
    double scale = 1.0 + std::abs(jv.value);
    if (std::abs(jv.d_t) > 1e-12 * scale) return false;
    for (std::size_t k = 0; k < n; ++k) {
      if (std::abs(jv.d_u[k]) > 1e-12 * scale) return false;
      double curvature = jv.d_v[k] + jw.d_v[k] - 2 * jm.d_v[k];
      double size = 1.0 + std::abs(jv.d_v[k]) + std::abs(jw.d_v[k]);
      if (std::abs(curvature) > 1e-9 * size) return false;
    }
  }
  return true;
}

/// Numerically probes whether L is quadratic in v with no t or u dependence,
/// in which case the affine trajectory is an extremal.
bool is_pure_quadratic(const VariationalProblem& p) {
  try {
    return probe_pure_quadratic(p);
  } catch (const DomainError&) {
    return false;
  }
}

Candidate solve_problem(const ProblemFile& pf, std::optional<double> tol, int* iterations) {
  const auto& p = pf.problem;
  if (is_pure_quadratic(p)) {
    if (iterations) *iterations = 0;
    return diagnose(p, affine_extremal(p), Provenance::ClosedForm);
  }
  auto opts = pf.solver;
  if (tol) opts.tol = *tol;
  auto result = solve_newton(p, affine_extremal(p), opts);
  if (iterations) *iterations = result.iterations;
  return diagnose(p, result.trajectory, Provenance::Newton);
}

void print_trajectory(std::ostream& out, const GridFunction& q) {
  fmt::print(out, "{:>6} {:>20}", "i", "t");
  for (std::size_t k = 0; k < q.dim(); ++k) fmt::print(out, " {:>20}", fmt::format("q{}", k + 1));
  fmt::print(out, "\n");
  for (std::size_t i = 0; i < q.size(); ++i) {
    fmt::print(out, "{:>6} {:>20}", i, g12(q.scale().time(i)));
    for (std::size_t k = 0; k < q.dim(); ++k) fmt::print(out, " {:>20}", g12(q(i, k)));
    fmt::print(out, "\n");
  }
}

std::vector<double> parse_alphabet(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      double v = std::stod(item, &used);
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw InputError(fmt::format("bad slope '{}' in --enumerate", item));
    }
  }
  if (out.empty()) throw InputError("--enumerate needs at least one slope");
  return out;
}

int cmd_solve(const Options& o, std::ostream& out) {
  auto pf = load_problem(o.file);
  const auto& p = pf.problem;

  if (!o.enumerate.empty()) {
    double tol = o.tol.value_or(default_tolerance(p.scale));
    auto cands = enumerate_slope_extremals(p, parse_alphabet(o.enumerate), tol);
    fmt::print(out, "first-EL extremals: {}\n", cands.size());
    if (o.filter_second_el) {
      cands = filter_second_el(p, cands, tol);
      fmt::print(out, "second-EL survivors: {}\n", cands.size());
    }
    fmt::print(out, "{:>6}  {:<40} {:>20} {:>20} {:>20}\n", "#", "slopes", "action", "first_el",
               "second_el");
    std::string lines;
    for (std::size_t c = 0; c < cands.size(); ++c) {
      std::string slopes;
      for (double s : cands[c].slopes) slopes += (slopes.empty() ? "" : ",") + g12(s);
      fmt::print(out, "{:>6}  {:<40} {:>20} {:>20} {:>20}\n", c, slopes, g12(cands[c].action),
                 g12(cands[c].first_el), g12(cands[c].second_el));
      lines += to_json(cands[c]).dump() + "\n";
    }
    if (!o.json_path.empty()) write_json(o.json_path, lines);
    return kOk;
  }

  int iterations = 0;
  auto c = solve_problem(pf, o.tol, &iterations);
  fmt::print(out, "method: {}", to_string(c.provenance));
  if (c.provenance == Provenance::Newton) fmt::print(out, " ({} iterations)", iterations);
  fmt::print(out, "\n");
  print_trajectory(out, c.trajectory);
  fmt::print(out, "action:    {}\nfirst_el:  {}\nsecond_el: {}\n", g12(c.action), g12(c.first_el),
             g12(c.second_el));
  if (!o.json_path.empty()) write_json(o.json_path, to_json(c).dump() + "\n");
  return kOk;
}

int cmd_verify(const Options& o, std::ostream& out) {
  auto pf = load_problem(o.file);
  if (!pf.trajectory) throw InputError("verify needs a trajectory in the problem file");
  const auto& p = pf.problem;
  const auto& q = *pf.trajectory;
  double tol = o.tol.value_or(default_tolerance(p.scale));

  bool first = o.first_el, second = o.second_el, erdmann = o.erdmann;
  if (!first && !second && !erdmann) first = second = true;

  bool pass = true;
  json reports = json::array();
  json doc = {{"tol", tol}};
  auto line = [&](const char* name, double magnitude, bool approximate) {
    bool ok = magnitude <= tol;
    pass = pass && ok;
    fmt::print(out, "{:<12} {:>20}  {}{}\n", name, g12(magnitude), ok ? "PASS" : "FAIL",
               approximate ? " (approximate)" : "");
  };
  // autonomy is checked before anything is printed
  std::optional<double> erdmann_dev;
  if (erdmann) erdmann_dev = erdmann_deviation(p, q);
  fmt::print(out, "{:<12} {:>20}  {}\n", "check", "magnitude", "result");
  if (first) {
    auto r = first_el_residual(p, q);
    reports.push_back(to_json(r));
    line("first_el", r.magnitude, r.approximate);
  }
  if (second) {
    auto r = second_el_residual(p, q);
    reports.push_back(to_json(r));
    line("second_el", r.magnitude, r.approximate);
  }
  if (erdmann_dev) {
    doc["erdmann"] = *erdmann_dev;
    line("erdmann", *erdmann_dev, !p.scale.exact());
  }
  doc["reports"] = reports;
  doc["pass"] = pass;
  if (!o.json_path.empty()) write_json(o.json_path, doc.dump() + "\n");
  return pass ? kOk : kVerificationFailed;
}

int cmd_noether(const Options& o, std::ostream& out) {
  auto pf = load_problem(o.file);
  if (!pf.transformation) throw InputError("noether needs a \"transformation\" in the problem file");
  const auto& p = pf.problem;
  if (o.sweep < 0) throw InputError("--sweep must be >= 0");

  GridFunction q = [&] {
    if (o.solve_first) return solve_problem(pf, std::nullopt, nullptr).trajectory;
    if (!pf.trajectory) throw InputError("noether needs a trajectory in the file or --solve");
    return *pf.trajectory;
  }();
  double tol = o.tol.value_or(default_tolerance(p.scale));

  auto report = check_conservation(p, q, *pf.transformation);
  double along = report.invariance_magnitude;

  // approximate the "for all q" quantifier with random admissible trajectories
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  auto base = affine_extremal(p);
  for (int k = 0; k < o.sweep; ++k) {
    auto values = base.values();
    for (std::size_t i = p.dim(); i + p.dim() < values.size(); ++i) values[i] += noise(rng);
    GridFunction r(p.scale, p.dim(), std::move(values));
    report.invariance_magnitude =
        std::max(report.invariance_magnitude, invariance_residual(p, r, *pf.transformation).magnitude);
  }

  fmt::print(out, "invariance along trajectory: {}\n", g12(along));
  if (o.sweep > 0) {
    fmt::print(out, "invariance over sweep ({} trajectories): {}\n", o.sweep,
               g12(report.invariance_magnitude));
  }
  fmt::print(out, "{:>6} {:>20} {:>20}\n", "i", "t", "conserved");
  for (std::size_t i = 0; i < report.conserved.size(); ++i) {
    fmt::print(out, "{:>6} {:>20} {:>20}\n", i, g12(report.conserved.scale().time(i)),
               g12(report.conserved(i)));
  }
  fmt::print(out, "deviation: {}\n", g12(report.conservation_deviation));
  if (!o.json_path.empty()) write_json(o.json_path, to_json(report).dump() + "\n");
  bool pass = report.invariance_magnitude <= tol && report.conservation_deviation <= tol;
  fmt::print(out, "{}\n", pass ? "PASS" : "FAIL");
  return pass ? kOk : kVerificationFailed;
}

int cmd_scale_info(const Options& o, std::ostream& out) {
  auto j = read_json_file(o.file);
  auto scale = scale_from_json(j.is_object() && j.contains("scale") ? j.at("scale") : j);
  fmt::print(out, "{} points, {}\n", scale.size(), scale.exact() ? "exact discrete" : "contains dense segments");
  fmt::print(out, "{:>6} {:>20} {:>5} {:>6} {:>6} {:>20}  {}\n", "i", "t", "gap", "sigma", "rho", "mu",
             "class");
  for (std::size_t i = 0; i < scale.size(); ++i) {
    auto c = scale.classify(i);
    std::string label = c.isolated() ? "isolated"
                        : c.dense()  ? "dense"
                                     : fmt::format("{}-{}", c.left_dense ? "left_dense" : "left_scattered",
                                                   c.right_dense ? "right_dense" : "right_scattered");
    std::string gap = i + 1 < scale.size() ? (scale.gap(i) == GapKind::Scattered ? "S" : "D") : "-";
    fmt::print(out, "{:>6} {:>20} {:>5} {:>6} {:>6} {:>20}  {}\n", i, g12(scale.time(i)), gap,
               scale.sigma(i), scale.rho(i), g12(scale.mu(i)), label);
  }
  fmt::print(out, "kappa size: {}\n", scale.kappa().size());
  if (!o.json_path.empty()) write_json(o.json_path, to_json(scale).dump() + "\n");
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Calculus of variations on time scales"};
  app.name("tsvar");
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  double tol_value = 0;
  auto* tol_opt = app.add_option("--tol", tol_value, "Residual tolerance");
  app.add_option("--json", o.json_path, "Write a machine-readable report to this path");

  auto* solve = app.add_subcommand("solve", "Solve for extremals");
  solve->add_option("file", o.file, "Problem file")->required();
  solve->add_option("--enumerate", o.enumerate, "Enumerate slope sequences over this CSV alphabet");
  solve->add_flag("--filter-second-el", o.filter_second_el, "Keep only second-EL survivors");

  auto* verify = app.add_subcommand("verify", "Check necessary conditions along a trajectory");
  verify->add_option("file", o.file, "Problem file")->required();
  verify->add_flag("--first-el", o.first_el, "First Euler-Lagrange equation");
  verify->add_flag("--second-el", o.second_el, "Second Euler-Lagrange equation");
  verify->add_flag("--erdmann", o.erdmann, "Second Erdmann condition (autonomous L)");

  auto* noether = app.add_subcommand("noether", "Invariance and conserved quantity");
  noether->add_option("file", o.file, "Problem file")->required();
  noether->add_option("--sweep", o.sweep, "Random trajectories for the invariance sweep");
  noether->add_option("--seed", o.seed, "Seed for the sweep");
  noether->add_flag("--solve", o.solve_first, "Solve for an extremal first");

  auto* info = app.add_subcommand("scale-info", "Describe a time scale");
  info->add_option("file", o.file, "Problem or scale file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInputError;
  }
  if (tol_opt->count() > 0) {
    if (!(tol_value > 0)) {
      fmt::print(err, "error: --tol must be > 0\n");
      return kInputError;
    }
    o.tol = tol_value;
  }

  try {
    if (solve->parsed()) return cmd_solve(o, out);
    if (verify->parsed()) return cmd_verify(o, out);
    if (noether->parsed()) return cmd_noether(o, out);
    return cmd_scale_info(o, out);
  } catch (const NoConvergence& e) {
    std::string hist;
    for (double h : e.history()) hist += (hist.empty() ? "" : ", ") + fmt::format("{:.3e}", h);
    fmt::print(err, "error: {}\nresidual history: [{}]\n", e.what(), hist);
    return kNumericalFailure;
  } catch (const SingularSystem& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kNumericalFailure;
  } catch (const DomainError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kNumericalFailure;
  } catch (const NonAutonomous& e) {
    fmt::print(err, "error: autonomy violation: {}\n", e.what());
    return kInputError;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kInputError;
  }
}

}  // namespace tsvar::cli
