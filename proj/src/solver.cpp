#include "tsvar/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace tsvar {

void NewtonOptions::validate() const {
  if (!(tol > 0)) throw std::invalid_argument("Newton tol must be > 0");
  if (max_iter < 1) throw std::invalid_argument("Newton max_iter must be >= 1");
  if (max_halvings < 0) throw std::invalid_argument("Newton max_halvings must be >= 0");
  if (!(fd_step > 0)) throw std::invalid_argument("Newton fd_step must be > 0");
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::Newton:
      return "NEWTON";
    case Provenance::Enumerated:
      return "ENUMERATED";
    case Provenance::ClosedForm:
      return "CLOSED_FORM";
  }
  return "?";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "NEWTON") return Provenance::Newton;
  if (s == "ENUMERATED") return Provenance::Enumerated;
  if (s == "CLOSED_FORM") return Provenance::ClosedForm;
  throw std::invalid_argument(fmt::format("unknown provenance '{}'", s));
}

Candidate diagnose(const VariationalProblem& p, GridFunction q, Provenance provenance,
                   std::vector<double> slopes) {
  Candidate c{q, std::move(slopes), provenance, 0, 0, 0};
  c.action = action(p, q);
  c.first_el = first_el_residual(p, q).magnitude;
  c.second_el = second_el_residual(p, q).magnitude;
  return c;
}

GridFunction affine_extremal(const VariationalProblem& p) {
  const auto& s = p.scale;
  const auto n = p.dim();
  double a = s.front(), b = s.back();
  std::vector<double> values(s.size() * n);
  for (std::size_t k = 0; k < n; ++k) {
    double c = (p.q_b[k] - p.q_a[k]) / (b - a);
    double offset = (b * p.q_a[k] - a * p.q_b[k]) / (b - a);
    for (std::size_t i = 0; i < s.size(); ++i) values[i * n + k] = c * s.time(i) + offset;
    // the closed form meets the boundary up to rounding; pin it exactly
    values[k] = p.q_a[k];
    values[(s.size() - 1) * n + k] = p.q_b[k];
  }
  return GridFunction(s, n, std::move(values));
}

namespace {

struct InteriorSystem {
  const VariationalProblem& p;
  std::vector<double> frame;  // full trajectory, boundary rows fixed

  std::size_t unknowns() const { return (p.scale.size() - 2) * p.dim(); }

  GridFunction trajectory(const Eigen::VectorXd& x) {
    std::copy(x.data(), x.data() + x.size(), frame.begin() + static_cast<std::ptrdiff_t>(p.dim()));
    return GridFunction(p.scale, p.dim(), frame);
  }

  Eigen::VectorXd residual(const Eigen::VectorXd& x) {
    auto r = first_el_residual(p, trajectory(x));
    return Eigen::Map<const Eigen::VectorXd>(r.values.data(), static_cast<Eigen::Index>(r.values.size()));
  }
};

}  // namespace

NewtonResult solve_newton(const VariationalProblem& p, const GridFunction& q_init,
                          const NewtonOptions& opts) {
  opts.validate();
  if (!p.scale.exact()) throw std::invalid_argument("Newton solve needs an exact discrete scale");
  p.check_trajectory(q_init);

  InteriorSystem sys{p, q_init.values()};
  const auto m = static_cast<Eigen::Index>(sys.unknowns());
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(q_init.values().data() + p.dim(), m);

  std::vector<double> history;
  Eigen::VectorXd r = sys.residual(x);
  for (int iter = 0;; ++iter) {
    double magnitude = r.cwiseAbs().maxCoeff();
    history.push_back(magnitude);
    if (magnitude <= opts.tol) return NewtonResult{sys.trajectory(x), iter, history};
    if (iter == opts.max_iter) {
      throw NoConvergence(fmt::format("no convergence after {} iterations (residual {:.3e})",
                                      opts.max_iter, magnitude),
                          sys.trajectory(x), history);
    }

    Eigen::MatrixXd jac(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      double h = opts.fd_step * std::max(1.0, std::abs(x[j]));
      Eigen::VectorXd xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      jac.col(j) = (sys.residual(xp) - sys.residual(xm)) / (xp[j] - xm[j]);
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
    double rcond = lu.rcond();
    if (!(rcond >= 1e-14)) {
      throw SingularSystem(fmt::format("singular Jacobian (reciprocal condition {:.3e})", rcond), rcond);
    }
    Eigen::VectorXd step = lu.solve(-r);

    double norm = r.norm();
    double lambda = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= opts.max_halvings; ++halving, lambda *= 0.5) {
      Eigen::VectorXd trial = x + lambda * step;
      Eigen::VectorXd trial_r;
      try {
        trial_r = sys.residual(trial);
      } catch (const DomainError&) {
        continue;
      }
      if (trial_r.allFinite() && trial_r.norm() < norm) {
        x = std::move(trial);
        r = std::move(trial_r);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw NoConvergence(
          fmt::format("line search failed at iteration {} (residual {:.3e})", iter + 1, magnitude),
          sys.trajectory(x), history);
    }
  }
}

GridFunction expand_slopes(const VariationalProblem& p, std::span<const double> slopes) {
  if (p.dim() != 1) throw std::invalid_argument("slope lists describe scalar trajectories only");
  const auto& s = p.scale;
  if (slopes.size() + 1 != s.size()) {
    throw std::invalid_argument(fmt::format("expected {} slopes, got {}", s.size() - 1, slopes.size()));
  }
  std::vector<double> q(s.size());
  q[0] = p.q_a[0];
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    double h = s.time(i + 1) - s.time(i);
    q[i + 1] = q[i] + slopes[i] * h;
  }
  return GridFunction::scalar(s, std::move(q));
}

CandidateSet enumerate_slope_extremals(const VariationalProblem& p, std::vector<double> alphabet,
                                       double tol) {
  if (p.dim() != 1) throw std::invalid_argument("slope enumeration needs n = 1");
  if (!p.scale.exact()) throw std::invalid_argument("slope enumeration needs an exact discrete scale");
  std::sort(alphabet.begin(), alphabet.end());
  alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());
  if (alphabet.empty()) throw std::invalid_argument("slope alphabet is empty");

  const auto& s = p.scale;
  const auto gaps = s.size() - 1;
  double count = std::pow(static_cast<double>(alphabet.size()), static_cast<double>(gaps));
  if (count > kEnumerationGuard) {
    throw std::length_error(fmt::format(
        "{} slope sequences exceed the enumeration guard of {:g}; use the Newton solver instead",
        count, kEnumerationGuard));
  }

  std::vector<double> widths(gaps);
  for (std::size_t i = 0; i < gaps; ++i) widths[i] = s.time(i + 1) - s.time(i);
  // remaining[i] = total width of gaps i..end, for reachability pruning
  std::vector<double> remaining(gaps + 1, 0.0);
  for (std::size_t i = gaps; i-- > 0;) remaining[i] = remaining[i + 1] + widths[i];

  const double target = p.q_b[0];
  const double lo_slope = alphabet.front(), hi_slope = alphabet.back();
  constexpr double kReach = 1e-9;

  CandidateSet out;
  std::vector<double> slopes(gaps);
  std::vector<double> q(s.size());
  q[0] = p.q_a[0];

  std::function<void(std::size_t)> descend = [&](std::size_t i) {
    if (i == gaps) {
      if (std::abs(q[gaps] - target) > kReach) return;
      auto values = q;
      values[gaps] = target;
      auto traj = GridFunction::scalar(s, std::move(values));
      auto first = first_el_residual(p, traj).magnitude;
      if (first > tol) return;
      out.push_back(diagnose(p, std::move(traj), Provenance::Enumerated, slopes));
      return;
    }
    double lo = q[i] + lo_slope * remaining[i] - kReach;
    double hi = q[i] + hi_slope * remaining[i] + kReach;
    if (target < lo - 1e-12 * std::abs(lo) || target > hi + 1e-12 * std::abs(hi)) return;
    for (double a : alphabet) {
      slopes[i] = a;
      q[i + 1] = q[i] + a * widths[i];
      descend(i + 1);
    }
  };
  descend(0);
  return out;
}

CandidateSet filter_second_el(const VariationalProblem& p, const CandidateSet& candidates, double tol) {
  CandidateSet out;
  for (const auto& c : candidates) {
    if (second_el_residual(p, c.trajectory).magnitude <= tol) out.push_back(c);
  }
  return out;
}

}  // namespace tsvar
