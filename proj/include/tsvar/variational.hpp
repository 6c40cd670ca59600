#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsvar/expr.hpp"
#include "tsvar/timescale.hpp"

namespace tsvar {

/// L(t, u, v) and its first partials at one point.
struct LagrangianJet {
  double value = 0;
  double d_t = 0;              ///< partial wrt time
  std::vector<double> d_u;     ///< partial wrt the q^sigma slot
  std::vector<double> d_v;     ///< partial wrt the q^Delta slot
};

/// A C^1 Lagrangian L(t, u, v) on R x R^n x R^n written over the variables
/// t, u1..un, v1..vn.
class Lagrangian {
 public:
  Lagrangian(std::size_t n, Expr body);
  static Lagrangian parse(const std::string& text, std::size_t n);
  static std::vector<std::string> variable_names(std::size_t n);

  std::size_t dim() const { return n_; }
  const Expr& body() const { return body_; }

  double value(double t, std::span<const double> u, std::span<const double> v) const;
  /// Value plus the 1 + 2n partials, one forward pass each.
  LagrangianJet jet(double t, std::span<const double> u, std::span<const double> v) const;
  /// alpha * L, sharing the same variables.
  Lagrangian scaled(double alpha) const;

 private:
  std::vector<double> env(double t, std::span<const double> u, std::span<const double> v) const;

  std::size_t n_;
  Expr body_;
};

class BoundaryMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonAutonomous : public std::runtime_error {
 public:
  NonAutonomous(const std::string& message, std::size_t index, double time)
      : std::runtime_error(message), index_(index), time_(time) {}
  std::size_t index() const { return index_; }
  double time() const { return time_; }

 private:
  std::size_t index_;
  double time_;
};

/// Minimise int_a^b L(t, q^sigma, q^Delta) Delta t over trajectories with
/// q(a) = q_a and q(b) = q_b, where [a, b] is the whole scale.
struct VariationalProblem {
  VariationalProblem(TimeScale scale, Lagrangian lagrangian, std::vector<double> q_a,
                     std::vector<double> q_b);

  std::size_t dim() const { return lagrangian.dim(); }
  /// Throws BoundaryMismatch unless q lives on the scale and meets the
  /// boundary values within 1e-12.
  void check_trajectory(const GridFunction& q) const;
  VariationalProblem with_lagrangian(Lagrangian l) const;

  TimeScale scale;
  Lagrangian lagrangian;
  std::vector<double> q_a;
  std::vector<double> q_b;
};

/// Pointwise residual of a necessary condition.
struct Residual {
  std::string kind;
  TimeScale domain;
  std::size_t dim = 1;
  std::vector<double> values;  ///< dim entries per domain point
  double magnitude = 0;        ///< max |value|
  bool approximate = false;

  double at(std::size_t i, std::size_t k = 0) const { return values[i * dim + k]; }
};

Residual make_residual(std::string kind, TimeScale domain, std::size_t dim,
                       std::vector<double> values, bool approximate);

/// L(t, q^sigma(t), q^Delta(t)) and its partials on T^kappa.
struct TrajectoryJets {
  TimeScale domain;
  GridFunction q_sigma;
  GridFunction q_delta;
  std::vector<LagrangianJet> jets;
  bool approximate = false;
};

TrajectoryJets evaluate_along(const VariationalProblem& p, const GridFunction& q);

double action(const VariationalProblem& p, const GridFunction& q);

/// Delta/Delta t d3L - d2L on the kappa^2 prefix.
Residual first_el_residual(const VariationalProblem& p, const GridFunction& q);

/// Per-component spread of d3L(t) - int_a^t d2L over T^kappa. Values are
/// offsets above the per-component minimum, so magnitude is max - min.
Residual first_el_integral_residual(const VariationalProblem& p, const GridFunction& q);

/// -L + d3L.v + d1L mu at (t_i, q^sigma(t_i), q^Delta(t_i)), i in T^kappa.
double hamiltonian(const VariationalProblem& p, const GridFunction& q, std::size_t i);
double hamiltonian(const LagrangianJet& jet, std::span<const double> v, double mu);
GridFunction hamiltonian_along(const VariationalProblem& p, const GridFunction& q);

/// Delta/Delta t H + d1L on the kappa^2 prefix.
Residual second_el_residual(const VariationalProblem& p, const GridFunction& q);

/// max - min over T^kappa of -L + d3L.q^Delta. Throws NonAutonomous if
/// |d1L| > 1e-10 at some trajectory point.
double erdmann_deviation(const VariationalProblem& p, const GridFunction& q);

/// Second Euler-Lagrange residual on an all-dense grid (mu == 0).
Residual classical_check(const VariationalProblem& p_dense, const GridFunction& q);

/// Default extremality tolerance: 1e-8 on exact scales, 10*h on sampled ones.
double default_tolerance(const TimeScale& scale);

}  // namespace tsvar
