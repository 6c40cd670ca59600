#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsvar/variational.hpp"

namespace tsvar {

struct NewtonOptions {
  double tol = 1e-10;       ///< target first-EL residual magnitude
  int max_iter = 50;
  int max_halvings = 20;    ///< backtracking by factor 1/2
  double fd_step = 1e-7;    ///< relative Jacobian difference step

  void validate() const;
};

struct NewtonResult {
  GridFunction trajectory;
  int iterations = 0;
  std::vector<double> history;  ///< residual magnitude per iterate
};

class SingularSystem : public std::runtime_error {
 public:
  SingularSystem(const std::string& message, double rcond)
      : std::runtime_error(message), rcond_(rcond) {}
  double rcond() const { return rcond_; }

 private:
  double rcond_;
};

class NoConvergence : public std::runtime_error {
 public:
  NoConvergence(const std::string& message, GridFunction last, std::vector<double> history)
      : std::runtime_error(message), last_(std::move(last)), history_(std::move(history)) {}
  const GridFunction& last_iterate() const { return last_; }
  const std::vector<double>& history() const { return history_; }

 private:
  GridFunction last_;
  std::vector<double> history_;
};

enum class Provenance { Newton, Enumerated, ClosedForm };
const char* to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct Candidate {
  GridFunction trajectory;
  std::vector<double> slopes;  ///< empty unless enumerated
  Provenance provenance = Provenance::Enumerated;
  double action = 0;
  double first_el = 0;
  double second_el = 0;
};

using CandidateSet = std::vector<Candidate>;

/// Diagnostics for one trajectory: action and both residual magnitudes.
Candidate diagnose(const VariationalProblem& p, GridFunction q, Provenance provenance,
                   std::vector<double> slopes = {});

/// q(t) = c t + k with c = (q_b - q_a)/(b - a), k = (b q_a - a q_b)/(b - a).
GridFunction affine_extremal(const VariationalProblem& p);

/// Newton on the first-EL residual with the interior values as unknowns.
NewtonResult solve_newton(const VariationalProblem& p, const GridFunction& q_init,
                          const NewtonOptions& opts = {});

/// Trajectory q(t_{i+1}) = q(t_i) + s_i mu(t_i) from q_a (n = 1).
GridFunction expand_slopes(const VariationalProblem& p, std::span<const double> slopes);

inline constexpr double kEnumerationGuard = 1e8;

/// Every slope sequence over `alphabet` that reaches q_b within 1e-9 and has
/// first-EL magnitude <= tol, in lexicographic slope order.
CandidateSet enumerate_slope_extremals(const VariationalProblem& p, std::vector<double> alphabet,
                                       double tol);

/// Candidates whose second-EL magnitude is <= tol, order preserved.
CandidateSet filter_second_el(const VariationalProblem& p, const CandidateSet& candidates,
                              double tol);

}  // namespace tsvar
