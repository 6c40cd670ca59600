#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tsvar/expr.hpp"
#include "tsvar/variational.hpp"

namespace tsvar {

/// Generators of t -> t + eps*tau(t,q), q -> q + eps*xi(t,q), written over
/// the variables t, q1..qn. xi has one expression per state component.
class Transformation {
 public:
  Transformation(Expr tau, std::vector<Expr> xi);
  static Transformation parse(const std::string& tau, const std::vector<std::string>& xi);
  static std::vector<std::string> variable_names(std::size_t n);

  std::size_t dim() const { return xi_.size(); }
  const Expr& tau() const { return tau_; }
  const std::vector<Expr>& xi() const { return xi_; }

  /// tau(t_i, q(t_i)) on q's domain.
  GridFunction tau_along(const GridFunction& q) const;
  /// xi(t_i, q(t_i)) on q's domain.
  GridFunction xi_along(const GridFunction& q) const;

 private:
  Expr tau_;
  std::vector<Expr> xi_;
};

struct NoetherReport {
  double invariance_magnitude = 0;
  GridFunction conserved;
  double conservation_deviation = 0;
};

/// Left-hand side of the invariance condition on T^kappa:
///   d1L tau + d2L.xi^sigma + d3L.xi^Delta + L tau^Delta - (q^Delta.d3L) tau^Delta
Residual invariance_residual(const VariationalProblem& p, const GridFunction& q,
                             const Transformation& tr);

/// d3L.xi + (L - d3L.q^Delta - d1L mu) tau on T^kappa.
GridFunction conserved_quantity(const VariationalProblem& p, const GridFunction& q,
                                const Transformation& tr);

NoetherReport check_conservation(const VariationalProblem& p, const GridFunction& q,
                                 const Transformation& tr);

}  // namespace tsvar
