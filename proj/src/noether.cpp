#include "tsvar/noether.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

namespace tsvar {

std::vector<std::string> Transformation::variable_names(std::size_t n) {
  std::vector<std::string> names{"t"};
  for (std::size_t k = 1; k <= n; ++k) names.push_back(fmt::format("q{}", k));
  return names;
}

Transformation::Transformation(Expr tau, std::vector<Expr> xi) : tau_(std::move(tau)), xi_(std::move(xi)) {
  if (xi_.empty()) throw std::invalid_argument("transformation needs at least one xi component");
  auto names = variable_names(xi_.size());
  if (tau_.variables() != names) throw std::invalid_argument("tau must be written over t, q1..qn");
  for (const auto& x : xi_) {
    if (x.variables() != names) throw std::invalid_argument("xi must be written over t, q1..qn");
  }
}

Transformation Transformation::parse(const std::string& tau, const std::vector<std::string>& xi) {
  auto names = variable_names(xi.size());
  std::vector<Expr> xs;
  xs.reserve(xi.size());
  for (const auto& text : xi) xs.push_back(Expr::parse(text, names));
  return Transformation(Expr::parse(tau, names), std::move(xs));
}

namespace {

std::vector<double> state_env(const GridFunction& q, std::size_t i) {
  std::vector<double> env{q.scale().time(i)};
  auto row = q.at(i);
  env.insert(env.end(), row.begin(), row.end());
  return env;
}

void check_dim(const GridFunction& q, const Transformation& tr) {
  if (q.dim() != tr.dim()) {
    throw std::invalid_argument(
        fmt::format("transformation has {} components, trajectory {}", tr.dim(), q.dim()));
  }
}

}  // namespace

GridFunction Transformation::tau_along(const GridFunction& q) const {
  check_dim(q, *this);
  std::vector<double> out(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) out[i] = tau_.eval(state_env(q, i));
  return GridFunction::scalar(q.scale(), std::move(out), q.approximate());
}

GridFunction Transformation::xi_along(const GridFunction& q) const {
  check_dim(q, *this);
  const auto n = dim();
  std::vector<double> out(q.size() * n);
  for (std::size_t i = 0; i < q.size(); ++i) {
    auto env = state_env(q, i);
    for (std::size_t k = 0; k < n; ++k) out[i * n + k] = xi_[k].eval(env);
  }
  return GridFunction(q.scale(), n, std::move(out), q.approximate());
}

Residual invariance_residual(const VariationalProblem& p, const GridFunction& q,
                             const Transformation& tr) {
  auto along = evaluate_along(p, q);
  const auto n = p.dim();
  auto tau = tr.tau_along(q);
  auto xi = tr.xi_along(q);
  auto xi_sigma = xi.shifted();
  auto tau_delta = delta_derivative(tau);
  auto xi_delta = delta_derivative(xi);

  std::vector<double> values(along.domain.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& j = along.jets[i];
    double r = j.d_t * tau(i) + j.value * tau_delta(i);
    for (std::size_t k = 0; k < n; ++k) {
      r += j.d_u[k] * xi_sigma(i, k) + j.d_v[k] * xi_delta(i, k);
      r -= along.q_delta(i, k) * j.d_v[k] * tau_delta(i);
    }
    values[i] = r;
  }
  bool approximate = along.approximate || tau_delta.approximate() || xi_delta.approximate();
  return make_residual("invariance", along.domain, 1, std::move(values), approximate);
}

GridFunction conserved_quantity(const VariationalProblem& p, const GridFunction& q,
                                const Transformation& tr) {
  auto along = evaluate_along(p, q);
  const auto n = p.dim();
  auto tau = tr.tau_along(q);
  auto xi = tr.xi_along(q);

  std::vector<double> values(along.domain.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& j = along.jets[i];
    double bracket = j.value - j.d_t * p.scale.mu(i);
    double c = 0;
    for (std::size_t k = 0; k < n; ++k) {
      c += j.d_v[k] * xi(i, k);
      bracket -= j.d_v[k] * along.q_delta(i, k);
    }
    values[i] = c + bracket * tau(i);
  }
  return GridFunction::scalar(along.domain, std::move(values), along.approximate);
}

NoetherReport check_conservation(const VariationalProblem& p, const GridFunction& q,
                                 const Transformation& tr) {
  auto inv = invariance_residual(p, q, tr);
  auto c = conserved_quantity(p, q, tr);
  auto [lo, hi] = std::minmax_element(c.values().begin(), c.values().end());
  return NoetherReport{inv.magnitude, c, *hi - *lo};
}

}  // namespace tsvar
