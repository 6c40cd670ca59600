#include "tsvar/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace tsvar {

std::vector<std::string> Lagrangian::variable_names(std::size_t n) {
  std::vector<std::string> names{"t"};
  for (std::size_t k = 1; k <= n; ++k) names.push_back(fmt::format("u{}", k));
  for (std::size_t k = 1; k <= n; ++k) names.push_back(fmt::format("v{}", k));
  return names;
}

Lagrangian::Lagrangian(std::size_t n, Expr body) : n_(n), body_(std::move(body)) {
  if (n_ == 0) throw std::invalid_argument("Lagrangian dimension must be >= 1");
  if (body_.variables() != variable_names(n_)) {
    throw std::invalid_argument("Lagrangian must be written over t, u1..un, v1..vn");
  }
}

Lagrangian Lagrangian::parse(const std::string& text, std::size_t n) {
  return Lagrangian(n, Expr::parse(text, variable_names(n)));
}

std::vector<double> Lagrangian::env(double t, std::span<const double> u,
                                    std::span<const double> v) const {
  if (u.size() != n_ || v.size() != n_) throw std::invalid_argument("argument dimension mismatch");
  std::vector<double> e;
  e.reserve(1 + 2 * n_);
  e.push_back(t);
  e.insert(e.end(), u.begin(), u.end());
  e.insert(e.end(), v.begin(), v.end());
  return e;
}

double Lagrangian::value(double t, std::span<const double> u, std::span<const double> v) const {
  return body_.eval(env(t, u, v));
}

LagrangianJet Lagrangian::jet(double t, std::span<const double> u, std::span<const double> v) const {
  auto e = env(t, u, v);
  LagrangianJet j;
  std::vector<double> seed(e.size(), 0.0);
  seed[0] = 1.0;
  auto d = body_.directional(e, seed);
  j.value = d.value;
  j.d_t = d.deriv;
  j.d_u.resize(n_);
  j.d_v.resize(n_);
  for (std::size_t k = 0; k < 2 * n_; ++k) {
    std::fill(seed.begin(), seed.end(), 0.0);
    seed[1 + k] = 1.0;
    double dk = body_.directional(e, seed).deriv;
    (k < n_ ? j.d_u[k] : j.d_v[k - n_]) = dk;
  }
  return j;
}

Lagrangian Lagrangian::scaled(double alpha) const {
  return Lagrangian(n_, Expr::constant(alpha, body_.variables()) * body_);
}

VariationalProblem::VariationalProblem(TimeScale scale_, Lagrangian lagrangian_,
                                       std::vector<double> q_a_, std::vector<double> q_b_)
    : scale(std::move(scale_)),
      lagrangian(std::move(lagrangian_)),
      q_a(std::move(q_a_)),
      q_b(std::move(q_b_)) {
  if (scale.size() < 3) throw std::invalid_argument("problem scale needs at least 3 points");
  if (q_a.size() != dim() || q_b.size() != dim()) {
    throw std::invalid_argument(fmt::format("boundary values must have length {}", dim()));
  }
}

VariationalProblem VariationalProblem::with_lagrangian(Lagrangian l) const {
  return VariationalProblem(scale, std::move(l), q_a, q_b);
}

void VariationalProblem::check_trajectory(const GridFunction& q) const {
  if (!(q.scale() == scale)) throw BoundaryMismatch("trajectory is not sampled on the problem scale");
  if (q.dim() != dim()) {
    throw BoundaryMismatch(fmt::format("trajectory dimension {} != {}", q.dim(), dim()));
  }
  auto last = scale.size() - 1;
  for (std::size_t k = 0; k < dim(); ++k) {
    if (std::abs(q(0, k) - q_a[k]) > 1e-12) {
      throw BoundaryMismatch(fmt::format("q(a)[{}] = {} but q_a = {}", k, q(0, k), q_a[k]));
    }
    if (std::abs(q(last, k) - q_b[k]) > 1e-12) {
      throw BoundaryMismatch(fmt::format("q(b)[{}] = {} but q_b = {}", k, q(last, k), q_b[k]));
    }
  }
}

Residual make_residual(std::string kind, TimeScale domain, std::size_t dim,
                       std::vector<double> values, bool approximate) {
  Residual r{std::move(kind), std::move(domain), dim, std::move(values), 0.0, approximate};
  for (double v : r.values) r.magnitude = std::max(r.magnitude, std::abs(v));
  return r;
}

TrajectoryJets evaluate_along(const VariationalProblem& p, const GridFunction& q) {
  p.check_trajectory(q);
  auto domain = p.scale.kappa();
  auto q_delta = delta_derivative(q);
  auto q_sigma = q.shifted().restrict_to(domain);
  std::vector<LagrangianJet> jets;
  jets.reserve(domain.size());
  for (std::size_t i = 0; i < domain.size(); ++i) {
    jets.push_back(p.lagrangian.jet(domain.time(i), q_sigma.at(i), q_delta.at(i)));
  }
  bool approximate = q_delta.approximate();
  return TrajectoryJets{domain, std::move(q_sigma), std::move(q_delta), std::move(jets), approximate};
}

double action(const VariationalProblem& p, const GridFunction& q) {
  auto along = evaluate_along(p, q);
  std::vector<double> integrand(along.jets.size());
  for (std::size_t i = 0; i < integrand.size(); ++i) integrand[i] = along.jets[i].value;
  auto f = GridFunction::scalar(along.domain, std::move(integrand));
  return delta_integral(f, 0, p.scale.size() - 1)[0];
}

Residual first_el_residual(const VariationalProblem& p, const GridFunction& q) {
  auto along = evaluate_along(p, q);
  const auto n = p.dim();
  std::vector<double> momentum;
  momentum.reserve(along.jets.size() * n);
  for (const auto& j : along.jets) momentum.insert(momentum.end(), j.d_v.begin(), j.d_v.end());
  auto d_momentum = delta_derivative(GridFunction(along.domain, n, std::move(momentum), along.approximate));

  const auto& domain = d_momentum.scale();
  std::vector<double> values(domain.size() * n);
  for (std::size_t i = 0; i < domain.size(); ++i) {
    for (std::size_t k = 0; k < n; ++k) values[i * n + k] = d_momentum(i, k) - along.jets[i].d_u[k];
  }
  return make_residual("first_el", domain, n, std::move(values), d_momentum.approximate());
}

Residual first_el_integral_residual(const VariationalProblem& p, const GridFunction& q) {
  auto along = evaluate_along(p, q);
  const auto n = p.dim();
  std::vector<double> force;
  force.reserve(along.jets.size() * n);
  for (const auto& j : along.jets) force.insert(force.end(), j.d_u.begin(), j.d_u.end());
  auto impulse = delta_antiderivative(GridFunction(along.domain, n, std::move(force), along.approximate));

  const auto m = along.domain.size();
  std::vector<double> values(m * n);
  for (std::size_t k = 0; k < n; ++k) {
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      values[i * n + k] = along.jets[i].d_v[k] - impulse(i, k);
      lowest = std::min(lowest, values[i * n + k]);
    }
    for (std::size_t i = 0; i < m; ++i) values[i * n + k] -= lowest;
  }
  return make_residual("first_el_integral", along.domain, n, std::move(values),
                       impulse.approximate());
}

double hamiltonian(const LagrangianJet& jet, std::span<const double> v, double mu) {
  double h = -jet.value + jet.d_t * mu;
  for (std::size_t k = 0; k < v.size(); ++k) h += jet.d_v[k] * v[k];
  return h;
}

GridFunction hamiltonian_along(const VariationalProblem& p, const GridFunction& q) {
  auto along = evaluate_along(p, q);
  std::vector<double> h(along.domain.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    h[i] = hamiltonian(along.jets[i], along.q_delta.at(i), p.scale.mu(i));
  }
  return GridFunction::scalar(along.domain, std::move(h), along.approximate);
}

double hamiltonian(const VariationalProblem& p, const GridFunction& q, std::size_t i) {
  auto h = hamiltonian_along(p, q);
  if (i >= h.size()) throw std::out_of_range(fmt::format("index {} is not a kappa point", i));
  return h(i);
}

Residual second_el_residual(const VariationalProblem& p, const GridFunction& q) {
  auto along = evaluate_along(p, q);
  std::vector<double> h(along.domain.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    h[i] = hamiltonian(along.jets[i], along.q_delta.at(i), p.scale.mu(i));
  }
  auto dh = delta_derivative(GridFunction::scalar(along.domain, std::move(h), along.approximate));
  std::vector<double> values(dh.size());
  for (std::size_t i = 0; i < dh.size(); ++i) values[i] = dh(i) + along.jets[i].d_t;
  return make_residual("second_el", dh.scale(), 1, std::move(values), dh.approximate());
}

double erdmann_deviation(const VariationalProblem& p, const GridFunction& q) {
  auto along = evaluate_along(p, q);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < along.jets.size(); ++i) {
    const auto& j = along.jets[i];
    if (std::abs(j.d_t) > 1e-10) {
      throw NonAutonomous(fmt::format("Lagrangian depends on t: dL/dt = {} at t = {} (index {})",
                                      j.d_t, along.domain.time(i), i),
                          i, along.domain.time(i));
    }
    double e = hamiltonian(j, along.q_delta.at(i), 0.0);
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  return hi - lo;
}

Residual classical_check(const VariationalProblem& p_dense, const GridFunction& q) {
  const auto& s = p_dense.scale;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (s.gap(i) != GapKind::Dense) {
      throw std::invalid_argument("classical_check needs an all-dense sampled interval");
    }
  }
  auto r = second_el_residual(p_dense, q);
  r.kind = "classical";
  r.approximate = true;
  return r;
}

double default_tolerance(const TimeScale& scale) {
  return scale.exact() ? 1e-8 : 10.0 * scale.max_spacing();
}

}  // namespace tsvar
