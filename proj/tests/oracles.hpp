#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "tsvar/timescale.hpp"
#include "tsvar/variational.hpp"

namespace tsvar::testing {

/// L = v^2 + c1 u^2 + c2 t u as parser text.
inline std::string convex_lagrangian(double c1, double c2) {
  return fmt::format("v1^2 + {} * u1^2 + {} * t * u1", c1, c2);
}

/// Extremal of L = v^2 + c1 u^2 + c2 t u on an exact scale, built by marching
/// the discrete Euler-Lagrange recursion forward from q(a) and an initial slope:
///   2 (v_{i+1} - v_i) / mu_i = 2 c1 q_{i+1} + c2 t_i.
inline std::vector<double> marched_extremal(const TimeScale& s, double c1, double c2, double q0, double v0) {
  std::vector<double> q{q0};
  double v = v0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    double mu = s.time(i + 1) - s.time(i);
    q.push_back(q.back() + v * mu);
    v += mu * (c1 * q.back() + 0.5 * c2 * s.time(i));
  }
  return q;
}

/// The Hamiltonian -L + dL/dv v + dL/dt mu written out by hand for
/// L = w(t) v^2 + c1 u^2 with w(t) = t^p, p in {0, 1}.
inline double hand_hamiltonian(double t, double u, double v, double mu, int p, double c1) {
  double w = p == 0 ? 1.0 : t;
  double dw = p == 0 ? 0.0 : 1.0;
  double L = w * v * v + c1 * u * u;
  return -L + 2 * w * v * v + dw * v * v * mu;
}

}  // namespace tsvar::testing
