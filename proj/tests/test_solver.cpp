#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "generators.hpp"
#include "oracles.hpp"
#include "tsvar/solver.hpp"

using namespace tsvar;
using tsvar::testing::Gen;

namespace {

VariationalProblem quartic_problem() {
  return VariationalProblem(TimeScale::uniform(0, 1, 1.0 / 8), Lagrangian::parse("(v1^2 - 1)^2", 1), {0}, {0});
}

std::set<std::vector<double>> slope_set(const CandidateSet& cs) {
  std::set<std::vector<double>> out;
  for (const auto& c : cs) out.insert(c.slopes);
  return out;
}

// Brute force over {-1,0,1}^8 using the hand Hamiltonian H(v) = -(v^2-1)^2 + 4v^2(v^2-1).
struct QuarticCounts {
  int extremals = 0;
  int survivors = 0;
};

QuarticCounts brute_force_quartic() {
  QuarticCounts out;
  std::vector<int> v(8);
  for (int code = 0; code < 6561; ++code) {
    int c = code, sum = 0;
    for (int i = 0; i < 8; ++i) {
      v[static_cast<std::size_t>(i)] = c % 3 - 1;
      c /= 3;
      sum += v[static_cast<std::size_t>(i)];
    }
    if (sum != 0) continue;
    ++out.extremals;
    auto H = [](int s) { return -(s * s - 1) * (s * s - 1) + 4 * s * s * (s * s - 1); };
    bool constant = std::all_of(v.begin(), v.end(), [&](int s) { return H(s) == H(v[0]); });
    if (constant) ++out.survivors;
  }
  return out;
}

}  // namespace

TEST_CASE("options validation and provenance names") {
  NewtonOptions o;
  CHECK_NOTHROW(o.validate());
  o.tol = 0;
  CHECK_THROWS_AS(o.validate(), std::invalid_argument);
  o = NewtonOptions{};
  o.max_iter = 0;
  CHECK_THROWS_AS(o.validate(), std::invalid_argument);

  for (auto p : {Provenance::Newton, Provenance::Enumerated, Provenance::ClosedForm}) {
    CHECK(provenance_from_string(to_string(p)) == p);
  }
  CHECK(std::string(to_string(Provenance::ClosedForm)) == "CLOSED_FORM");
  CHECK_THROWS_AS(provenance_from_string("GUESS"), std::invalid_argument);
}

TEST_CASE("affine extremal from the closed form") {
  VariationalProblem p(TimeScale::uniform(0, 1, 1.0 / 8), Lagrangian::parse("v1^2", 1), {0}, {2});
  auto q = affine_extremal(p);
  for (std::size_t i = 0; i < q.size(); ++i) CHECK(q(i) == doctest::Approx(2 * q.scale().time(i)).epsilon(1e-15));
  CHECK(q(8) == 2.0);

  VariationalProblem shifted(TimeScale::uniform(1, 3, 0.5), Lagrangian::parse("v1^2", 1), {1}, {-3});
  auto r = affine_extremal(shifted);
  // c = -2, k = (3*1 - 1*(-3)) / 2 = 3
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(r(i) == doctest::Approx(-2 * r.scale().time(i) + 3));
}

TEST_CASE("Newton reaches the affine extremal of the quadratic") {
  Gen g(41);
  VariationalProblem p(TimeScale::uniform(0, 1, 1.0 / 8), Lagrangian::parse("v1^2", 1), {0}, {2});
  auto init = g.values(9);
  init.front() = 0;
  init.back() = 2;
  auto res = solve_newton(p, GridFunction::scalar(p.scale, init));
  CHECK(res.iterations <= 2);
  CHECK(res.history.size() == static_cast<std::size_t>(res.iterations) + 1);
  auto affine = affine_extremal(p);
  for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(res.trajectory(i) - affine(i)) <= 1e-12);
}

TEST_CASE("Newton on the quartic lands in the enumerated set") {
  auto p = quartic_problem();
  auto res = solve_newton(p, GridFunction::scalar(p.scale, std::vector<double>(9, 0.0)));
  auto cands = enumerate_slope_extremals(p, {-1, 0, 1}, 1e-8);
  bool member = std::any_of(cands.begin(), cands.end(), [&](const Candidate& c) {
    for (std::size_t i = 0; i < 9; ++i) {
      if (std::abs(c.trajectory(i) - res.trajectory(i)) > 1e-9) return false;
    }
    return true;
  });
  CHECK(member);
}

TEST_CASE("Newton preconditions and failures") {
  VariationalProblem p(TimeScale::uniform(0, 1, 0.25), Lagrangian::parse("v1^2", 1), {0}, {2});
  CHECK_THROWS_AS(solve_newton(p, GridFunction::scalar(p.scale, {0, 0, 0, 0, 0})), BoundaryMismatch);

  VariationalProblem dense(TimeScale::dense_interval(0, 1, 5), Lagrangian::parse("v1^2", 1), {0}, {2});
  CHECK_THROWS_AS(solve_newton(dense, affine_extremal(dense)), std::invalid_argument);

  // L = u has a constant residual and a zero Jacobian
  VariationalProblem flat(TimeScale::uniform(0, 1, 0.25), Lagrangian::parse("u1", 1), {0}, {1});
  try {
    solve_newton(flat, affine_extremal(flat));
    FAIL("expected SingularSystem");
  } catch (const SingularSystem& e) {
    CHECK(e.rcond() < 1e-14);
  }

  VariationalProblem stiff(TimeScale::uniform(0, 1, 0.25), Lagrangian::parse("v1^4 + u1^2", 1), {0}, {3});
  NewtonOptions once;
  once.max_iter = 1;
  try {
    solve_newton(stiff, GridFunction::scalar(stiff.scale, {0, -2, 5, -1, 3}), once);
    FAIL("expected NoConvergence");
  } catch (const NoConvergence& e) {
    CHECK(e.history().size() == 2);
    CHECK(e.last_iterate()(0) == 0.0);
    CHECK(e.last_iterate()(4) == 3.0);
  }
}

TEST_CASE("slope expansion") {
  auto p = quartic_problem();
  std::vector<double> slopes{1, -1, 0, 0, 0, 0, 1, -1};
  auto q = expand_slopes(p, slopes);
  CHECK(q(1) == 0.125);
  CHECK(q(2) == 0.0);
  CHECK(q(7) == 0.125);
  CHECK_THROWS_AS(expand_slopes(p, std::vector<double>{1, -1}), std::invalid_argument);
}

TEST_CASE("quartic enumeration matches an independent brute force") {
  auto p = quartic_problem();
  auto oracle = brute_force_quartic();
  CHECK(oracle.extremals == 1107);
  CHECK(oracle.survivors == 71);

  auto cands = enumerate_slope_extremals(p, {1, 0, -1}, 1e-8);
  CHECK(cands.size() == static_cast<std::size_t>(oracle.extremals));
  CHECK(std::is_sorted(cands.begin(), cands.end(),
                       [](const Candidate& a, const Candidate& b) { return a.slopes < b.slopes; }));
  auto survivors = filter_second_el(p, cands, 1e-8);
  CHECK(survivors.size() == static_cast<std::size_t>(oracle.survivors));

  const std::vector<double> qtilde{1, -1, 0, 0, 0, 0, 1, -1};
  CHECK(slope_set(cands).count(qtilde) == 1);
  CHECK(slope_set(survivors).count(qtilde) == 0);

  // the null path survives with L = 1 everywhere; the +-1 paths have action 0
  auto kept = slope_set(survivors);
  const std::vector<double> null_path(8, 0.0);
  for (const auto& c : cands) {
    CHECK(c.provenance == Provenance::Enumerated);
    if (c.slopes == null_path) {
      CHECK(kept.count(c.slopes) == 1);
      CHECK(c.action == 1.0);
    } else if (kept.count(c.slopes)) {
      CHECK(c.action == 0.0);
    } else {
      CHECK(c.action > 0.0);
    }
  }
}

TEST_CASE("enumeration guard") {
  VariationalProblem p(TimeScale::uniform(0, 30, 1), Lagrangian::parse("v1^2", 1), {0}, {0});
  CHECK_THROWS_AS(enumerate_slope_extremals(p, {-1, 0, 1}, 1e-8), std::length_error);
  CHECK_THROWS_AS(enumerate_slope_extremals(p, {}, 1e-8), std::invalid_argument);
}

TEST_CASE("property: Newton, closed form and enumeration agree") {
  Gen g(42);
  for (int trial = 0; trial < 50; ++trial) {
    auto s = g.exact_scale(3, 6);
    double c = g.integer(-8, 8) / 4.0;
    double qa = g.integer(-4, 4) / 2.0;
    VariationalProblem p(s, Lagrangian::parse("v1^2", 1), {qa}, {qa + c * (s.back() - s.front())});
    auto affine = affine_extremal(p);
    auto init = g.values(s.size());
    init.front() = p.q_a[0];
    init.back() = p.q_b[0];
    auto newton = solve_newton(p, GridFunction::scalar(s, init)).trajectory;
    auto cands = enumerate_slope_extremals(p, {c - 0.5, c, c + 0.25, c + 1}, 1e-8);
    REQUIRE(cands.size() == 1);
    for (std::size_t i = 0; i < s.size(); ++i) {
      CHECK(std::abs(newton(i) - affine(i)) <= 1e-8);
      CHECK(std::abs(cands[0].trajectory(i) - affine(i)) <= 1e-8);
    }
  }
}

TEST_CASE("property: second-condition filter is sound") {
  auto p = quartic_problem();
  auto cands = enumerate_slope_extremals(p, {-1, 0, 1}, 1e-8);
  auto all = slope_set(cands);
  std::vector<double> tols{1e-12, 1e-8, 1.0, 7.9, 8.1, 100};
  std::set<std::vector<double>> previous;
  for (double tol : tols) {
    auto kept = filter_second_el(p, cands, tol);
    auto keys = slope_set(kept);
    CHECK(std::includes(all.begin(), all.end(), keys.begin(), keys.end()));
    CHECK(slope_set(filter_second_el(p, kept, tol)) == keys);
    CHECK(std::includes(keys.begin(), keys.end(), previous.begin(), previous.end()));
    previous = keys;
  }
  CHECK(previous.size() == cands.size());
}

TEST_CASE("property: minimum action survives the filter") {
  auto p = quartic_problem();
  auto cands = enumerate_slope_extremals(p, {-1, 0, 1}, 1e-8);
  auto kept = filter_second_el(p, cands, 1e-8);
  auto min_action = [](const CandidateSet& cs) {
    double m = INFINITY;
    for (const auto& c : cs) m = std::min(m, c.action);
    return m;
  };
  CHECK(min_action(cands) == 0.0);
  CHECK(min_action(kept) == 0.0);
}

TEST_CASE("property: Newton fixed points ignore the scale of L") {
  Gen g(43);
  for (int trial = 0; trial < 30; ++trial) {
    auto s = g.exact_scale(3, 12);
    double c1 = g.uniform(0, 2), c2 = g.uniform(-2, 2);
    VariationalProblem p(s, Lagrangian::parse(tsvar::testing::convex_lagrangian(c1, c2), 1), {g.uniform(-1, 1)},
                         {g.uniform(-1, 1)});
    auto init = affine_extremal(p);
    auto base = solve_newton(p, init).trajectory;
    auto scaled = solve_newton(p.with_lagrangian(p.lagrangian.scaled(10)), init).trajectory;
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(base(i) - scaled(i)) <= 1e-8);
  }
}
