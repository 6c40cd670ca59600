#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "tsvar/timescale.hpp"

using namespace tsvar;
using tsvar::testing::close;
using tsvar::testing::Gen;

namespace {

TimeScale mixed_scale() {
  // {0} joined to a sampled continuum [1, 2]
  return TimeScale::with_gaps({0, 1, 1.25, 1.5, 1.75, 2},
                              {GapKind::Scattered, GapKind::Dense, GapKind::Dense, GapKind::Dense,
                               GapKind::Dense});
}

}  // namespace

TEST_CASE("uniform scale construction") {
  auto s = TimeScale::uniform(0, 1, 1.0 / 8);
  REQUIRE(s.size() == 9);
  CHECK(s.time(3) == doctest::Approx(3.0 / 8));
  CHECK(s.back() == 1.0);
  CHECK(s.exact());

  auto z = TimeScale::uniform(0, 3, 1);
  for (std::size_t i = 0; i + 1 < z.size(); ++i) {
    CHECK(z.sigma(i) == i + 1);
    CHECK(z.mu(i) == 1.0);
  }
  CHECK(z.rho(2) == 1);
  CHECK(z.sigma(0) == 1);

  CHECK_THROWS_AS(TimeScale::uniform(0, 1, 0.3), TimeScaleError);
  CHECK_THROWS_AS(TimeScale::uniform(1, 0, 0.1), TimeScaleError);
}

TEST_CASE("from_points validates its input") {
  CHECK_THROWS_AS(TimeScale::from_points({0, 1}), TimeScaleError);
  CHECK_THROWS_AS(TimeScale::from_points({0, 2, 1}), TimeScaleError);
  CHECK_THROWS_AS(TimeScale::from_points({0, 1, 1}), TimeScaleError);
  CHECK_THROWS_AS(TimeScale::with_gaps({0, 1, 2}, {GapKind::Dense}), TimeScaleError);
  CHECK_THROWS_AS(TimeScale::dense_interval(0, 1, 1), TimeScaleError);
  CHECK_THROWS_AS(TimeScale::dense_interval(0, 1, 2), TimeScaleError);
}

TEST_CASE("dense grid has zero graininess") {
  auto d = TimeScale::dense_interval(0, 1, 11);
  CHECK_FALSE(d.exact());
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(d.mu(i) == 0.0);
  CHECK(d.classify(5).dense());
  CHECK(d.kappa().size() == d.size());
  CHECK(d.max_spacing() == doctest::Approx(0.1));
}

TEST_CASE("mixed scale graininess and classification") {
  auto s = mixed_scale();
  CHECK(s.mu(0) == 1.0);
  CHECK(s.mu(1) == 0.0);
  CHECK(s.sigma(1) == 1);
  auto c = s.classify(1);
  CHECK(c.left_scattered());
  CHECK(c.right_dense);
  CHECK_FALSE(c.isolated());
  // rho(min) = min, so the first point counts as left-dense
  CHECK(s.classify(0).left_dense);
  CHECK(s.classify(0).right_scattered());
  CHECK(s.classify(3).dense());
  CHECK(s.kappa().size() == s.size());
}

TEST_CASE("classification of exact scales") {
  auto s = TimeScale::from_points({0, 1, 2, 3});
  CHECK(s.classify(1).isolated());
  CHECK(s.classify(2).isolated());
  CHECK_FALSE(s.classify(2).dense());
}

TEST_CASE("kappa views share storage") {
  auto s = TimeScale::from_points({0, 1, 2, 3});
  auto k = s.kappa();
  REQUIRE(k.size() == 3);
  CHECK(k.back() == 2.0);
  CHECK(k.same_storage(s));
  auto k2 = k.kappa();
  REQUIRE(k2.size() == 2);
  CHECK(k2.back() == 1.0);
  CHECK(k2.parent() == s);
  // sigma of the last kappa point still sees the parent's storage
  CHECK(k.mu(2) == 0.0);
  CHECK(k.storage_time(3) == 3.0);
}

TEST_CASE("index_of matches within a relative tolerance") {
  auto s = TimeScale::uniform(0, 1, 0.1);
  CHECK(s.index_of(0.3) == 3);
  CHECK(s.index_of(0.3 + 1e-14) == 3);
  CHECK_THROWS_AS(s.index_of(0.35), TimeScaleError);
}

TEST_CASE("delta derivative examples") {
  auto s = TimeScale::from_points({0, 1, 2, 3});
  auto f = GridFunction::sample(s, [](double t) { return t * t; });
  auto d = delta_derivative(f);
  REQUIRE(d.size() == 3);
  CHECK(d(0) == 1.0);
  CHECK(d(1) == 3.0);
  CHECK(d(2) == 5.0);
  CHECK_FALSE(d.approximate());

  Gen g(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto sc = g.exact_scale(3, 20);
    double c = g.uniform(-3, 3);
    auto cf = delta_derivative(GridFunction::sample(sc, [c](double) { return c; }));
    auto id = delta_derivative(GridFunction::sample(sc, [](double t) { return t; }));
    for (std::size_t i = 0; i < cf.size(); ++i) {
      CHECK(cf(i) == 0.0);
      CHECK(id(i) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  auto dense = GridFunction::sample(TimeScale::dense_interval(0, 1, 21), [](double t) { return 3 * t; });
  auto dd = delta_derivative(dense);
  CHECK(dd.approximate());
  for (std::size_t i = 0; i < dd.size(); ++i) CHECK(dd(i) == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("delta derivative is componentwise") {
  auto s = TimeScale::from_points({0, 0.5, 2, 2.25});
  GridFunction f(s, 2, {0, 1, 1, 3, 2, 5, 3, 4});
  auto d = delta_derivative(f);
  CHECK(d.dim() == 2);
  CHECK(d(0, 0) == 2.0);
  CHECK(d(0, 1) == 4.0);
  CHECK(d(1, 1) == doctest::Approx(4.0 / 3));
  CHECK(d(2, 1) == -4.0);
}

TEST_CASE("delta integral examples") {
  auto s = TimeScale::from_points({0, 1, 2, 3});
  auto one = GridFunction::sample(s, [](double) { return 1.0; });
  CHECK(delta_integral(one, 0, 3)[0] == 3.0);
  CHECK(delta_integral(one, 2, 2)[0] == 0.0);

  auto q = TimeScale::uniform(0, 1, 0.25);
  auto f = GridFunction::sample(q, [](double t) { return t; });
  CHECK(delta_integral(f, 0, 4)[0] == doctest::Approx(0.375).epsilon(1e-15));

  // trapezoids on dense runs integrate linear functions exactly
  auto d = GridFunction::sample(TimeScale::dense_interval(0, 2, 9), [](double t) { return t; });
  CHECK(delta_integral(d, 0, 8)[0] == doctest::Approx(2.0));
}

TEST_CASE("shifted function is f at sigma") {
  auto s = TimeScale::from_points({0, 1, 3});
  auto f = GridFunction::scalar(s, {5, 6, 7});
  auto fs = f.shifted();
  CHECK(fs(0) == 6.0);
  CHECK(fs(1) == 7.0);
  CHECK(fs(2) == 7.0);
}

TEST_CASE("pushforward examples") {
  auto s = TimeScale::from_points({0, 1, 2, 3});
  auto f = GridFunction::sample(s, [](double t) { return t * t - 1; });

  auto id = pushforward(s, GridFunction::sample(s, [](double t) { return t; }), f);
  CHECK(id.image == s);
  CHECK(id.transported.values() == f.values());

  auto twice = GridFunction::sample(s, [](double t) { return 2 * t; });
  auto pf = pushforward(s, twice, f);
  CHECK(pf.image.time(3) == 6.0);
  CHECK(pf.image.time(1) == 2.0);
  for (std::size_t i = 0; i < pf.nu_delta.size(); ++i) CHECK(pf.nu_delta(i) == 2.0);

  // substitution with f(s) = s, nu(t) = 2t: both sides equal 12
  auto ident = GridFunction::sample(s, [](double t) { return 2 * t; });  // f(nu(t))
  auto sub = pushforward(s, twice, ident);
  std::vector<double> lhs(3);
  for (std::size_t i = 0; i < 3; ++i) lhs[i] = ident(i) * sub.nu_delta(i);
  CHECK(delta_integral(GridFunction::scalar(s.kappa(), lhs), 0, 3)[0] == 12.0);
  CHECK(delta_integral(sub.transported, 0, 3)[0] == 12.0);

  auto bad = GridFunction::scalar(s, {0, 2, 1, 3});
  CHECK_THROWS_AS(pushforward(s, bad, f), TimeScaleError);
}

TEST_CASE("property: sigma and rho") {
  Gen g(11);
  for (int trial = 0; trial < 200; ++trial) {
    auto s = g.exact_scale(3, 50);
    auto last = s.size() - 1;
    CHECK(s.sigma(last) == last);
    CHECK(s.rho(0) == 0);
    CHECK(s.mu(last) == 0.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
      CHECK(s.mu(i) >= 0.0);
      if (i > 0 && i < last) {
        CHECK(s.sigma(s.rho(i)) == i);
        CHECK(s.rho(s.sigma(i)) == i);
        CHECK(s.classify(i).isolated());
      }
    }
  }
}

TEST_CASE("property: simple useful formula and product rule") {
  Gen g(12);
  for (int trial = 0; trial < 200; ++trial) {
    auto s = g.exact_scale(3, 50);
    auto f = g.function(s);
    auto h = g.function(s);
    auto fd = delta_derivative(f);
    auto hd = delta_derivative(h);
    auto fs = f.shifted();
    auto hs = h.shifted();
    std::vector<double> prod(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) prod[i] = f(i) * h(i);
    auto pd = delta_derivative(GridFunction::scalar(s, prod));
    for (std::size_t i = 0; i < fd.size(); ++i) {
      double scale = std::abs(f(i)) + std::abs(s.mu(i) * fd(i));
      CHECK(close(fs(i), f(i) + s.mu(i) * fd(i), 1e-12, scale));
      double form1 = fd(i) * hs(i) + f(i) * hd(i);
      double form2 = fd(i) * h(i) + fs(i) * hd(i);
      double mag = std::abs(fd(i) * hs(i)) + std::abs(f(i) * hd(i)) + std::abs(fs(i) * hd(i));
      CHECK(close(pd(i), form1, 1e-12, mag));
      CHECK(close(pd(i), form2, 1e-12, mag));
    }
  }
}

TEST_CASE("property: fundamental theorem") {
  Gen g(13);
  for (int trial = 0; trial < 200; ++trial) {
    auto s = g.exact_scale(3, 50);
    auto f = g.function(s, 2);
    auto d = delta_derivative(f);
    auto last = s.size() - 1;
    auto integral = delta_integral(d, 0, last);
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(close(integral[k], f(last, k) - f(0, k), 1e-12, 5.0 * s.size()));
    }
    auto anti = delta_antiderivative(f);
    auto back = delta_derivative(anti);
    for (std::size_t i = 0; i < back.size(); ++i) CHECK(close(back(i, 1), f(i, 1), 1e-10));
  }
}

TEST_CASE("property: monotonicity") {
  Gen g(14);
  for (int trial = 0; trial < 200; ++trial) {
    auto s = g.exact_scale(3, 50);
    int mode = trial % 4;  // 0: >0, 1: <0, 2: >=0, 3: <=0
    std::vector<double> v{g.uniform(-1, 1)};
    while (v.size() < s.size()) {
      double step = g.uniform(0.01, 1);
      if (mode >= 2 && g.coin()) step = 0;
      v.push_back(v.back() + ((mode == 1 || mode == 3) ? -step : step));
    }
    auto d = delta_derivative(GridFunction::scalar(s, v));
    bool premise = true;
    for (std::size_t i = 0; i < d.size(); ++i) {
      premise = premise && (mode == 0   ? d(i) > 0
                            : mode == 1 ? d(i) < 0
                            : mode == 2 ? d(i) >= 0
                                        : d(i) <= 0);
    }
    REQUIRE(premise);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      if (mode == 0) CHECK(v[i] < v[i + 1]);
      if (mode == 1) CHECK(v[i] > v[i + 1]);
      if (mode == 2) CHECK(v[i] <= v[i + 1]);
      if (mode == 3) CHECK(v[i] >= v[i + 1]);
    }
  }
}

TEST_CASE("property: chain rule, inverse and substitution") {
  Gen g(15);
  for (int trial = 0; trial < 200; ++trial) {
    auto s = g.exact_scale(3, 50);
    auto nu = GridFunction::scalar(s, g.increasing(s.size()));
    auto composite = g.function(s);  // omega o nu
    auto pf = pushforward(s, nu, composite);

    auto lhs = delta_derivative(composite);
    auto omega_d = delta_derivative(pf.transported);
    auto inverse = GridFunction::scalar(pf.image, std::vector<double>(s.points().begin(), s.points().end()));
    auto inverse_d = delta_derivative(inverse);

    std::vector<double> weighted(lhs.size());
    for (std::size_t i = 0; i < lhs.size(); ++i) {
      double rhs = omega_d(i) * pf.nu_delta(i);
      CHECK(close(lhs(i), rhs, 1e-12, std::abs(omega_d(i) * pf.nu_delta(i))));
      CHECK(close(inverse_d(i) * pf.nu_delta(i), 1.0, 1e-12));
      weighted[i] = composite(i) * pf.nu_delta(i);
    }
    auto last = s.size() - 1;
    double left = delta_integral(GridFunction::scalar(s.kappa(), weighted), 0, last)[0];
    double right = delta_integral(pf.transported, 0, last)[0];
    double mag = 0;
    for (std::size_t i = 0; i < last; ++i) mag += std::abs(weighted[i] * s.mu(i));
    CHECK(close(left, right, 1e-12, mag));
  }
}

TEST_CASE("substitution on dense grids holds to first order") {
  for (std::size_t r : {101u, 201u}) {
    auto s = TimeScale::dense_interval(0, 1, r);
    auto nu = GridFunction::sample(s, [](double t) { return t * t + t; });
    auto f = GridFunction::sample(s, [](double t) { return std::sin(t * t + t); });
    auto pf = pushforward(s, nu, f);
    std::vector<double> w(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) w[i] = f(i) * pf.nu_delta(i);
    double left = delta_integral(GridFunction::scalar(s, w), 0, s.size() - 1)[0];
    double right = delta_integral(pf.transported, 0, s.size() - 1)[0];
    CHECK(std::abs(left - right) <= 10 * s.max_spacing());
  }
}

TEST_CASE("property: dense derivative converges at first order") {
  auto max_error = [](std::size_t r) {
    auto f = GridFunction::sample(TimeScale::dense_interval(0, 1, r), [](double t) { return std::sin(3 * t); });
    auto d = delta_derivative(f);
    double err = 0;
    for (std::size_t i = 1; i + 1 < f.size(); ++i) {
      err = std::max(err, std::abs(d(i) - 3 * std::cos(3 * f.scale().time(i))));
    }
    return err;
  };
  double e1 = max_error(101), e2 = max_error(201), e3 = max_error(401);
  for (double ratio : {e1 / e2, e2 / e3}) {
    CHECK(ratio >= 1.4);
    CHECK(ratio <= 2.6);
  }

  // the terminal point reproduces the forward quotient of the quadratic fit
  auto f = GridFunction::sample(TimeScale::dense_interval(0, 1, 101), [](double t) { return t * t; });
  CHECK(delta_derivative(f)(100) == doctest::Approx(2.01).epsilon(1e-9));
  CHECK(delta_derivative(f)(50) == doctest::Approx(1.01).epsilon(1e-9));
}
