#include <doctest.h>

#include <cmath>

#include "freebound/error.hpp"
#include "freebound/radial.hpp"

using namespace freebound;

namespace {

// Simpson on [a, b] with n (even) panels: independent of the library's rule.
template <class F>
double simpson(F f, double a, double b, int n = 4000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

DomainPtr ball(int d, double R, double h, bool mirror = false) {
  GridSpec s;
  s.dim = d;
  s.radius = R;
  s.spacing = h;
  for (int a = 0; a < d; ++a) s.mirror[static_cast<std::size_t>(a)] = mirror;
  return make_grid(s);
}

}  // namespace

TEST_CASE("unit ball volumes") {
  CHECK(unit_ball_volume(1) == doctest::Approx(2.0));
  CHECK(unit_ball_volume(2) == doctest::Approx(M_PI));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * M_PI / 3.0));
  CHECK(unit_ball_volume(4) == doctest::Approx(M_PI * M_PI / 2.0));
}

TEST_CASE("profile energies agree with direct radial quadrature") {
  for (int d : {2, 3, 4}) {
    for (ProfileKind kind : {ProfileKind::capacitary, ProfileKind::dead_core}) {
      const RadialProfile p = kind == ProfileKind::capacitary ? capacitary_profile(d, 0.5) : dead_core_profile(d, 0.5);
      const double area = d * unit_ball_volume(d);
      auto integrand = [&](double r) { return area * std::pow(r, d - 1) * std::pow(p.derivative(r), 2); };
      const double direct = simpson(integrand, 1e-12, 0.5 - 1e-13) + simpson(integrand, 0.5, 1.0);
      CHECK(p.energy() == doctest::Approx(direct).epsilon(1e-8));
      CHECK(p.contact_measure() == doctest::Approx(unit_ball_volume(d) / std::pow(2.0, d)));
    }
  }
}

TEST_CASE("capacitary profile values and total in three dimensions") {
  const RadialProfile p = capacitary_profile(3, 0.5);
  CHECK(p.value(0.25) == doctest::Approx(0.25));
  CHECK(p.value(1.0) == doctest::Approx(0.0).epsilon(1e-14));
  // Harmonic tail (1/r - 1) / 2 matches w = 1/2 at r = 1/2.
  CHECK(p.value(0.75) == doctest::Approx(0.5 * (1.0 / 0.75 - 1.0)));
  CHECK(p.energy() == doctest::Approx(7.0 * M_PI / 6.0));
  CHECK(capacitary_ratio(3, 0.5) == doctest::Approx(p.energy() / p.contact_measure()));
  CHECK(capacitary_ratio(3, 0.5) == doctest::Approx(7.0));
}

TEST_CASE("dead core profile") {
  const RadialProfile p = dead_core_profile(3, 0.5);
  CHECK(p.value(0.3) == 0.0);
  CHECK(p.value(1.0) == doctest::Approx(1.0));
  CHECK(p.value(0.75) == doctest::Approx(2.0 - 1.0 / 0.75));
  CHECK(p.derivative(0.5) == doctest::Approx(4.0));
  CHECK(p.energy() == doctest::Approx(4.0 * M_PI));
  const RadialProfile q = dead_core_profile(2, 0.5);
  CHECK(q.value(0.75) == doctest::Approx(std::log(0.75 / 0.5) / std::log(2.0)));
  CHECK(q.energy() == doctest::Approx(2.0 * M_PI / std::log(2.0)));
  CHECK(p.samples.size() == 257);
}

TEST_CASE("two-dimensional capacitary ratio uses the logarithmic law") {
  for (double r : {0.1, 0.3, 0.5, 0.8}) {
    CHECK(capacitary_ratio(2, r) == doctest::Approx(1.0 + 2.0 / std::abs(std::log(r))));
    const RadialProfile p = capacitary_profile(2, r);
    CHECK(p.energy() / p.contact_measure() == doctest::Approx(capacitary_ratio(2, r)).epsilon(1e-10));
  }
}

TEST_CASE("capacitary ratio increases toward its small-core limit") {
  for (int d : {2, 3, 4}) {
    double prev = 0.0;
    for (double r = 0.05; r < 0.96; r += 0.05) {
      const double q = capacitary_ratio(d, r);
      CHECK(q > prev);
      prev = q;
    }
    // Limit 1 + d(d - 2) for d >= 3; logarithmically slow approach to 1 in d = 2.
    const double limit = 1.0 + d * (d - 2.0);
    CHECK(capacitary_ratio(d, 1e-4) == doctest::Approx(limit).epsilon(d == 2 ? 0.25 : 1e-3));
  }
}

TEST_CASE("annulus energy closed form") {
  // d = 3: 4 pi (v1 - v2)^2 / (1/r1 - 1/r2).
  CHECK(annulus_energy(3, 0.5, 1.0, 1.0, 0.0) == doctest::Approx(4.0 * M_PI));
  CHECK(annulus_energy(2, 0.5, 1.0, 2.0, 0.0) == doctest::Approx(2.0 * M_PI * 4.0 / std::log(2.0)));
  CHECK_THROWS_AS(annulus_energy(3, 1.0, 0.5, 1.0, 0.0), ValidationError);
}

TEST_CASE("reduction with f = |x| and a linear gauge decreases toward the small-core limit") {
  std::vector<double> radii;
  for (double r = 0.05; r < 0.96; r += 0.05) radii.push_back(r);
  const RadialReduction red = reduce_radial(RadialObstacle::norm(), Gauge::linear(), 3, radii);
  for (std::size_t i = 0; i < radii.size(); ++i)
    CHECK(red.ratios[i] == doctest::Approx(capacitary_ratio(3, radii[i])).epsilon(1e-10));
  CHECK(red.best == 0);
  CHECK(red.best_radius == doctest::Approx(0.05));
}

TEST_CASE("reduction with a constant obstacle has an interior optimum") {
  // f = 1, d = 3, R = 1: energy 4 pi rho / (1 - rho), ratio 3 / (rho^2 (1 - rho)),
  // minimal at rho = 2/3 with value 81/4.
  std::vector<double> radii;
  for (int i = 1; i < 300; ++i) radii.push_back(i / 300.0);
  const RadialReduction red = reduce_radial(RadialObstacle::constant(1.0), Gauge::linear(), 3, radii);
  CHECK(red.best_radius == doctest::Approx(2.0 / 3.0).epsilon(0.005));
  CHECK(red.best_ratio == doctest::Approx(20.25).epsilon(1e-6));
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double r = radii[i];
    CHECK(red.ratios[i] == doctest::Approx(3.0 / (r * r * (1.0 - r))).epsilon(1e-10));
  }
}

TEST_CASE("a quadratic gauge moves the optimum of f = |x| into the interior") {
  // g = t^2: ratio ~ rho^{-3} as rho -> 0 and blows up at rho = 1.
  std::vector<double> radii;
  for (int i = 1; i < 100; ++i) radii.push_back(i / 100.0);
  const RadialReduction red = reduce_radial(RadialObstacle::norm(), Gauge::power(2.0), 3, radii);
  CHECK(red.best > 0);
  CHECK(red.best + 1 < radii.size());
  CHECK(red.best_ratio < red.ratios.front());
  CHECK(red.best_ratio < red.ratios.back());
}

TEST_CASE("gauge validation") {
  CHECK_NOTHROW(validate_gauge(Gauge::linear(), 5.0));
  CHECK_NOTHROW(validate_gauge(Gauge::power(1.5), 5.0));
  CHECK_NOTHROW(validate_gauge(Gauge::piecewise_linear({1.0, 2.0}, {1.0, 3.0}), 5.0));
  CHECK_THROWS_AS(validate_gauge(Gauge{[](double t) { return std::sqrt(t); }}, 5.0), ValidationError);
  CHECK_THROWS_AS(validate_gauge(Gauge::piecewise_linear({1.0, 2.0}, {2.0, 3.0}), 5.0), ValidationError);
  CHECK_THROWS_AS(validate_gauge(Gauge{[](double t) { return t + 1.0; }}, 5.0), ValidationError);
  CHECK_THROWS_AS(Gauge::power(0.5), ValidationError);
  CHECK_THROWS_AS(reduce_radial(RadialObstacle::norm(), Gauge{[](double t) { return std::sqrt(t); }}, 3, {0.5}),
                  ValidationError);
}

TEST_CASE("convexity gap is exact and nonnegative on dyadic arguments") {
  const Gauge sq = Gauge::power(2.0);
  for (double eps : {0.5, 0.25, 1.0 / 16})
    for (double sigma : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      // (2 eps s)^2 + (2 eps (1 - s))^2 - 2 eps^2 = 2 eps^2 (2 s^2 + 2 (1 - s)^2 - 1) = 2 eps^2 (2s - 1)^2.
      CHECK(convexity_gap(sq, eps, sigma) == 2.0 * eps * eps * (2.0 * sigma - 1.0) * (2.0 * sigma - 1.0));
      CHECK(convexity_gap(Gauge::linear(), eps, sigma) == 0.0);
    }
}

TEST_CASE("reflection of a field across a coordinate plane") {
  const DomainPtr g = ball(2, 1.0, 1.0 / 16);
  VectorField w(g, 1);
  w.set_values([](const Point& x, std::span<double> v) { v[0] = x[0] * x[0] + 0.5 * x[1]; });
  auto [plus, minus] = reflect_symmetrize(w, Point{0.0, 1.0});
  for (std::size_t i = 0; i < g->size(); ++i) {
    const Point x = g->center(static_cast<std::int32_t>(i));
    CHECK(plus.at(0, i) == doctest::Approx(x[0] * x[0] + 0.5 * std::abs(x[1])));
    CHECK(minus.at(0, i) == doctest::Approx(x[0] * x[0] - 0.5 * std::abs(x[1])));
  }
  // Reversing the normal swaps the halves.
  auto [p2, m2] = reflect_symmetrize(w, Point{0.0, -1.0});
  CHECK(p2 == minus);
  CHECK(m2 == plus);
}

TEST_CASE("reflection on a mirrored axis uses the stored half") {
  const DomainPtr g = ball(2, 1.0, 1.0 / 16, true);
  VectorField w(g, 1);
  w.set_parity(0, 1, Parity::odd);
  w.set_values([](const Point& x, std::span<double> v) { v[0] = x[1] * (1.0 + x[0] * x[0]); });
  auto [plus, minus] = reflect_symmetrize(w, Point{0.0, 1.0});
  for (std::size_t i = 0; i < g->size(); ++i) {
    const Point x = g->center(static_cast<std::int32_t>(i));
    CHECK(plus.at(0, i) == doctest::Approx(x[1] * (1.0 + x[0] * x[0])));
    CHECK(minus.at(0, i) == doctest::Approx(-x[1] * (1.0 + x[0] * x[0])));
  }
  // Multilinear sampling: second-order accurate on the quadratic factor.
  CHECK(plus.sample(0, Point{0.2, -0.3}) == doctest::Approx(0.3 * 1.04).epsilon(2e-3));
}

TEST_CASE("reflection rejects non-coordinate normals") {
  VectorField w(ball(2, 1.0, 1.0 / 8), 1);
  CHECK_THROWS_AS(reflect_symmetrize(w, Point{std::sqrt(0.5), std::sqrt(0.5)}), ValidationError);
}

TEST_CASE("contact ratio of a grid capacitary solution exceeds the radial value only by discretization") {
  // Radial w|x| on the grid: the ratio lies near the closed form.
  const DomainPtr g = ball(3, 1.0, 1.0 / 32, true);
  const RadialProfile p = capacitary_profile(3, 0.5);
  VectorField w(g, 1);
  w.set_values([&](const Point& x, std::span<double> v) { v[0] = p.value(std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])); });
  w.set_boundary([](const Point&, std::span<double> v) { v[0] = 0.0; });
  const double q = contact_ratio(w, RadialObstacle::norm(), Gauge::linear(), 1e-12);
  CHECK(q == doctest::Approx(7.0).epsilon(0.05));
}
