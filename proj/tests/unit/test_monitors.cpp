#include <doctest.h>

#include <cmath>

#include "freebound/error.hpp"
#include "freebound/monitors.hpp"

using namespace freebound;

namespace {

DomainPtr ball(int d, double R, double h, bool mirror = false) {
  GridSpec s;
  s.dim = d;
  s.radius = R;
  s.spacing = h;
  for (int a = 0; a < d; ++a) s.mirror[static_cast<std::size_t>(a)] = mirror;
  return make_grid(s);
}

VectorField field(const DomainPtr& g, const std::function<double(const Point&)>& f) {
  VectorField u(g, 1);
  u.set_values([&](const Point& x, std::span<double> v) { v[0] = f(x); });
  u.set_boundary([&](const Point& x, std::span<double> v) { v[0] = f(x); });
  return u;
}

}  // namespace

TEST_CASE("frequency of homogeneous harmonic polynomials equals their degree") {
  // N(r) = r D / H is exactly the degree for homogeneous harmonics.
  for (int d : {2, 3}) {
    const double h = d == 2 ? 1.0 / 64 : 1.0 / 32;
    const auto g = ball(d, 1.0, h);
    const auto lin = frequency(field(g, [](const Point& x) { return x[0] - 0.5 * x[1]; }), Point{}, {0.25, 0.5, 0.75});
    for (double N : lin.N) CHECK(N == doctest::Approx(1.0).epsilon(d == 2 ? 1e-3 : 3e-3));
    const auto quad = frequency(field(g, [](const Point& x) { return x[0] * x[1]; }), Point{}, {0.25, 0.5, 0.75});
    for (double N : quad.N) CHECK(N == doctest::Approx(2.0).epsilon(d == 2 ? 5e-3 : 1e-2));
  }
}

TEST_CASE("frequency pieces match closed forms in the plane") {
  // u = x_1: D = pi r^2, H = int_0^{2pi} r^2 cos^2 r dt = pi r^3.
  const auto g = ball(2, 1.0, 1.0 / 64);
  const auto s = frequency(field(g, [](const Point& x) { return x[0]; }), Point{}, {0.5});
  CHECK(s.D[0] == doctest::Approx(M_PI * 0.25).epsilon(5e-3));
  CHECK(s.H[0] == doctest::Approx(M_PI * 0.125).epsilon(5e-3));
}

TEST_CASE("frequency is invariant under scaling the field") {
  const auto g = ball(2, 1.0, 1.0 / 32);
  auto f = [](const Point& x) { return x[0] * x[0] - x[1] * x[1] + 0.3 * x[0]; };
  const auto a = frequency(field(g, f), Point{}, {0.3, 0.6});
  const auto b = frequency(field(g, [&](const Point& x) { return 7.0 * f(x); }), Point{}, {0.3, 0.6});
  for (std::size_t i = 0; i < 2; ++i) CHECK(a.N[i] == doctest::Approx(b.N[i]).epsilon(1e-12));
}

TEST_CASE("zero traces are flagged rather than divided") {
  const auto g = ball(2, 1.0, 1.0 / 16);
  const auto s = frequency(field(g, [](const Point&) { return 0.0; }), Point{}, {0.5});
  CHECK(s.flagged[0]);
  CHECK(std::isnan(s.N[0]));
}

TEST_CASE("off-centre frequency of a linear field") {
  const auto g = ball(2, 1.0, 1.0 / 64);
  // u = x_1 - 0.2 vanishes at x0 = (0.2, 0); N = 1 for every r.
  const auto s = frequency(field(g, [](const Point& x) { return x[0] - 0.2; }), Point{0.2, 0.0}, {0.25, 0.5});
  for (double N : s.N) CHECK(N == doctest::Approx(1.0).epsilon(2e-3));
}

TEST_CASE("mirrored storage reproduces the full-grid monitors") {
  auto f = [](const Point& x) { return x[0] * (1.0 + x[1] * x[1]); };  // odd in x_1, even in x_2
  const auto full = ball(2, 1.0, 1.0 / 32), half = ball(2, 1.0, 1.0 / 32, true);
  VectorField uh(half, 1);
  uh.set_parity(0, 0, Parity::odd);
  uh.set_values([&](const Point& x, std::span<double> v) { v[0] = f(x); });
  uh.set_boundary([&](const Point& x, std::span<double> v) { v[0] = f(x); });
  const auto a = frequency(field(full, f), Point{}, {0.5});
  const auto b = frequency(uh, Point{}, {0.5});
  CHECK(b.D[0] == doctest::Approx(a.D[0]).epsilon(1e-10));
  CHECK(b.H[0] == doctest::Approx(a.H[0]).epsilon(1e-6));
  CHECK(solid_integral(uh, Point{}, 0.5) == doctest::Approx(solid_integral(field(full, f), Point{}, 0.5)).epsilon(1e-10));
}

TEST_CASE("ACF product of the two-phase linear field") {
  // w = x_1 in d = 2 with k = 1: each phase has int |grad w|^2 = pi r^2 / 2,
  // so r^-4 of the product is (pi/2)^2 for every r.
  const auto g = ball(2, 1.0, 1.0 / 64);
  const auto phi = acf_product(field(g, [](const Point& x) { return x[0]; }), Point{}, {1.0}, {0.25, 0.5, 0.75});
  for (double p : phi) CHECK(p == doctest::Approx(M_PI * M_PI / 4.0).epsilon(1e-2));
  // One phase only: the product vanishes.
  const auto one = acf_product(field(g, [](const Point& x) { return x[0] + 2.0; }), Point{}, {1.0}, {0.5});
  CHECK(one[0] == 0.0);
}

TEST_CASE("ACF phases survive the mirror reduction") {
  auto f = [](const Point& x) { return x[0]; };
  const auto half = ball(2, 1.0, 1.0 / 64, true);
  VectorField uh(half, 1);
  uh.set_parity(0, 0, Parity::odd);
  uh.set_values([&](const Point& x, std::span<double> v) { v[0] = f(x); });
  uh.set_boundary([&](const Point& x, std::span<double> v) { v[0] = f(x); });
  const auto a = acf_product(field(ball(2, 1.0, 1.0 / 64), f), Point{}, {1.0}, {0.5});
  const auto b = acf_product(uh, Point{}, {1.0}, {0.5});
  CHECK(b[0] == doctest::Approx(a[0]).epsilon(1e-8));
}

TEST_CASE("doubling ratio of a constant field is 2^d") {
  for (int d : {2, 3}) {
    const auto g = ball(d, 1.0, 1.0 / 32);
    const auto r = doubling_check(field(g, [](const Point&) { return 1.0; }), Point{}, 0.25, 0.0);
    CHECK(r.ratio == doctest::Approx(std::pow(2.0, d)).epsilon(2e-2));
    CHECK(r.surface_ratio == doctest::Approx(std::pow(2.0, d - 1)).epsilon(1e-2));
    CHECK(r.bound == doctest::Approx(std::pow(2.0, d - 1)));
  }
}

TEST_CASE("monotonicity defect") {
  CHECK(monotonicity_defect({1.0, 2.0, 2.0, 3.0}) == 0.0);
  CHECK(monotonicity_defect({1.0, 3.0, 2.0, 2.5}) == doctest::Approx(1.0));
  CHECK(monotonicity_defect({4.0, 2.0}, 2.0) == doctest::Approx(1.0));
  CHECK(monotonicity_defect({1.0, std::nan(""), 0.5}) == doctest::Approx(0.5));
}

TEST_CASE("monitor inputs are validated") {
  const auto g = ball(2, 1.0, 1.0 / 16, true);
  const VectorField u = field(g, [](const Point&) { return 1.0; });
  CHECK_THROWS_AS(frequency(u, Point{0.1, 0.0}, {0.25}), ValidationError);  // off the mirror planes
  CHECK_THROWS_AS(frequency(u, Point{}, {0.99}), ValidationError);          // leaves the domain
  CHECK_THROWS_AS(acf_product(u, Point{}, {1.0, 2.0}, {0.25}), ValidationError);
}
