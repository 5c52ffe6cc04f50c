#include <doctest.h>

#include <cmath>

#include "freebound/error.hpp"
#include "freebound/sweep.hpp"

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

}  // namespace

TEST_CASE("rescaling leaves linear fields invariant") {
  // eps^{-1/d} A (eps^{1/d} x) = A x.
  const auto g = ball(2, 1.0, 1.0 / 16);
  VectorField V(g, 1);
  V.set_values([](const Point& x, std::span<double> v) { v[0] = 2.0 * x[0] - x[1]; });
  const VectorField W = rescale(V, 0.25);
  CHECK(W.domain().spec().radius == doctest::Approx(2.0));
  double err = 0.0;
  for (std::size_t i = 0; i < W.domain().size(); ++i) {
    const Point x = W.domain().center(static_cast<std::int32_t>(i));
    if (x[0] * x[0] + x[1] * x[1] > 1.8 * 1.8) continue;  // stay clear of the sampled rim
    err = std::max(err, std::abs(W.at(0, i) - (2.0 * x[0] - x[1])));
  }
  CHECK(err < 1e-10);
  CHECK(rescale(V, 1.0) == V);
}

TEST_CASE("rescaling a constant divides by the scale") {
  const auto g = ball(3, 1.0, 1.0 / 8);
  VectorField V(g, 1);
  V.set_values([](const Point&, std::span<double> v) { v[0] = 1.0; });
  const VectorField W = rescale(V, 1.0 / 8.0);  // s = 1/2
  CHECK(W.sample(0, Point{0.1, 0.2, -0.3}) == doctest::Approx(2.0));
}

TEST_CASE("Lipschitz norm of a linear field") {
  const auto g = ball(2, 1.0, 1.0 / 16);
  VectorField U(g, 1);
  U.set_values([](const Point& x, std::span<double> v) { v[0] = x[0] - 0.5 * x[1]; });
  CHECK(lipschitz_norm(U, Point{}, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("default eps list halves down to the resolution floor") {
  const auto g = ball(2, 1.0, 1.0 / 32);
  const auto eps = default_eps_list(*g, 0.4, 8);
  REQUIRE(eps.size() >= 3);
  CHECK(eps.front() == 0.4);
  for (std::size_t i = 1; i < eps.size(); ++i) CHECK(eps[i] == doctest::Approx(eps[i - 1] / 2.0));
  const double cell = 1.0 / (32.0 * 32.0);
  CHECK(eps.back() >= 8 * cell);
  CHECK(eps.back() / 2.0 < 8 * cell);
}

TEST_CASE("eps lists are validated") {
  const auto g = ball(2, 1.0, 1.0 / 16);
  const BoundaryDatum A = BoundaryDatum::linear(Matrix::identity(2));
  SweepOptions o;
  o.compute_target = false;
  CHECK_THROWS_AS(run_sweep(g, A, {0.1, 0.2}, o), ValidationError);
  CHECK_THROWS_AS(run_sweep(g, A, {0.1, 1e-5}, o), ValidationError);
  CHECK_THROWS_AS(run_sweep(g, A, {}, o), ValidationError);
}

TEST_CASE("sweep for the planar identity datum") {
  // g = x on the unit disc: the dead set is a small disc around the origin,
  // so its Hausdorff distance to x0 is about sqrt(eps / pi).
  const auto g = ball(2, 1.0, 1.0 / 32, true);
  const Matrix A = Matrix::identity(2);
  SweepOptions o;
  o.compute_target = false;
  o.etas = {0.5, 0.25, 0.125};
  const SweepResult r = run_sweep(g, BoundaryDatum::linear(A), {0.2, 0.1, 0.05}, o, A);
  REQUIRE(r.entries.size() == 3);
  CHECK(r.in_hypothesis);
  CHECK(r.x0[0] == 0.0);
  CHECK(r.harmonic_energy == doctest::Approx(2.0 * M_PI).epsilon(0.02));
  for (const SweepEntry& e : r.entries) {
    CHECK(e.converged);
    CHECK(e.saturated);
    CHECK(e.dead_hausdorff < 2.0 * std::sqrt(e.eps / M_PI));
    // Excess energy equals the energy of h - U (U - h is orthogonal to harmonic variations).
    CHECK(e.quotient * e.eps == doctest::Approx(e.h1_gap).epsilon(1e-6));
    CHECK(e.lip_norm < 3.0);
  }
  CHECK(r.entries[2].quotient < r.entries[0].quotient);
}

TEST_CASE("sweep entries do not depend on the worker count") {
  const auto g = ball(2, 1.0, 1.0 / 16, true);
  const Matrix A = Matrix::identity(2);
  SweepOptions o;
  o.compute_target = false;
  o.etas = {0.5, 0.25};
  o.rescaled_energy = false;
  const SweepResult a = run_sweep(g, BoundaryDatum::linear(A), {0.3, 0.15}, o, A);
  o.workers = 2;
  const SweepResult b = run_sweep(g, BoundaryDatum::linear(A), {0.3, 0.15}, o, A);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a.entries[i].quotient == b.entries[i].quotient);
    CHECK(a.entries[i].dead_cells == b.entries[i].dead_cells);
  }
}
