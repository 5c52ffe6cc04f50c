#include <doctest.h>

#include <cmath>
#include <random>

#include "freebound/error.hpp"
#include "freebound/penalized.hpp"
#include "freebound/radial.hpp"

using namespace freebound;

namespace {

DomainPtr ball(int d, double R, double h, bool mirror) {
  GridSpec s;
  s.dim = d;
  s.radius = R;
  s.spacing = h;
  for (int a = 0; a < d; ++a) s.mirror[static_cast<std::size_t>(a)] = mirror;
  return make_grid(s);
}

double norm(const Point& x, int d) {
  double s = 0.0;
  for (int a = 0; a < d; ++a) s += x[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)];
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("penalty function examples") {
  CHECK(f_m_eta(1.0, {1.0, 0.5, 0.0}) == 0.0);
  CHECK(f_m_eta(2.0, {1.0, 0.5, 0.0}) == 2.0);
  CHECK(f_m_eta(0.5, {1.0, 0.5, 0.0}) == -0.25);
}

TEST_CASE("penalty bounds hold exactly on dyadic triples") {
  // Dyadic inputs keep every operation exact, so the inequalities are tested
  // without rounding slack.
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> tick(0, 4096), pow2(0, 12);
  for (int i = 0; i < 1000; ++i) {
    double t1 = tick(rng) / 1024.0, t2 = tick(rng) / 1024.0;
    if (t1 > t2) std::swap(t1, t2);
    const PenaltyParams p{(1 + tick(rng)) / 1024.0, std::ldexp(1.0, -pow2(rng)), 0.0};
    const double df = f_m_eta(t2, p) - f_m_eta(t1, p);
    CHECK(f_m_eta(t1, p) >= -p.eta * p.m);
    CHECK(p.eta * (t2 - t1) <= df);
    CHECK(df <= (t2 - t1) / p.eta);
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(validate({4.0, 0.5, 0.0}, M_PI), ValidationError);
  CHECK_THROWS_AS(validate({1.0, 0.0, 0.0}, M_PI), ValidationError);
  CHECK_THROWS_AS(validate({1.0, 1.5, 0.0}, M_PI), ValidationError);
  CHECK_NOTHROW(validate({1.0, 1.0, 0.0}, M_PI));
  const auto g = ball(2, 1.0, 1.0 / 16, false);
  CHECK_THROWS_AS(minimize_penalized(g, BoundaryDatum::constant({1.0}), {4.0, 0.5, 0.0}), ValidationError);
}

TEST_CASE("datum parities") {
  const BoundaryDatum lin = BoundaryDatum::linear(Matrix::identity(2));
  CHECK(lin.reflects(0));
  CHECK(lin.parity[0][0] == Parity::odd);
  CHECK(lin.parity[0][1] == Parity::even);
  const BoundaryDatum mixed = BoundaryDatum::linear(Matrix::from_rows({{1.0, 1.0}}));
  CHECK_FALSE(mixed.reflects(0));
  CHECK(BoundaryDatum::constant({1.0, 2.0}).reflects(1));
}

TEST_CASE("constant datum in d = 2: dead set is a centred near-disc") {
  const auto g = ball(2, 1.0, 1.0 / 32, true);
  const double eps = 0.2;
  const PenalizedResult r = minimize_penalized(g, BoundaryDatum::constant({1.0}), {g->measure() - eps, 1.0 / 64, 0.0});
  const auto& rep = r.report;
  CHECK(rep.converged);
  CHECK(std::abs(rep.support_measure - (g->measure() - eps)) <= g->cell_volume() * g->multiplicity() * 1.0001);
  // Every dead cell lies within a cell diagonal of the disc of area eps.
  const double r_eps = std::sqrt(eps / M_PI);
  for (std::int32_t c : r.dead.members()) CHECK(norm(g->center(c), 2) < r_eps + 2.0 * g->spacing());
  // Invariants of the report.
  CHECK(rep.total == doctest::Approx(rep.energy + rep.penalty).epsilon(1e-12));
  CHECK(rep.total >= rep.lower_bound - 1e-9);
  CHECK(rep.total <= rep.upper_bound + 1e-9);
  for (std::size_t i = 1; i < rep.history.size(); ++i) CHECK(rep.history[i] <= rep.history[i - 1] + 1e-10);
  // Discrete maximum principle.
  for (double v : r.field.values(0)) CHECK(std::abs(v) <= 1.0 + 1e-9);
  for (std::int32_t c : r.dead.members()) CHECK(r.field.at(0, c) == 0.0);
}

TEST_CASE("a seed far from the zero of h reaches the same energy") {
  const auto g = ball(2, 1.0, 1.0 / 16, false);
  const BoundaryDatum datum = BoundaryDatum::constant({1.0});
  const PenaltyParams p{g->measure() - 0.2, 0.125, 0.0};
  const PenalizedResult a = minimize_penalized(g, datum, p);
  const ContactMask seed = nearest_cells(g, a.dead.count(), [](const Point& x) {
    return (x[0] - 0.3) * (x[0] - 0.3) + x[1] * x[1];
  });
  PenalizedOptions o;
  o.seed = &seed;
  o.max_iterations = 400;
  const PenalizedResult b = minimize_penalized(g, datum, p, o);
  CHECK(b.report.total == doctest::Approx(a.report.total).epsilon(0.01));
}

TEST_CASE("flux multiplier on the sampled radial dead core") {
  // u = (r_eps^{-1} - r^{-1}) / (r_eps^{-1} - 1) in d = 3 with r_eps = 1/2: u' = 4 at the interface.
  const auto g = ball(3, 1.0, 1.0 / 32, true);
  const RadialProfile p = dead_core_profile(3, 0.5);
  VectorField u(g, 1);
  ContactMask dead(g);
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double r = norm(g->center(static_cast<std::int32_t>(i)), 3);
    u.values(0)[i] = p.value(r);
    if (r <= 0.5) dead.insert(static_cast<std::int32_t>(i));
  }
  const double L = lambda_flux(u, dead);
  CHECK(L == doctest::Approx(16.0).epsilon(0.10));
  // Quadratic in the field.
  VectorField u2 = u;
  for (double& v : u2.values(0)) v *= 3.0;
  CHECK(lambda_flux(u2, dead) == doctest::Approx(9.0 * L).epsilon(1e-12));
  CHECK(lambda_shape(u, dead) == doctest::Approx(L).epsilon(0.15));
  CHECK_THROWS_AS(lambda_flux(u, ContactMask(g)), ValidationError);
}

TEST_CASE("shape variation vanishes for a harmonic field without free boundary") {
  const auto g = ball(2, 1.0, 1.0 / 32, false);
  VectorField u(g, 1);
  u.set_boundary([](const Point& x, std::span<double> v) { v[0] = x[0] * x[0] - x[1] * x[1] + x[1]; });
  solve_harmonic(u);
  const Deformation xi = Deformation::localized_dilation(Point{0.1, 0.0}, 0.3, 0.6, 2);
  const double dF = shape_variation(u, ContactMask(g), xi);
  // Compare with the size of either quadrature term.
  CHECK(std::abs(dF) < 2e-2 * dirichlet_energy(u));
  CHECK_THROWS_AS(lambda_shape(u, ContactMask(g), &xi), ValidationError);
}

TEST_CASE("saturation search on a small disc") {
  const auto g = ball(2, 1.0, 1.0 / 16, false);
  const SaturationResult s =
      eta_saturation_search(g, BoundaryDatum::linear(Matrix::identity(2)), g->measure() - 0.25, {1.0, 0.5, 0.25, 0.125});
  REQUIRE(s.found);
  bool below = false;
  for (std::size_t i = 0; i < s.etas.size(); ++i) {
    if (s.etas[i] == s.eta_tilde) below = true;
    if (below) CHECK(s.saturated[i]);
  }
  CHECK_THROWS_AS(eta_saturation_search(g, BoundaryDatum::constant({1.0}), 1.0, {0.5, 1.0}), ValidationError);
}
