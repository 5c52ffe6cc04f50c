#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "freebound/error.hpp"
#include "freebound/grid.hpp"

using namespace freebound;

namespace {

// Lattice centres (j + 1/2) h inside the open ball, counted by brute force.
std::size_t brute_ball_count(int d, double R, double h) {
  const int J = static_cast<int>(std::floor(R / h + 0.5 + 1e-9));
  std::size_t n = 0;
  std::vector<int> j(static_cast<std::size_t>(d), -J);
  while (true) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += std::pow((j[static_cast<std::size_t>(a)] + 0.5) * h, 2);
    if (r2 < R * R) ++n;
    int a = 0;
    while (a < d && ++j[static_cast<std::size_t>(a)] == J) j[static_cast<std::size_t>(a++)] = -J;
    if (a == d) break;
  }
  return n;
}

GridSpec ball(int d, double R, double h, bool mirror = false) {
  GridSpec s;
  s.dim = d;
  s.radius = R;
  s.spacing = h;
  s.shape = Shape::ball;
  for (int a = 0; a < d; ++a) s.mirror[static_cast<std::size_t>(a)] = mirror;
  return s;
}

}  // namespace

TEST_CASE("ball cell count matches a brute-force lattice count") {
  for (int d : {2, 3}) {
    const double h = 1.0 / 8;
    const auto g = make_grid(ball(d, 1.0, h));
    CHECK(g->size() == brute_ball_count(d, 1.0, h));
    const auto m = make_grid(ball(d, 1.0, h, true));
    CHECK(m->size() * m->multiplicity() == g->size());
    CHECK(m->measure() == doctest::Approx(g->measure()).epsilon(1e-14));
  }
}

TEST_CASE("neighbor table is symmetric") {
  const auto g = make_grid(ball(3, 1.0, 1.0 / 8, true));
  for (std::size_t i = 0; i < g->size(); ++i) {
    const auto c = static_cast<std::int32_t>(i);
    for (int dir = 0; dir < g->directions(); ++dir) {
      const std::int32_t nb = g->neighbor(c, dir);
      if (nb >= 0) CHECK(g->neighbor(nb, dir ^ 1) == c);
      if (nb == GridDomain::kMirror) CHECK(g->lattice_index(c)[static_cast<std::size_t>(dir / 2)] == 0);
    }
  }
}

TEST_CASE("linear data are reproduced exactly by the harmonic solve") {
  for (BoundaryFit fit : {BoundaryFit::fitted, BoundaryFit::staircase}) {
    GridSpec s = ball(2, 1.0, 1.0 / 16);
    s.fit = fit;
    VectorField u(make_grid(s), 1);
    const auto g = [](const Point& x, std::span<double> v) { v[0] = 0.3 + 2.0 * x[0] - x[1]; };
    u.set_boundary(g);
    solve_harmonic(u);
    double err = 0.0;
    for (std::size_t i = 0; i < u.domain().size(); ++i) {
      const Point x = u.domain().center(static_cast<std::int32_t>(i));
      err = std::max(err, std::abs(u.values(0)[i] - (0.3 + 2.0 * x[0] - x[1])));
    }
    CHECK(err < 1e-8);
  }
}

TEST_CASE("fitted boundary is second-order on a quadratic harmonic") {
  double prev = 0.0;
  for (double h : {1.0 / 16, 1.0 / 32}) {
    VectorField u(make_grid(ball(2, 1.0, h)), 1);
    u.set_boundary([](const Point& x, std::span<double> v) { v[0] = x[0] * x[0] - x[1] * x[1]; });
    solve_harmonic(u);
    double err = 0.0;
    for (std::size_t i = 0; i < u.domain().size(); ++i) {
      const Point x = u.domain().center(static_cast<std::int32_t>(i));
      err = std::max(err, std::abs(u.values(0)[i] - (x[0] * x[0] - x[1] * x[1])));
    }
    CHECK(err < 1e-3);
    if (prev > 0.0) CHECK(err < 0.5 * prev + 1e-12);
    prev = err;
  }
}

TEST_CASE("energy of a linear field approaches |A|^2 |B|") {
  VectorField u(make_grid(ball(2, 1.0, 1.0 / 32)), 2);
  u.set_boundary([](const Point& x, std::span<double> v) { v[0] = x[0]; v[1] = 2.0 * x[1]; });
  solve_harmonic(u);
  CHECK(dirichlet_energy(u) == doctest::Approx(5.0 * M_PI).epsilon(0.02));
}

TEST_CASE("mirror reduction reproduces the full-grid solve") {
  auto run = [](bool mirror) {
    VectorField u(make_grid(ball(2, 1.0, 1.0 / 16, mirror)), 2);
    u.set_parity(0, 0, Parity::odd);
    u.set_parity(1, 1, Parity::odd);
    u.set_boundary([](const Point& x, std::span<double> v) {
      v[0] = x[0] * (1.0 + x[1] * x[1]);
      v[1] = x[1] * x[0] * x[0];
    });
    solve_harmonic(u);
    return std::make_pair(dirichlet_energy(u), u.sample(0, Point{0.3, -0.2}));
  };
  const auto full = run(false), half = run(true);
  CHECK(half.first == doctest::Approx(full.first).epsilon(1e-8));
  CHECK(half.second == doctest::Approx(full.second).epsilon(1e-7));
}

TEST_CASE("the solver reports non-convergence") {
  VectorField u(make_grid(ball(2, 1.0, 1.0 / 16)), 1);
  u.set_boundary([](const Point& x, std::span<double> v) { v[0] = std::exp(x[0]) * std::cos(x[1]); });
  SolverOptions o;
  o.max_iterations = 1;
  CHECK_THROWS_AS(solve_harmonic(u, o), ConvergenceError);
}

TEST_CASE("fixed cells keep their values") {
  const auto g = make_grid(ball(2, 1.0, 1.0 / 16));
  const std::int32_t c = g->locate(LatticeIndex{0, 0});
  const VectorField u = laplace_solve(g, 1, {{c, {1.0}}}, [](const Point&, std::span<double> v) { v[0] = 0.0; });
  CHECK(u.at(0, c) == 1.0);
  for (double v : u.values(0)) CHECK(v <= 1.0 + 1e-12);
}

TEST_CASE("multilinear sampling is exact on linear fields") {
  VectorField u(make_grid(ball(3, 1.0, 1.0 / 8)), 1);
  u.set_values([](const Point& x, std::span<double> v) { v[0] = 1.0 + x[0] - 2.0 * x[1] + 0.5 * x[2]; });
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  for (int i = 0; i < 50; ++i) {
    const Point x{U(rng), U(rng), U(rng)};
    CHECK(u.sample(0, x) == doctest::Approx(1.0 + x[0] - 2.0 * x[1] + 0.5 * x[2]).epsilon(1e-12));
  }
}

TEST_CASE("field dumps round-trip in both formats") {
  GridSpec s = ball(2, 1.0, 1.0 / 8, true);
  VectorField u(make_grid(s), 2);
  u.set_parity(0, 0, Parity::odd);
  u.set_values([](const Point& x, std::span<double> v) { v[0] = std::sin(x[0]) / 3.0; v[1] = x[1] * x[1]; });
  u.set_boundary([](const Point& x, std::span<double> v) { v[0] = x[0]; v[1] = 1.0 / 7.0; });
  u.set_fixed(3, true);
  for (DumpFormat f : {DumpFormat::binary, DumpFormat::csv}) {
    std::stringstream io(std::ios::in | std::ios::out | std::ios::binary);
    write_field(io, u, f);
    const VectorField back = read_field(io);
    CHECK(back == u);
  }
}

TEST_CASE("exterior extension decays like the fundamental solution") {
  // Unit data on |x| = 1, zero on |x| = 4: u = (1/r - 1/4) / (3/4) in d = 3.
  const VectorField u = exterior_harmonic_extension(3, 1.0 / 16, 1, [](const Point&, std::span<double> v) { v[0] = 1.0; },
                                                    1.0, 4.0, {true, true, true});
  const double exact = (1.0 / 2.0 - 0.25) / 0.75;
  CHECK(u.sample(0, Point{2.0, 0.0, 0.0}) == doctest::Approx(exact).epsilon(0.03));
  CHECK_THROWS_AS(exterior_harmonic_extension(3, 1.0 / 16, 1, [](const Point&, std::span<double> v) { v[0] = 1.0; },
                                              1.0, 2.0),
                  ValidationError);
}

TEST_CASE("invalid grid specifications are rejected") {
  CHECK_THROWS_AS(make_grid(2, 1.0, 2.0, Shape::ball), ValidationError);
  CHECK_THROWS_AS(make_grid(0, 1.0, 0.1, Shape::ball), ValidationError);
  GridSpec s = ball(2, 1.0, 0.1);
  s.shape = Shape::annulus;
  s.inner_radius = 1.5;
  CHECK_THROWS_AS(make_grid(s), ValidationError);
}
