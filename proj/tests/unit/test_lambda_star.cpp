#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "freebound/error.hpp"
#include "freebound/lambda_star.hpp"

using namespace freebound;

namespace {

LambdaOptions coarse(double R = 2.0, double h = 1.0 / 16) {
  LambdaOptions o;
  o.radius = R;
  o.spacing = h;
  o.golden_iterations = 8;
  return o;
}

}  // namespace

TEST_CASE("analytic lower bounds") {
  CHECK(analytic_lower_bound(reduce(Matrix::identity(2))) == doctest::Approx(2.0));
  CHECK(analytic_lower_bound(reduce(Matrix::identity(3))) == doctest::Approx(4.0));
  CHECK(analytic_lower_bound(reduce(Matrix::identity(4))) == doctest::Approx(9.0));
}

TEST_CASE("rank-one values equal the Frobenius norm") {
  std::mt19937 rng(7);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int t = 0; t < 5; ++t) {
    Matrix u(2 + t % 2, 1), v(1, 3);
    for (double& x : u.data) x = N(rng);
    for (double& x : v.data) x = N(rng);
    const Matrix A = u * v;
    double f = 0.0;
    for (double x : A.data) f += x * x;
    CHECK(rank_one_exact(reduce(A)).value == doctest::Approx(f).epsilon(1e-12));
  }
  CHECK_THROWS_AS(rank_one_exact(reduce(Matrix::identity(2))), ValidationError);
}

TEST_CASE("unit-measure contact sets") {
  const LambdaOptions o = coarse();
  const DomainPtr g = reduced_domain(2, o);
  const std::size_t n = unit_measure_cells(*g);
  // One stored cell has measure h^2 * 4 in the mirrored quadrant.
  CHECK(std::abs(static_cast<double>(n) * g->cell_volume() * g->multiplicity() - 1.0) <= 0.5 * g->cell_volume() * g->multiplicity());
  const ContactMask ball = ellipsoid_contact(g, {1.0, 1.0});
  const ContactMask flat = ellipsoid_contact(g, {3.0, 1.0 / 3.0});
  CHECK(ball.count() == n);
  CHECK(flat.count() == n);
  double xb = 0.0, xf = 0.0;
  for (std::int32_t c : ball.members()) xb = std::max(xb, g->center(c)[0]);
  for (std::int32_t c : flat.members()) xf = std::max(xf, g->center(c)[0]);
  CHECK(xf > 2.0 * xb);
}

TEST_CASE("parametric estimate for Id2 is strictly above |A|^2 and below the ball") {
  LambdaOptions o = coarse();
  const LinearDatum d = reduce(Matrix::identity(2));
  const LambdaStarEstimate e = lambda_star_parametric(d, o);
  o.family = ContactFamily::ball;
  const LambdaStarEstimate b = lambda_star_parametric(d, o);
  CHECK(e.value > 2.0 * 1.01);
  CHECK(e.value <= b.value + 1e-12);
  CHECK(e.contact_measure == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("anisotropic data prefer an elongated contact set") {
  const LinearDatum d = reduce(Matrix::from_rows({{1.0, 0.0}, {0.0, 10.0}}));
  LambdaOptions o = coarse(3.0, 1.0 / 16);
  const LambdaStarEstimate e = lambda_star_parametric(d, o);
  o.family = ContactFamily::ball;
  const LambdaStarEstimate b = lambda_star_parametric(d, o);
  const auto [lo, hi] = std::minmax_element(e.semi_axes.begin(), e.semi_axes.end());
  CHECK(*hi / *lo > 3.0);
  CHECK(e.value < 0.8 * b.value);
}

TEST_CASE("exchange never worsens its start and keeps the cell count") {
  const LambdaOptions o = coarse();
  const LinearDatum d = reduce(Matrix::identity(2));
  const DomainPtr g = reduced_domain(2, o);
  const ContactMask init = ellipsoid_contact(g, {2.0, 0.5});
  const LambdaStarEstimate e = lambda_star_exchange(d, init, 5, o);
  CHECK(e.contact.count() == init.count());
  for (std::size_t i = 1; i < e.history.size(); ++i) CHECK(e.history[i] <= e.history[i - 1] + 1e-12);
  CHECK(e.value <= e.history.front() + 1e-12);
}

TEST_CASE("continuation reports one estimate per radius") {
  const auto es = R_continuation(reduce(Matrix::identity(2)), {1.5, 2.0}, coarse());
  REQUIRE(es.size() == 2);
  CHECK(es[0].R_used == 1.5);
  CHECK(es[1].R_used == 2.0);
  // A larger ball relaxes the outer constraint.
  CHECK(es[1].value < es[0].value);
}

TEST_CASE("cutoff profile is C1") {
  const CutoffProfile p{1.0, 1.1};
  CHECK(p.value(0.5) == 1.0);
  CHECK(p.value(1.0) == 1.0);
  CHECK(p.value(1.1) == doctest::Approx(0.0));
  CHECK(p.slope(1.0) == doctest::Approx(0.0));
  CHECK(p.slope(1.1) == doctest::Approx(0.0));
  const double s = 1.05, e = 1e-6;
  CHECK(p.slope(s) == doctest::Approx((p.value(s + e) - p.value(s - e)) / (2 * e)).epsilon(1e-6));
}

TEST_CASE("cylinder comparator terms") {
  const LambdaOptions o = coarse();
  const LinearDatum d = reduce(Matrix::from_rows({{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}));
  const LambdaStarEstimate e = lambda_star_parametric(d, o);
  const CapacitarySolution s = solve_contact(e.contact.domain_ptr(), e.contact, d, o.solver);
  const CylinderEnergy c = cylinder_comparator(s, 3, 0.5);
  CHECK(c.energy == doctest::Approx(c.bulk_term + c.cross_term).epsilon(1e-12));
  // |{W = Ax}| = |K| inner^m for every delta.
  CHECK(c.contact_measure == doctest::Approx(e.contact_measure).epsilon(1e-12));
  CHECK(c.reduced_quotient == doctest::Approx(e.value).epsilon(1e-9));
  CHECK(c.quotient > e.value);
  // The cross term vanishes like delta^{2/n + 2/m} = delta^3.
  const CylinderEnergy f = cylinder_comparator(s, 3, 0.05);
  CHECK(f.cross_term == doctest::Approx(c.cross_term * 1e-3).epsilon(1e-9));
  CHECK(f.bulk_term == doctest::Approx(c.bulk_term).epsilon(1e-12));
  CHECK_THROWS_AS(cylinder_comparator(s, 2, 0.5), ValidationError);
}
