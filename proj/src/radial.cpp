#include "freebound/radial.hpp"

#include <algorithm>
#include <cmath>

#include "freebound/error.hpp"
#include "quadrature.hpp"

namespace freebound {
namespace {

// Fundamental-solution gap r1^{2-d} - r2^{2-d} (log(r2/r1) in d = 2).
double gap(int d, double r1, double r2) {
  return d == 2 ? std::log(r2 / r1) : std::pow(r1, 2.0 - d) - std::pow(r2, 2.0 - d);
}

// (d-2) for d >= 3, 1 for the log branch: the flux constant of the gap.
double flux_constant(int d) { return d == 2 ? 1.0 : d - 2.0; }

void check_profile_args(int d, double r_eps, double R) {
  require(d >= 2 && d <= kMaxDim, "dimension must be in [2, " + std::to_string(kMaxDim) + "]");
  require(R > 0.0 && r_eps > 0.0 && r_eps < R, "profile needs 0 < r_eps < R");
}

RadialProfile make_profile(int d, double r_eps, double R, ProfileKind kind, int samples) {
  check_profile_args(d, r_eps, R);
  require(samples >= 2, "profile needs at least two samples");
  RadialProfile p;
  p.dim = d;
  p.r_eps = r_eps;
  p.R = R;
  p.kind = kind;
  for (int i = 0; i < samples; ++i) {
    const double r = R * i / (samples - 1);
    p.samples.emplace_back(r, p.value(r));
  }
  return p;
}

}  // namespace

double unit_ball_volume(int d) { return quad::unit_ball_volume(d); }

double annulus_energy(int d, double r1, double r2, double v1, double v2) {
  require(d >= 2, "annulus energy needs d >= 2");
  require(0.0 < r1 && r1 < r2, "annulus needs 0 < r1 < r2");
  return d * unit_ball_volume(d) * flux_constant(d) * (v1 - v2) * (v1 - v2) / gap(d, r1, r2);
}

double RadialProfile::value(double r) const {
  const double G = gap(dim, r_eps, R);
  if (kind == ProfileKind::capacitary) {
    if (r <= r_eps) return r;
    return r_eps * gap(dim, r, R) / G;
  }
  if (r <= r_eps) return 0.0;
  return gap(dim, r_eps, r) / G;
}

double RadialProfile::derivative(double r) const {
  const double G = gap(dim, r_eps, R);
  const double dgap = flux_constant(dim) * std::pow(r, 1.0 - dim);  // -d/dr gap(d, r, R)
  if (kind == ProfileKind::capacitary) return r < r_eps ? 1.0 : -r_eps * dgap / G;
  return r < r_eps ? 0.0 : dgap / G;
}

double RadialProfile::energy() const {
  const double outer = kind == ProfileKind::capacitary ? annulus_energy(dim, r_eps, R, r_eps, 0.0)
                                                       : annulus_energy(dim, r_eps, R, 0.0, 1.0);
  return (kind == ProfileKind::capacitary ? contact_measure() : 0.0) + outer;
}

double RadialProfile::contact_measure() const { return unit_ball_volume(dim) * std::pow(r_eps, dim); }

RadialProfile capacitary_profile(int d, double r_eps, double R, int samples) {
  return make_profile(d, r_eps, R, ProfileKind::capacitary, samples);
}

RadialProfile dead_core_profile(int d, double r_eps, double R, int samples) {
  return make_profile(d, r_eps, R, ProfileKind::dead_core, samples);
}

double capacitary_ratio(int d, double r_eps) {
  check_profile_args(d, r_eps, 1.0);
  if (d == 2) return 1.0 + 2.0 / std::abs(std::log(r_eps));
  return 1.0 + d * (d - 2.0) / (1.0 - std::pow(r_eps, d - 2.0));
}

RadialObstacle RadialObstacle::norm() {
  return {[](double r) { return r; }, [](double) { return 1.0; }};
}

RadialObstacle RadialObstacle::constant(double c) {
  return {[c](double) { return c; }, [](double) { return 0.0; }};
}

Gauge Gauge::linear() {
  return {[](double t) { return t; }};
}

Gauge Gauge::power(double p) {
  require(p >= 1.0, "power gauge needs p >= 1 for convexity");
  return {[p](double t) { return std::pow(t, p); }};
}

Gauge Gauge::piecewise_linear(std::vector<double> knots, std::vector<double> values) {
  require(!knots.empty() && knots.size() == values.size(), "gauge needs matching nonempty knots and values");
  for (std::size_t i = 0; i < knots.size(); ++i)
    require(knots[i] > (i == 0 ? 0.0 : knots[i - 1]), "gauge knots must be positive and increasing");
  knots.insert(knots.begin(), 0.0);
  values.insert(values.begin(), 0.0);
  return {[knots, values](double t) {
    // Segment containing t; the last one extends to the right.
    std::size_t i = static_cast<std::size_t>(std::upper_bound(knots.begin(), knots.end(), t) - knots.begin());
    i = std::clamp<std::size_t>(i, 1, knots.size() - 1);
    const double slope = (values[i] - values[i - 1]) / (knots[i] - knots[i - 1]);
    return values[i - 1] + (t - knots[i - 1]) * slope;
  }};
}

void validate_gauge(const Gauge& g, double t_max, int samples, double tol) {
  require(static_cast<bool>(g.value), "gauge is empty");
  require(t_max > 0.0 && samples >= 3, "gauge validation needs t_max > 0 and at least 3 samples");
  require(g.value(0.0) == 0.0, "gauge must vanish at 0");
  std::vector<double> v(static_cast<std::size_t>(samples));
  double scale = 0.0;
  for (int i = 0; i < samples; ++i) {
    v[static_cast<std::size_t>(i)] = g.value(t_max * i / (samples - 1));
    scale = std::max(scale, std::abs(v[static_cast<std::size_t>(i)]));
  }
  for (int i = 1; i < samples; ++i) require(v[static_cast<std::size_t>(i)] > 0.0, "gauge must be positive on (0, t_max]");
  for (std::size_t i = 1; i + 1 < v.size(); ++i)
    require(v[i - 1] - 2.0 * v[i] + v[i + 1] >= -tol * scale, "gauge violates convexity");
}

double convexity_gap(const Gauge& g, double eps, double sigma) {
  return g.value(2.0 * eps * sigma) + g.value(2.0 * eps * (1.0 - sigma)) - 2.0 * g.value(eps);
}

RadialReduction reduce_radial(const RadialObstacle& f, const Gauge& g, int d, const std::vector<double>& radii,
                              double R) {
  require(d >= 2 && d <= kMaxDim, "dimension out of range");
  require(!radii.empty(), "scan grid must be nonempty");
  const double omega = unit_ball_volume(d);
  validate_gauge(g, omega * std::pow(R, d));
  RadialReduction out;
  out.best_ratio = std::numeric_limits<double>::infinity();
  for (double rho : radii) {
    require(rho > 0.0 && rho < R, "contact radii must lie in (0, R)");
    const double inner = d * omega * quad::integrate([&](double r) {
      const double fp = f.derivative(r);
      return std::pow(r, d - 1) * fp * fp;
    }, 0.0, rho, 16);
    const double energy = inner + annulus_energy(d, rho, R, f.value(rho), 0.0);
    const double measure = omega * std::pow(rho, d);
    const double ratio = energy / g.value(measure);
    out.radii.push_back(rho);
    out.energies.push_back(energy);
    out.measures.push_back(measure);
    out.ratios.push_back(ratio);
    if (ratio < out.best_ratio) {
      out.best_ratio = ratio;
      out.best = out.radii.size() - 1;
      out.best_radius = rho;
    }
  }
  return out;
}

std::pair<VectorField, VectorField> reflect_symmetrize(const VectorField& w, const Point& nu) {
  require(w.components() == 1, "reflection acts on scalar fields");
  const GridDomain& g = w.domain();
  const int d = g.dim();
  int axis = -1;
  double orient = 1.0;
  for (int a = 0; a < d; ++a) {
    const double v = nu[static_cast<std::size_t>(a)];
    if (v == 0.0) continue;
    require(axis < 0 && std::abs(std::abs(v) - 1.0) < 1e-12, "reflection direction must be a coordinate axis");
    axis = a;
    orient = v > 0.0 ? 1.0 : -1.0;
  }
  require(axis >= 0, "reflection direction must be a unit vector");

  VectorField plus = w, minus = w;
  if (g.mirrored(axis)) {
    // Stored cells are the positive half; the negative half is sign * w.
    const double sign = w.mirror_sign(0, axis);
    const double s_plus = orient > 0.0 ? 1.0 : sign, s_minus = orient > 0.0 ? sign : 1.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      plus.values(0)[i] = s_plus * w.values(0)[i];
      minus.values(0)[i] = s_minus * w.values(0)[i];
    }
    for (std::size_t f = 0; f < g.boundary_faces().size(); ++f) {
      plus.boundary_values(0)[f] = s_plus * w.boundary_values(0)[f];
      minus.boundary_values(0)[f] = s_minus * w.boundary_values(0)[f];
    }
    plus.set_parity(0, axis, Parity::even);
    minus.set_parity(0, axis, Parity::even);
    return {std::move(plus), std::move(minus)};
  }

  // Full lattice in this axis: j <-> -1 - j.
  auto reflected = [&](std::int32_t cell) {
    LatticeIndex li = g.lattice_index(cell);
    li[static_cast<std::size_t>(axis)] = -1 - li[static_cast<std::size_t>(axis)];
    const std::int32_t r = g.locate(li);
    require(r >= 0, "grid is not symmetric under the reflection");
    return r;
  };
  const auto faces = g.boundary_faces();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto cell = static_cast<std::int32_t>(i);
    const bool positive = orient * (g.lattice_index(cell)[static_cast<std::size_t>(axis)] + 0.5) > 0.0;
    VectorField& target = positive ? minus : plus;  // this cell copies from the other side
    target.at(0, cell) = w.at(0, reflected(cell));
  }
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const BoundaryFace& face = faces[f];
    const std::int32_t rc = reflected(face.cell);
    int dir = face.direction;
    if (dir / 2 == axis) dir ^= 1;
    const std::int32_t code = g.neighbor(rc, dir);
    require(GridDomain::is_boundary_code(code), "grid is not symmetric under the reflection");
    const bool positive = orient * (g.lattice_index(face.cell)[static_cast<std::size_t>(axis)] + 0.5) > 0.0;
    VectorField& target = positive ? minus : plus;
    target.boundary_values(0)[f] = w.boundary_values(0)[GridDomain::boundary_index(code)];
  }
  return {std::move(plus), std::move(minus)};
}

double contact_ratio(const VectorField& w, const RadialObstacle& f, const Gauge& g, double tol) {
  require(w.components() == 1, "contact ratio needs a scalar field");
  const GridDomain& dom = w.domain();
  std::size_t count = 0;
  for (std::size_t i = 0; i < dom.size(); ++i) {
    const Point x = dom.center(static_cast<std::int32_t>(i));
    double r2 = 0.0;
    for (int a = 0; a < dom.dim(); ++a) r2 += x[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)];
    const double fv = f.value(std::sqrt(r2));
    if (std::abs(w.values(0)[i] - fv) <= tol * std::max(1.0, std::abs(fv))) ++count;
  }
  const double measure = static_cast<double>(count) * dom.cell_volume() * dom.multiplicity();
  require(measure > 0.0, "field never meets the obstacle");
  return dirichlet_energy(w) / g.value(measure);
}

}  // namespace freebound
