#include "freebound/monitors.hpp"

#include <algorithm>
#include <cmath>

#include "freebound/error.hpp"
#include "quadrature.hpp"

namespace freebound {
namespace {

double distance(const Point& x, const Point& y, int d) {
  double s = 0.0;
  for (int a = 0; a < d; ++a) s += (x[static_cast<std::size_t>(a)] - y[static_cast<std::size_t>(a)]) *
                                   (x[static_cast<std::size_t>(a)] - y[static_cast<std::size_t>(a)]);
  return std::sqrt(s);
}

double ball_weight(double rho, double r, double h) { return std::clamp(0.5 + (r - rho) / h, 0.0, 1.0); }

// Checks x0 against the mirror planes and B_{r_max} (plus a cell) against the domain.
void check_ball(const GridDomain& g, const Point& x0, double r_max) {
  const int d = g.dim();
  for (int a = 0; a < d; ++a)
    require(!g.mirrored(a) || x0[static_cast<std::size_t>(a)] == 0.0, "center must lie on every mirror plane");
  Point origin{};
  require(r_max > 0.0, "radii must be positive");
  require(distance(x0, origin, d) + r_max + 1.5 * g.spacing() <= g.radius(), "ball leaves the domain");
}

double field_sq(const VectorField& U, std::int32_t cell) {
  double s = 0.0;
  for (int c = 0; c < U.components(); ++c) s += U.at(c, cell) * U.at(c, cell);
  return s;
}

double dirichlet_in_ball(const VectorField& U, const Point& x0, double r) {
  const GridDomain& g = U.domain();
  const int d = g.dim();
  const double h = g.spacing();
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto cell = static_cast<std::int32_t>(i);
    const Point x = g.center(cell);
    if (distance(x, x0, d) > r + 2.0 * h) continue;
    for (int a = 0; a < d; ++a) {
      Point mid = x;
      const std::int32_t hi = g.neighbor(cell, 2 * a + 1);
      if (hi >= 0) {
        mid[static_cast<std::size_t>(a)] += 0.5 * h;
        double s = 0.0;
        for (int c = 0; c < U.components(); ++c) s += std::pow(U.at(c, cell) - U.at(c, hi), 2);
        sum += ball_weight(distance(mid, x0, d), r, h) * s;
      }
      if (g.neighbor(cell, 2 * a) == GridDomain::kMirror) {
        // Shared with the reflected copy: half of ((1 - sign) u)^2 per side.
        mid[static_cast<std::size_t>(a)] = 0.0;
        double s = 0.0;
        for (int c = 0; c < U.components(); ++c) s += 0.5 * std::pow((1.0 - U.mirror_sign(c, a)) * U.at(c, cell), 2);
        sum += ball_weight(distance(mid, x0, d), r, h) * s;
      }
    }
  }
  return std::pow(h, d - 2) * g.multiplicity() * sum;
}

// Quadrature on the unit sphere S^{d-1}, d <= 4: the last coordinate t carries
// the weight (1 - t^2)^{(d-3)/2}, the rest is a scaled lower sphere.
void sphere_rule(int d, int m, std::vector<Point>& nodes, std::vector<double>& weights) {
  nodes.clear();
  weights.clear();
  std::vector<double> circle(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) circle[static_cast<std::size_t>(j)] = 2.0 * M_PI * (j + 0.5) / m;
  if (d == 2) {
    for (double phi : circle) nodes.push_back(Point{std::cos(phi), std::sin(phi)}), weights.push_back(2.0 * M_PI / m);
    return;
  }
  std::vector<Point> sub;
  std::vector<double> subw;
  std::vector<double> t, tw;
  if (d == 3) {
    sub.resize(circle.size());
    subw.assign(circle.size(), 2.0 * M_PI / m);
    for (std::size_t j = 0; j < circle.size(); ++j) sub[j] = Point{std::cos(circle[j]), std::sin(circle[j])};
    quad::gauss_legendre(m / 2 + 1, t, tw);
  } else {
    sphere_rule(3, m, sub, subw);
    // Weight sqrt(1 - t^2): Chebyshev nodes of the second kind.
    const int n = m / 2 + 1;
    for (int k = 1; k <= n; ++k) {
      const double a = k * M_PI / (n + 1);
      t.push_back(std::cos(a));
      tw.push_back(M_PI / (n + 1) * std::sin(a) * std::sin(a));
    }
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double s = std::sqrt(1.0 - t[i] * t[i]);
    for (std::size_t j = 0; j < sub.size(); ++j) {
      Point p{};
      for (int a = 0; a < d - 1; ++a) p[static_cast<std::size_t>(a)] = s * sub[j][static_cast<std::size_t>(a)];
      p[static_cast<std::size_t>(d - 1)] = t[i];
      nodes.push_back(p);
      weights.push_back(tw[i] * subw[j]);
    }
  }
}

// int_{dB_r(x0)} |U|^2 from interpolated samples.
double shell_integral(const VectorField& U, const Point& x0, double r) {
  const GridDomain& g = U.domain();
  const int d = g.dim();
  const int m = std::max(16, static_cast<int>(std::ceil(4.0 * M_PI * r / g.spacing())));
  std::vector<Point> nodes;
  std::vector<double> weights;
  sphere_rule(d, m, nodes, weights);
  double sum = 0.0;
  for (std::size_t q = 0; q < nodes.size(); ++q) {
    Point x = x0;
    for (int a = 0; a < d; ++a) x[static_cast<std::size_t>(a)] += r * nodes[q][static_cast<std::size_t>(a)];
    double v = 0.0;
    for (int c = 0; c < U.components(); ++c) v += std::pow(U.sample(c, x), 2);
    sum += weights[q] * v;
  }
  return std::pow(r, d - 1) * sum;
}

}  // namespace

double solid_integral(const VectorField& U, const Point& x0, double r) {
  const GridDomain& g = U.domain();
  check_ball(g, x0, r);
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto cell = static_cast<std::int32_t>(i);
    sum += ball_weight(distance(g.center(cell), x0, g.dim()), r, g.spacing()) * field_sq(U, cell);
  }
  return g.cell_volume() * g.multiplicity() * sum;
}

FrequencySeries frequency(const VectorField& U, const Point& x0, const std::vector<double>& radii) {
  require(!radii.empty(), "radii must be nonempty");
  for (std::size_t i = 1; i < radii.size(); ++i) require(radii[i] > radii[i - 1], "radii must be strictly increasing");
  check_ball(U.domain(), x0, radii.back());
  require(radii.front() > 0.0, "radii must be positive");
  FrequencySeries out;
  out.center = x0;
  out.radii = radii;
  double scale = 0.0;
  for (int c = 0; c < U.components(); ++c)
    for (double v : U.values(c)) scale = std::max(scale, v * v);
  for (double r : radii) {
    const double D = dirichlet_in_ball(U, x0, r);
    const double H = shell_integral(U, x0, r);
    // Shell mass below rounding of the field scale counts as zero.
    const bool flag = !(H > 1e-24 * std::max(scale, 1e-300) * std::pow(r, U.domain().dim() - 1));
    out.D.push_back(D);
    out.H.push_back(H);
    out.flagged.push_back(flag);
    out.N.push_back(flag ? std::numeric_limits<double>::quiet_NaN() : r * D / H);
  }
  return out;
}

std::vector<double> acf_product(const VectorField& U, const Point& x0, const std::vector<double>& sigma,
                                const std::vector<double>& radii) {
  const GridDomain& g = U.domain();
  const int d = g.dim();
  const double h = g.spacing();
  require(static_cast<int>(sigma.size()) == U.components(), "sigma must have one entry per component");
  require(std::any_of(sigma.begin(), sigma.end(), [](double s) { return s != 0.0; }), "sigma must be nonzero");
  require(!radii.empty(), "radii must be nonempty");
  check_ball(g, x0, *std::max_element(radii.begin(), radii.end()));

  // w = sigma . U needs one parity per mirrored axis.
  std::array<double, kMaxDim> wsign{};
  bool any_odd = false;
  for (int a = 0; a < d; ++a) {
    wsign[static_cast<std::size_t>(a)] = 1.0;
    if (!g.mirrored(a)) continue;
    bool set = false;
    for (int c = 0; c < U.components(); ++c) {
      if (sigma[static_cast<std::size_t>(c)] == 0.0) continue;
      const double s = U.mirror_sign(c, a);
      require(!set || s == wsign[static_cast<std::size_t>(a)], "sigma . U has no definite parity on a mirror plane");
      wsign[static_cast<std::size_t>(a)] = s;
      set = true;
    }
    if (wsign[static_cast<std::size_t>(a)] < 0.0) any_odd = true;
  }

  const std::size_t n = g.size();
  std::vector<double> w(n, 0.0), grad2(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (int c = 0; c < U.components(); ++c)
      w[i] += sigma[static_cast<std::size_t>(c)] * U.values(c)[i];
  for (std::size_t i = 0; i < n; ++i) {
    const auto cell = static_cast<std::int32_t>(i);
    double s = 0.0;
    for (int a = 0; a < d; ++a) {
      const std::int32_t lo = g.neighbor(cell, 2 * a), hi = g.neighbor(cell, 2 * a + 1);
      double wlo = w[i], whi = w[i], span = 0.0;
      if (lo >= 0) wlo = w[static_cast<std::size_t>(lo)], span += h;
      else if (lo == GridDomain::kMirror) wlo = wsign[static_cast<std::size_t>(a)] * w[i], span += h;
      if (hi >= 0) whi = w[static_cast<std::size_t>(hi)], span += h;
      if (span > 0.0) s += std::pow((whi - wlo) / span, 2);
    }
    grad2[i] = s;
  }

  std::vector<double> out;
  for (double r : radii) {
    double pos = 0.0, neg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (w[i] == 0.0) continue;
      const double rho = distance(g.center(static_cast<std::int32_t>(i)), x0, d);
      const double wt = ball_weight(rho, r, h);
      if (wt == 0.0) continue;
      const double kernel = std::pow(std::max(rho, 0.5 * h), 2 - d);
      (w[i] > 0.0 ? pos : neg) += wt * kernel * grad2[i];
    }
    const double vol = g.cell_volume() * g.multiplicity();
    if (any_odd) {
      // Reflections through an odd plane swap the phases.
      pos = neg = 0.5 * (pos + neg);
    }
    out.push_back(vol * pos * vol * neg / std::pow(r, 4));
  }
  return out;
}

DoublingResult doubling_check(const VectorField& U, const Point& x0, double r, double N_ref) {
  const GridDomain& g = U.domain();
  check_ball(g, x0, 2.0 * r);
  DoublingResult out;
  const double inner = solid_integral(U, x0, r);
  const double outer = solid_integral(U, x0, 2.0 * r);
  out.ratio = inner > 0.0 ? outer / inner : std::numeric_limits<double>::infinity();
  const double Hi = shell_integral(U, x0, r), Ho = shell_integral(U, x0, 2.0 * r);
  out.surface_ratio = Hi > 0.0 ? Ho / Hi : std::numeric_limits<double>::infinity();
  out.bound = std::pow(2.0, g.dim() - 1) * std::pow(4.0, N_ref);
  out.holds = out.ratio <= out.bound;
  out.surface_holds = out.surface_ratio <= out.bound;
  return out;
}

double monotonicity_defect(const std::vector<double>& values, double scale) {
  double peak = -std::numeric_limits<double>::infinity(), worst = 0.0;
  for (double v : values) {
    if (std::isnan(v)) continue;
    worst = std::max(worst, peak - v);
    peak = std::max(peak, v);
  }
  return scale > 0.0 ? worst / scale : worst;
}

}  // namespace freebound
