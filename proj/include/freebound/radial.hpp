#pragma once

// Closed-form radial solutions and the one-dimensional reduction of the
// ratio  int |grad w|^2 / g(|{w = f}|)  over radial fields: the ground truth
// the grid solvers are checked against.
//
// Dead-core convention: u(r) = (r_eps^{2-d} - r^{2-d}) / (r_eps^{2-d} - R^{2-d}),
// the form with u(r_eps) = 0 and u(R) = 1 (log form in d = 2).

#include <functional>
#include <utility>
#include <vector>

#include "freebound/grid.hpp"

namespace freebound {

enum class ProfileKind { capacitary, dead_core };

struct RadialProfile {
  int dim = 3;
  double r_eps = 0.5;
  double R = 1.0;
  ProfileKind kind = ProfileKind::capacitary;
  std::vector<std::pair<double, double>> samples;  // (r, value) on [0, R]

  double value(double r) const;
  double derivative(double r) const;  // d/dr, one-sided from outside at r_eps
  double energy() const;              // int_{B_R} |grad w|^2
  double contact_measure() const;     // |B_{r_eps}|
};

/// |B_1| in dimension d.
double unit_ball_volume(int d);

/// Energy of the radial harmonic function on r1 < |x| < r2 with values v1, v2.
double annulus_energy(int d, double r1, double r2, double v1, double v2);

/// w = |x| on B_{r_eps}, harmonic outside, w(R) = 0.
RadialProfile capacitary_profile(int d, double r_eps, double R = 1.0, int samples = 257);
/// u = 0 on B_{r_eps}, harmonic outside, u(R) = 1.
RadialProfile dead_core_profile(int d, double r_eps, double R = 1.0, int samples = 257);

/// Energy / eps of the capacitary profile (R = 1): 1 + d(d-2)/(1 - r_eps^{d-2})
/// for d >= 3, 1 + 2/|log r_eps| for d = 2. Increasing in r_eps.
double capacitary_ratio(int d, double r_eps);

/// Radial obstacle f(|x|) with its derivative.
struct RadialObstacle {
  std::function<double(double)> value;
  std::function<double(double)> derivative;

  static RadialObstacle norm();                 // f = |x|
  static RadialObstacle constant(double c);     // f = c
};

/// Gauge g on [0, t_max].
struct Gauge {
  std::function<double(double)> value;

  static Gauge linear();        // g(t) = t
  static Gauge power(double p); // g(t) = t^p
  /// Piecewise linear through (0, 0) and the given knots, extended linearly.
  static Gauge piecewise_linear(std::vector<double> knots, std::vector<double> values);
};

/// Throws unless g(0) = 0, g > 0 on (0, t_max] and g is convex on a uniform
/// sample of `samples` points (second differences >= -tol * scale).
void validate_gauge(const Gauge& g, double t_max, int samples = 1024, double tol = 1e-12);

/// g(2 eps sigma) + g(2 eps (1 - sigma)) - 2 g(eps); nonnegative for convex g.
double convexity_gap(const Gauge& g, double eps, double sigma);

struct RadialReduction {
  std::vector<double> radii;     // scanned contact radii
  std::vector<double> energies;
  std::vector<double> measures;
  std::vector<double> ratios;
  std::size_t best = 0;
  double best_ratio = 0.0;
  double best_radius = 0.0;
};

/// For each contact radius rho: w = f on B_rho, harmonic on the annulus with
/// w(R) = 0; ratio = energy / g(|B_rho|). Inner energy by Gauss-Legendre
/// quadrature of f', outer energy in closed form.
RadialReduction reduce_radial(const RadialObstacle& f, const Gauge& g, int d, const std::vector<double>& radii,
                              double R = 1.0);

/// Even extensions of the two halves of a scalar field across x_axis = 0:
/// w+ copies {x_axis > 0}, w- copies {x_axis < 0}. `nu` must be +-e_axis.
std::pair<VectorField, VectorField> reflect_symmetrize(const VectorField& w, const Point& nu);

/// E(w) / g(|{|w - f| <= tol}|) on the grid.
double contact_ratio(const VectorField& w, const RadialObstacle& f, const Gauge& g, double tol = 1e-9);

}  // namespace freebound
