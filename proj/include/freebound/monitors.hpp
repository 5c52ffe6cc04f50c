#pragma once

// Monotonicity diagnostics: Almgren frequency, the two-phase ACF product and
// the doubling ratio. Read-only over any computed field.
//
// Balls are weighted by a smooth cell indicator clamp(1/2 + (r - |x - x0|)/h),
// so integrals vary continuously in r. On mirrored grids x0 must lie on every
// mirror plane; stored sums are then scaled to the full ball.

#include <limits>
#include <vector>

#include "freebound/grid.hpp"

namespace freebound {

struct FrequencySeries {
  Point center{};
  std::vector<double> radii;
  std::vector<double> D;      // int_{B_r} |grad U|^2
  std::vector<double> H;      // int_{dB_r} |U|^2 (surface)
  std::vector<double> N;      // r D / H, NaN where flagged
  std::vector<bool> flagged;  // H = 0 on this shell
};

/// D by face quadrature, H by a hat-kernel shell of half-width h.
FrequencySeries frequency(const VectorField& U, const Point& x0, const std::vector<double>& radii);

/// r^-4 * int_{B_r, w>0} |grad w|^2 k * int_{B_r, w<0} |grad w|^2 k with
/// w = sigma . U and k = max(|x - x0|, h/2)^(2-d).
std::vector<double> acf_product(const VectorField& U, const Point& x0, const std::vector<double>& sigma,
                                const std::vector<double>& radii);

struct DoublingResult {
  double ratio = 0.0;          // int_{B_2r} |U|^2 / int_{B_r} |U|^2
  double surface_ratio = 0.0;  // H(2r) / H(r)
  double bound = 0.0;          // 2^(d-1) 4^N_ref
  bool holds = false;          // ratio <= bound
  bool surface_holds = false;
};

DoublingResult doubling_check(const VectorField& U, const Point& x0, double r, double N_ref);

/// int_{B_r} |U|^2 with the smooth ball weight.
double solid_integral(const VectorField& U, const Point& x0, double r);

/// Largest drop max_{i<j} (a_i - a_j), divided by `scale` when positive; zero
/// for nondecreasing sequences. NaN entries are skipped.
double monotonicity_defect(const std::vector<double>& values, double scale = 0.0);

}  // namespace freebound
