#pragma once

// Small-measure asymptotics: as the dead set measure eps -> 0 the excess
// energy (E(U_eps) - E(h)) / eps tends to Lambda*(grad h(x0)).

#include <limits>
#include <optional>
#include <vector>

#include "freebound/lambda_star.hpp"
#include "freebound/penalized.hpp"

namespace freebound {

/// V~(x) = eps^{-1/d} V(eps^{1/d} x) on the blown-up domain eps^{-1/d} D with
/// the same spacing (or `spacing` when positive). Values outside D are zero.
/// eps = 1 returns V unchanged.
VectorField rescale(const VectorField& V, double eps, double spacing = 0.0);

/// Measure of {V~ = h~} outside B_R (rescaled units).
double capacity_tail(const VectorField& V_tilde, const VectorField& h_tilde, double R, double rel_tol = 1e-9);

struct SweepOptions {
  std::vector<double> etas{1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
  PenalizedOptions penalized;
  LambdaOptions lambda;            // for the target Lambda*(grad h(x0))
  std::vector<double> lambda_radii{2.0, 3.0, 4.0};
  int lambda_exchange_iterations = 0;
  double window_radius = 0.5;      // Lipschitz window B_w(x0)
  std::size_t min_dead_cells = 8;
  double zero_tolerance = 0.05;    // |h(x0)| <= tol * max|g| counts as a zero
  bool rescaled_energy = true;     // also report int |grad V~_eps|^2
  bool compute_target = true;
  int workers = 1;                 // eps values solved concurrently
};

struct SweepEntry {
  double eps = 0.0;
  double quotient = 0.0;
  double dead_hausdorff = 0.0;
  double lip_norm = 0.0;
  double eta = 0.0;               // saturated eta used
  bool saturated = false;
  double support_measure = 0.0;
  std::size_t dead_cells = 0;
  double rescaled_energy = std::numeric_limits<double>::quiet_NaN();
  double h1_gap = 0.0;            // int |grad (U_eps - h)|^2
  double lambda_flux = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
};

struct SweepResult {
  std::vector<SweepEntry> entries;
  double lambda_target = std::numeric_limits<double>::quiet_NaN();
  bool in_hypothesis = true;
  Point x0{};
  double harmonic_energy = 0.0;
  std::vector<std::vector<double>> grad_h;  // k x d at x0
};

/// For each eps (strictly decreasing) minimize with m = |D| - eps at the
/// largest saturating eta of the grid. `grad_h` gives grad h(x0) exactly for
/// linear data; otherwise it is estimated by finite differences.
SweepResult run_sweep(const DomainPtr& domain, const BoundaryDatum& g, const std::vector<double>& eps_list,
                      const SweepOptions& options = {}, const std::optional<Matrix>& grad_h = std::nullopt);

/// eps0, eps0/2, ... down to the smallest value still resolving
/// `min_cells` dead cells.
std::vector<double> default_eps_list(const GridDomain& domain, double eps0 = 0.4, std::size_t min_cells = 8);

/// Largest face difference quotient |U_i - U_j| / h with both cells in B_w(x0).
double lipschitz_norm(const VectorField& U, const Point& x0, double window);

}  // namespace freebound
