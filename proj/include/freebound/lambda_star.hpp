#pragma once

// Upper bounds for the blow-up constant Lambda*(A): minimal capacitary energy
// over contact sets K of unit measure, computed in the reduced dimension
// n = rank(A) on a ball B_R standing in for the whole space.

#include <limits>
#include <string>
#include <vector>

#include "freebound/capacitary.hpp"
#include "freebound/grid.hpp"
#include "freebound/linear_datum.hpp"

namespace freebound {

enum class LambdaMethod { parametric, exchange, rank1_exact };
enum class ContactFamily { ball, ellipsoid };

std::string to_string(LambdaMethod method);
std::string to_string(ContactFamily family);
ContactFamily family_from_string(const std::string& name);

struct LambdaOptions {
  double radius = 4.0;
  double spacing = 1.0 / 48.0;
  ContactFamily family = ContactFamily::ellipsoid;
  bool use_symmetry = true;  // store one orthant; valid for the diagonal form
  BoundaryFit fit = BoundaryFit::fitted;
  SolverOptions solver;
  int golden_iterations = 12;  // per aspect parameter
  int coordinate_sweeps = 2;   // n >= 3 ellipsoid search
  double max_aspect = 16.0;    // largest semi-axis ratio considered
  int exchange_batch = 0;      // 0: boundary size / 8
};

struct LambdaStarEstimate {
  LinearDatum datum;
  double value = 0.0;  // energy / |K|
  LambdaMethod method = LambdaMethod::parametric;
  double R_used = 0.0;
  double h_used = 0.0;
  ContactMask contact;
  std::vector<double> history;    // quotient after every accepted step
  std::vector<double> semi_axes;  // parametric family: best ellipsoid (unit product)
  double lower_bound = 0.0;       // analytic: max(frob_sq, b_min (1 + n(n-2)))
  double contact_measure = 0.0;
  int solves = 0;
  int rejected = 0;  // exchange: trial steps that failed verification
  VectorField field;  // reduced capacitary solution (empty for rank 1)
};

/// Analytic lower end of the reported bracket.
double analytic_lower_bound(const LinearDatum& datum);

/// Exact rank-one value: the optimal field equals A1 y on a unit interval and
/// is constant outside, so the energy is |A1|^2 for every R.
LambdaStarEstimate rank_one_exact(const LinearDatum& datum);

/// Ball B_R of dimension `dim` with the lattice and symmetry of `options`.
DomainPtr reduced_domain(int dim, const LambdaOptions& options);
/// Cell count (per stored orthant) of a unit-measure contact set.
std::size_t unit_measure_cells(const GridDomain& domain);
/// The unit-measure cell set nearest the origin in the ellipsoidal gauge
/// sum (y_i / a_i)^2.
ContactMask ellipsoid_contact(const DomainPtr& domain, const std::vector<double>& semi_axes);

/// Best member of the ball or axis-aligned-ellipsoid family.
LambdaStarEstimate lambda_star_parametric(const LinearDatum& datum, const LambdaOptions& options = {},
                                          const std::vector<double>& initial_axes = {});

/// Greedy boundary-cell exchange from `init` at fixed cell count.
LambdaStarEstimate lambda_star_exchange(const LinearDatum& datum, const ContactMask& init, int iterations,
                                        const LambdaOptions& options = {});

/// Parametric estimates over increasing radii on nested grids.
std::vector<LambdaStarEstimate> R_continuation(const LinearDatum& datum, const std::vector<double>& radii,
                                               const LambdaOptions& options = {});

/// Full pipeline: continuation over `radii`, then exchange at the largest R.
LambdaStarEstimate lambda_star(const LinearDatum& datum, const std::vector<double>& radii, int exchange_iterations,
                               const LambdaOptions& options = {});

// --- cylinder comparator for rank(A) < d -----------------------------------

/// phi = 1 on |z| <= inner, 0 for |z| >= outer, C^1 smoothstep in between.
struct CutoffProfile {
  double inner = 1.0;
  double outer = 1.1;
  double value(double s) const;
  double slope(double s) const;
};

struct CylinderOptions {
  double ambient_radius = std::numeric_limits<double>::infinity();
  int quadrature_panels = 2048;
};

struct CylinderEnergy {
  double energy = 0.0;          // d-dimensional Dirichlet energy of the product field
  double bulk_term = 0.0;       // int phi_d^2 |grad_y V_d|^2
  double cross_term = 0.0;      // int |V_d|^2 |grad_z phi_d|^2
  double contact_measure = 0.0; // measure of {W = A x}
  double quotient = 0.0;        // energy / contact_measure
  double reduced_quotient = 0.0;
  double y_extent = 0.0;
  double z_extent = 0.0;
};

/// Energy of W(y, z) = d^{1/n} V(y / d^{1/n}) phi((omega_m d)^{1/m} z), m = d - n,
/// assembled from the reduced solution V and radial quadrature of phi.
CylinderEnergy cylinder_comparator(const CapacitarySolution& reduced, int ambient_dim, double delta,
                                   const CutoffProfile& cutoff = {}, const CylinderOptions& options = {});

}  // namespace freebound
