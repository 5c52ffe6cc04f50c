#pragma once

// The penalized free-boundary functional
//   J(W) = int_D |grad W|^2 + f_{m,eta}(|{W != 0}|)
// minimized over fields with W = g on the boundary, by alternating harmonic
// solves with exchanges of cells between the support and the dead set.

#include <array>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "freebound/grid.hpp"
#include "freebound/linear_datum.hpp"

namespace freebound {

struct PenaltyParams {
  double m = 1.0;
  double eta = 1.0;
  double nondeg_scale = 0.0;  // kappa; 0 disables the non-degeneracy cleanup
};

/// (t - m) / eta above m, eta (t - m) below.
double f_m_eta(double t, const PenaltyParams& params);
void validate(const PenaltyParams& params, double domain_measure);

/// Boundary datum g with per-component reflection parities.
struct BoundaryDatum {
  int components = 1;
  VectorField::BoundaryFn g;
  // parity[c][axis]; nullopt where g_c has no definite parity in that axis.
  std::vector<std::array<std::optional<Parity>, kMaxDim>> parity;

  static BoundaryDatum constant(const std::vector<double>& value);
  static BoundaryDatum linear(const Matrix& A);
  /// True if every component is even or odd under x_axis -> -x_axis.
  bool reflects(int axis) const;
};

struct PenalizedOptions {
  SolverOptions solver;
  int max_iterations = 200;
  /// Initial dead set; default: the cells nearest the minimum of |h|.
  const ContactMask* seed = nullptr;
  /// Warm start for the field (same domain).
  const VectorField* warm = nullptr;
  bool compute_multipliers = true;
};

struct SolveReport {
  double energy = 0.0;
  double support_measure = 0.0;
  double penalty = 0.0;
  double total = 0.0;
  double lambda_flux = std::numeric_limits<double>::quiet_NaN();
  double lambda_shape = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  bool converged = false;
  double harmonic_energy = 0.0;  // int |grad h|^2
  double lower_bound = 0.0;      // int |grad h|^2 - m
  double upper_bound = 0.0;      // J(h) = int |grad h|^2 + (|D| - m) / eta
  bool fallback = false;         // the harmonic extension itself was best
  std::vector<double> history;   // J after every accepted step
};

struct PenalizedResult {
  VectorField field;
  ContactMask dead;
  VectorField harmonic;
  SolveReport report;
};

PenalizedResult minimize_penalized(const DomainPtr& domain, const BoundaryDatum& g, const PenaltyParams& params,
                                   const PenalizedOptions& options = {});

/// Mean of |grad |U||^2 over support cells adjacent to the dead set, with
/// one-sided differences taken from the support side and each magnitude
/// extrapolated along the normal to the zero level of |U|.
double lambda_flux(const VectorField& U, const ContactMask& dead);

/// A deformation field xi with its Jacobian D xi (row i = grad xi_i).
struct Deformation {
  std::function<void(const Point&, Point& xi, std::array<Point, kMaxDim>& jacobian)> eval;

  /// xi = zeta(|x - c|) (x - c): zeta = 1 on B_r1(c), 0 outside B_r2(c), C^1.
  static Deformation localized_dilation(const Point& center, double r1, double r2, int dim);
};

/// delta F_0(U)[xi] = sum_i int_Omega (-2 grad u_i . D xi grad u_i + |grad u_i|^2 div xi),
/// by cell quadrature over the support.
double shape_variation(const VectorField& U, const ContactMask& dead, const Deformation& xi);
/// Integral of div xi over the support.
double support_divergence(const VectorField& U, const ContactMask& dead, const Deformation& xi);
/// -delta F_0(U)[xi] / int_Omega div xi; sign fixed so the radial dead core
/// gives a positive multiplier. Default xi: a dilation about the dead-set
/// centroid, cut off halfway between the dead set and the outer boundary.
double lambda_shape(const VectorField& U, const ContactMask& dead, const Deformation* xi = nullptr,
                    double degeneracy_tol = 1e-3);

struct SaturationResult {
  std::vector<double> etas;
  std::vector<double> support_measures;
  std::vector<bool> saturated;
  std::vector<SolveReport> reports;
  double eta_tilde = std::numeric_limits<double>::quiet_NaN();
  bool found = false;
  double cell_volume = 0.0;
};

/// Largest eta of a decreasing grid such that it and every smaller grid value
/// gives |Omega| = m within one cell volume.
SaturationResult eta_saturation_search(const DomainPtr& domain, const BoundaryDatum& g, double m,
                                       const std::vector<double>& etas, const PenalizedOptions& options = {});

}  // namespace freebound
