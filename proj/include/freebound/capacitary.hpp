#pragma once

// Capacitary potentials: the minimal-energy field pinned to a datum on a
// contact set K and vanishing on the outer boundary.

#include <vector>

#include "freebound/grid.hpp"
#include "freebound/linear_datum.hpp"

namespace freebound {

/// Datum on K plus per-component energy weights and reflection parities.
struct ContactProblem {
  int components = 1;
  VectorField::BoundaryFn datum;
  std::vector<double> weights;                        // empty: all ones
  std::vector<std::array<Parity, kMaxDim>> parity;    // empty: all even

  /// w_j = y_j on K with weights b_j (the Gram eigenvalues); component j is
  /// odd in axis j and even in the others.
  static ContactProblem diagonal(const LinearDatum& datum);
  /// w = A1 y on K with unit weights (no reflection symmetry assumed).
  static ContactProblem matrix(const Matrix& A1);
  /// Scalar radial surrogate w = |y| on K.
  static ContactProblem radial_norm();
};

struct CapacitarySolution {
  VectorField field;
  ContactMask contact;
  double energy = 0.0;
  std::vector<double> per_component_energy;
  std::vector<double> weights;
  std::vector<SolveStats> stats;
};

/// Each component solves the Dirichlet problem with w = datum on K and w = 0 on
/// the outer boundary. `warm` (same domain and component count) seeds the
/// iteration. Requires K nonempty and not touching the outer boundary.
CapacitarySolution solve_contact(const DomainPtr& domain, const ContactMask& K, const ContactProblem& problem,
                                 const SolverOptions& options = {}, const VectorField* warm = nullptr);
/// Reduced problem of the diagonal form; the domain dimension must equal rank(A).
CapacitarySolution solve_contact(const DomainPtr& domain, const ContactMask& K, const LinearDatum& datum,
                                 const SolverOptions& options = {}, const VectorField* warm = nullptr);

/// K = B_rho about the origin with the datum imposed on the fitted sphere
/// |y| = rho instead of on a cell set: second-order energies where the cell
/// form is first order. The field lives on the annulus rho < |y| < R; the
/// energy inside K is that of the sampled datum on a grid of B_rho. `mirror`
/// stores one orthant and relies on the problem's parities.
CapacitarySolution solve_ball_contact(int dim, double rho, double R, double h, const ContactProblem& problem,
                                      bool mirror = true, const SolverOptions& options = {});

/// Replace W outside K by the harmonic field with the datum on K and zero outer
/// boundary. An empty datum keeps W's own values on K.
VectorField harmonic_replacement(const VectorField& W, const ContactMask& K,
                                 const VectorField::BoundaryFn& datum = {}, const SolverOptions& options = {});

}  // namespace freebound
