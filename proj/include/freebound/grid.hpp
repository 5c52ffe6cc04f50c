#pragma once

// Uniform cell-centred Cartesian grids on balls, boxes and annuli, fields
// sampled on them, the face-assembled Dirichlet energy and the Laplace solver.
//
// Lattice: cell centres sit at (j + 1/2) h for integer j on every axis, so
// grids with the same spacing nest exactly and are symmetric under x_i -> -x_i.
// A mirrored axis stores only the x_i > 0 half; the other half is implied by a
// per-component parity (even/odd reflection). Energies, measures and integrals
// are always reported for the full, unreduced domain.

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace freebound {

inline constexpr int kMaxDim = 4;

using Point = std::array<double, kMaxDim>;
using LatticeIndex = std::array<int, kMaxDim>;

enum class Shape { ball, box, annulus };
enum class BoundaryFit { staircase, fitted };
enum class Parity : std::uint8_t { even, odd };

std::string to_string(Shape shape);
Shape shape_from_string(const std::string& name);

struct GridSpec {
  int dim = 2;
  double radius = 1.0;
  double spacing = 1.0 / 32.0;
  Shape shape = Shape::ball;
  double inner_radius = 0.0;  // annulus only
  std::array<bool, kMaxDim> mirror{};
  BoundaryFit fit = BoundaryFit::fitted;
};

/// A face between a domain cell and the first exterior (ghost) cell.
/// `theta` is the distance from the cell centre to the boundary point in
/// units of h; staircase boundaries use theta = 1 at the ghost centre.
struct BoundaryFace {
  std::int32_t cell;
  std::int8_t direction;  // 2 * axis + (0 for -e_axis, 1 for +e_axis)
  double theta;
  Point point;
};

class GridDomain {
 public:
  /// Neighbour code for a face lying on a reflection plane.
  static constexpr std::int32_t kMirror = -1;

  explicit GridDomain(const GridSpec& spec);

  const GridSpec& spec() const noexcept { return spec_; }
  int dim() const noexcept { return spec_.dim; }
  double radius() const noexcept { return spec_.radius; }
  double spacing() const noexcept { return spec_.spacing; }
  Shape shape() const noexcept { return spec_.shape; }
  bool mirrored(int axis) const noexcept { return spec_.mirror[axis]; }
  bool any_mirror() const noexcept { return multiplicity_ > 1; }

  std::size_t size() const noexcept { return offsets_.size(); }
  double cell_volume() const noexcept { return cell_volume_; }
  /// Number of full-domain cells represented by each stored cell (2^mirrors).
  int multiplicity() const noexcept { return multiplicity_; }
  /// Full-domain measure: cell count x h^d x multiplicity.
  double measure() const noexcept { return static_cast<double>(size()) * cell_volume_ * multiplicity_; }
  /// Continuum measure of the declared shape.
  double shape_measure() const;

  int directions() const noexcept { return 2 * spec_.dim; }
  std::int32_t neighbor(std::int32_t cell, int direction) const noexcept {
    return neighbors_[static_cast<std::size_t>(cell) * static_cast<std::size_t>(directions()) +
                      static_cast<std::size_t>(direction)];
  }
  static bool is_boundary_code(std::int32_t code) noexcept { return code <= -2; }
  static std::size_t boundary_index(std::int32_t code) noexcept { return static_cast<std::size_t>(-(code + 2)); }
  std::span<const std::int32_t> neighbor_table() const noexcept { return neighbors_; }
  std::span<const BoundaryFace> boundary_faces() const noexcept { return boundary_; }

  LatticeIndex lattice_index(std::int32_t cell) const;
  Point center(std::int32_t cell) const;
  double coordinate(int j) const noexcept { return (j + 0.5) * spec_.spacing; }
  /// Stored cell at a full-lattice index, or -1 if outside (or in the implied half).
  std::int32_t locate(const LatticeIndex& index) const;
  /// True if the point lies inside the declared (full) shape.
  bool contains(const Point& x) const;

  /// Smallest / largest lattice index along an axis for the full domain.
  int lattice_min(int axis) const noexcept { return -half_count_[axis]; }
  int lattice_max(int axis) const noexcept { return half_count_[axis] - 1; }

 private:
  void build();

  GridSpec spec_;
  double cell_volume_ = 0.0;
  int multiplicity_ = 1;
  std::array<int, kMaxDim> half_count_{};  // J: full lattice j in [-J, J-1]
  std::array<int, kMaxDim> box_lo_{};      // stored box lower lattice index
  std::array<int, kMaxDim> box_extent_{};  // stored box extent per axis
  std::vector<std::int32_t> lookup_;       // stored box -> cell or -1
  std::vector<std::int32_t> offsets_;      // cell -> stored box offset
  std::vector<std::int32_t> neighbors_;    // cell * 2d + dir
  std::vector<BoundaryFace> boundary_;
};

using DomainPtr = std::shared_ptr<const GridDomain>;

DomainPtr make_grid(const GridSpec& spec);
/// Convenience form: d in {1,..,4}, 0 < h < R.
DomainPtr make_grid(int dim, double radius, double spacing, Shape shape);

/// Cell set on a domain (contact set {W = Ax}, or the dead set D \ Omega).
class ContactMask {
 public:
  ContactMask() = default;
  explicit ContactMask(DomainPtr domain);

  const GridDomain& domain() const { return *domain_; }
  const DomainPtr& domain_ptr() const { return domain_; }
  bool contains(std::int32_t cell) const { return flags_[static_cast<std::size_t>(cell)] != 0; }
  void insert(std::int32_t cell);
  void erase(std::int32_t cell);
  std::size_t count() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }
  /// Full-domain measure (stored count x h^d x multiplicity).
  double measure() const;
  std::vector<std::int32_t> members() const;
  std::span<const std::uint8_t> flags() const noexcept { return flags_; }
  bool operator==(const ContactMask& other) const { return flags_ == other.flags_; }

 private:
  DomainPtr domain_;
  std::vector<std::uint8_t> flags_;
  std::size_t count_ = 0;
};

/// The `count` cells with the smallest `key` (ties broken by cell index).
ContactMask nearest_cells(const DomainPtr& domain, std::size_t count,
                          const std::function<double(const Point&)>& key);

/// Grid samples of W: D -> R^k. Cells flagged fixed keep their values in every
/// solve; the exterior boundary carries one value per boundary face.
class VectorField {
 public:
  using BoundaryFn = std::function<void(const Point&, std::span<double>)>;

  VectorField() = default;
  VectorField(DomainPtr domain, int components);

  const GridDomain& domain() const { return *domain_; }
  const DomainPtr& domain_ptr() const { return domain_; }
  int components() const noexcept { return static_cast<int>(values_.size()); }

  std::span<double> values(int c) { return values_[static_cast<std::size_t>(c)]; }
  std::span<const double> values(int c) const { return values_[static_cast<std::size_t>(c)]; }
  double& at(int c, std::int32_t cell) { return values_[static_cast<std::size_t>(c)][static_cast<std::size_t>(cell)]; }
  double at(int c, std::int32_t cell) const { return values_[static_cast<std::size_t>(c)][static_cast<std::size_t>(cell)]; }
  std::span<double> boundary_values(int c) { return boundary_[static_cast<std::size_t>(c)]; }
  std::span<const double> boundary_values(int c) const { return boundary_[static_cast<std::size_t>(c)]; }

  bool is_fixed(std::int32_t cell) const { return fixed_[static_cast<std::size_t>(cell)] != 0; }
  void set_fixed(std::int32_t cell, bool fixed) { fixed_[static_cast<std::size_t>(cell)] = fixed ? 1 : 0; }
  std::span<const std::uint8_t> fixed_mask() const noexcept { return fixed_; }
  void clear_fixed();

  Parity parity(int c, int axis) const { return parity_[static_cast<std::size_t>(c)][static_cast<std::size_t>(axis)]; }
  void set_parity(int c, int axis, Parity p) { parity_[static_cast<std::size_t>(c)][static_cast<std::size_t>(axis)] = p; }
  /// Sign picked up by component c when reflected across the plane x_axis = 0.
  double mirror_sign(int c, int axis) const { return parity(c, axis) == Parity::odd ? -1.0 : 1.0; }

  /// Evaluate g at every boundary face point.
  void set_boundary(const BoundaryFn& g);
  /// Evaluate f at every cell centre (fixed flags untouched).
  void set_values(const BoundaryFn& f);

  /// Multilinear interpolation of component c at x. Lattice points outside the
  /// domain are evaluated with `outside` (zero when empty).
  double sample(int c, const Point& x, const std::function<double(int, const Point&)>& outside = {}) const;

  bool operator==(const VectorField& other) const;

 private:
  DomainPtr domain_;
  std::vector<std::vector<double>> values_;
  std::vector<std::vector<double>> boundary_;
  std::vector<std::uint8_t> fixed_;
  std::vector<std::array<Parity, kMaxDim>> parity_;
};

/// Sum_i b_i * integral |grad w_i|^2 with forward differences on faces.
/// Weights default to all ones; they must be strictly positive.
double dirichlet_energy(const VectorField& field, std::span<const double> weights = {});
double component_energy(const VectorField& field, int c);

/// Full-domain integral of |W|^2 by cell quadrature.
double l2_norm_sq(const VectorField& field, int c);

struct SolverOptions {
  double tolerance = 1e-10;  // relative residual
  int max_iterations = 0;    // 0: 50 * cells^(1/d)
  double relaxation = 1.6;   // SSOR preconditioner parameter
};

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;
};

/// Solve the discrete Laplace equation at every free cell of component c,
/// starting from the current values. Throws ConvergenceError.
SolveStats solve_component(VectorField& field, int c, const SolverOptions& options = {});
/// All components; each is an independent solve.
std::vector<SolveStats> solve_harmonic(VectorField& field, const SolverOptions& options = {});

/// Laplace solve with prescribed values on selected cells and boundary data g.
VectorField laplace_solve(const DomainPtr& domain, int components,
                          const std::vector<std::pair<std::int32_t, std::vector<double>>>& fixed,
                          const VectorField::BoundaryFn& boundary, const SolverOptions& options = {});

/// Harmonic extension into the annulus B_{R_far} \ B_R with the given data on
/// the inner sphere and zero on the outer sphere. Truncating the exterior
/// domain at R_far carries an error controlled by the |x|^{2-d} decay of
/// exterior harmonic functions (logarithmic in d = 2).
VectorField exterior_harmonic_extension(int dim, double spacing, int components,
                                        const VectorField::BoundaryFn& inner_data, double radius,
                                        double far_radius, std::array<bool, kMaxDim> mirror = {},
                                        const std::vector<std::array<Parity, kMaxDim>>& parity = {},
                                        const SolverOptions& options = {});
/// Same, with inner data interpolated from a field defined near the sphere.
VectorField exterior_harmonic_extension(const VectorField& inner, double radius, double far_radius,
                                        const SolverOptions& options = {});

enum class DumpFormat { binary, csv };
void write_field(std::ostream& out, const VectorField& field, DumpFormat format);
VectorField read_field(std::istream& in);

}  // namespace freebound
