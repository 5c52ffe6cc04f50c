#include "freebound/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "freebound/error.hpp"

namespace freebound {

namespace {

constexpr double kMinTheta = 1e-3;

double squared_norm(const Point& x, int dim) {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += x[a] * x[a];
  return s;
}

}  // namespace

std::string to_string(Shape shape) {
  switch (shape) {
    case Shape::ball:
      return "ball";
    case Shape::box:
      return "box";
    case Shape::annulus:
      return "annulus";
  }
  return "ball";
}

Shape shape_from_string(const std::string& name) {
  if (name == "ball") return Shape::ball;
  if (name == "box") return Shape::box;
  if (name == "annulus") return Shape::annulus;
  throw ValidationError("unknown domain shape '" + name + "' (expected ball, box or annulus)");
}

GridDomain::GridDomain(const GridSpec& spec) : spec_(spec) {
  require(spec_.dim >= 1 && spec_.dim <= kMaxDim, "grid dimension must be in {1,2,3,4}, got " + std::to_string(spec_.dim));
  require(spec_.spacing > 0.0 && spec_.radius > 0.0, "grid radius and spacing must be positive");
  require(spec_.spacing < spec_.radius, "grid spacing h must be smaller than the radius R");
  if (spec_.shape == Shape::annulus) {
    require(spec_.inner_radius > 0.0 && spec_.inner_radius < spec_.radius,
            "annulus inner radius must lie in (0, R)");
  }
  for (int a = spec_.dim; a < kMaxDim; ++a) spec_.mirror[a] = false;
  build();
}

double GridDomain::shape_measure() const {
  const int d = spec_.dim;
  const double unit_ball = std::pow(M_PI, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
  switch (spec_.shape) {
    case Shape::box:
      return std::pow(2.0 * spec_.radius, d);
    case Shape::ball:
      return unit_ball * std::pow(spec_.radius, d);
    case Shape::annulus:
      return unit_ball * (std::pow(spec_.radius, d) - std::pow(spec_.inner_radius, d));
  }
  return 0.0;
}

bool GridDomain::contains(const Point& x) const {
  const int d = spec_.dim;
  switch (spec_.shape) {
    case Shape::box:
      for (int a = 0; a < d; ++a)
        if (std::abs(x[a]) > spec_.radius) return false;
      return true;
    case Shape::ball:
      return squared_norm(x, d) < spec_.radius * spec_.radius;
    case Shape::annulus: {
      const double r2 = squared_norm(x, d);
      return r2 < spec_.radius * spec_.radius && r2 > spec_.inner_radius * spec_.inner_radius;
    }
  }
  return false;
}

void GridDomain::build() {
  const int d = spec_.dim;
  const double h = spec_.spacing;
  cell_volume_ = std::pow(h, d);
  multiplicity_ = 1;
  std::size_t box_size = 1;
  for (int a = 0; a < d; ++a) {
    half_count_[a] = static_cast<int>(std::floor(spec_.radius / h + 0.5 + 1e-9));
    if (spec_.mirror[a]) {
      multiplicity_ *= 2;
      box_lo_[a] = 0;
      box_extent_[a] = half_count_[a];
    } else {
      box_lo_[a] = -half_count_[a];
      box_extent_[a] = 2 * half_count_[a];
    }
    box_size *= static_cast<std::size_t>(box_extent_[a]);
  }
  require(box_size < (std::size_t{1} << 31), "grid too large");
  lookup_.assign(box_size, -1);

  // Lexicographic order, last axis fastest.
  LatticeIndex idx{};
  for (std::size_t off = 0; off < box_size; ++off) {
    std::size_t rem = off;
    for (int a = d - 1; a >= 0; --a) {
      idx[a] = box_lo_[a] + static_cast<int>(rem % static_cast<std::size_t>(box_extent_[a]));
      rem /= static_cast<std::size_t>(box_extent_[a]);
    }
    Point x{};
    for (int a = 0; a < d; ++a) x[a] = coordinate(idx[a]);
    if (contains(x)) {
      lookup_[off] = static_cast<std::int32_t>(offsets_.size());
      offsets_.push_back(static_cast<std::int32_t>(off));
    }
  }

  const int nd = directions();
  neighbors_.assign(offsets_.size() * static_cast<std::size_t>(nd), 0);
  for (std::size_t cell = 0; cell < offsets_.size(); ++cell) {
    const LatticeIndex li = lattice_index(static_cast<std::int32_t>(cell));
    const Point c = center(static_cast<std::int32_t>(cell));
    for (int dir = 0; dir < nd; ++dir) {
      const int axis = dir / 2;
      const int step = (dir % 2 == 0) ? -1 : 1;
      LatticeIndex nb = li;
      nb[axis] += step;
      std::int32_t code;
      if (spec_.mirror[axis] && nb[axis] < 0) {
        code = kMirror;
      } else if (const std::int32_t found = locate(nb); found >= 0) {
        code = found;
      } else {
        BoundaryFace face{};
        face.cell = static_cast<std::int32_t>(cell);
        face.direction = static_cast<std::int8_t>(dir);
        Point ghost = c;
        ghost[axis] += step * h;
        double theta = 1.0;
        if (spec_.fit == BoundaryFit::fitted) {
          const double x = c[axis];
          const double perp = squared_norm(c, d) - x * x;
          switch (spec_.shape) {
            case Shape::box:
              theta = (spec_.radius - step * x) / h;
              break;
            case Shape::ball:
              theta = (std::sqrt(std::max(0.0, spec_.radius * spec_.radius - perp)) - step * x) / h;
              break;
            case Shape::annulus:
              if (squared_norm(ghost, d) >= spec_.radius * spec_.radius) {
                theta = (std::sqrt(std::max(0.0, spec_.radius * spec_.radius - perp)) - step * x) / h;
              } else {
                const double q = std::sqrt(std::max(0.0, spec_.inner_radius * spec_.inner_radius - perp));
                theta = (-q - step * x) / h;
              }
              break;
          }
          theta = std::clamp(theta, kMinTheta, 1.0);
        }
        face.theta = theta;
        face.point = c;
        face.point[axis] += step * theta * h;
        code = -2 - static_cast<std::int32_t>(boundary_.size());
        boundary_.push_back(face);
      }
      neighbors_[cell * static_cast<std::size_t>(nd) + static_cast<std::size_t>(dir)] = code;
    }
  }
}

LatticeIndex GridDomain::lattice_index(std::int32_t cell) const {
  LatticeIndex idx{};
  std::size_t rem = static_cast<std::size_t>(offsets_[static_cast<std::size_t>(cell)]);
  for (int a = spec_.dim - 1; a >= 0; --a) {
    idx[a] = box_lo_[a] + static_cast<int>(rem % static_cast<std::size_t>(box_extent_[a]));
    rem /= static_cast<std::size_t>(box_extent_[a]);
  }
  return idx;
}

Point GridDomain::center(std::int32_t cell) const {
  const LatticeIndex idx = lattice_index(cell);
  Point x{};
  for (int a = 0; a < spec_.dim; ++a) x[a] = coordinate(idx[a]);
  return x;
}

std::int32_t GridDomain::locate(const LatticeIndex& index) const {
  std::size_t off = 0;
  for (int a = 0; a < spec_.dim; ++a) {
    const int local = index[a] - box_lo_[a];
    if (local < 0 || local >= box_extent_[a]) return -1;
    off = off * static_cast<std::size_t>(box_extent_[a]) + static_cast<std::size_t>(local);
  }
  return lookup_[off];
}

DomainPtr make_grid(const GridSpec& spec) { return std::make_shared<const GridDomain>(spec); }

DomainPtr make_grid(int dim, double radius, double spacing, Shape shape) {
  GridSpec spec;
  spec.dim = dim;
  spec.radius = radius;
  spec.spacing = spacing;
  spec.shape = shape;
  return make_grid(spec);
}

// ---------------------------------------------------------------------------
// ContactMask

ContactMask::ContactMask(DomainPtr domain) : domain_(std::move(domain)), flags_(domain_->size(), 0) {}

void ContactMask::insert(std::int32_t cell) {
  auto& f = flags_[static_cast<std::size_t>(cell)];
  if (f == 0) {
    f = 1;
    ++count_;
  }
}

void ContactMask::erase(std::int32_t cell) {
  auto& f = flags_[static_cast<std::size_t>(cell)];
  if (f != 0) {
    f = 0;
    --count_;
  }
}

double ContactMask::measure() const {
  if (!domain_) return 0.0;
  return static_cast<double>(count_) * domain_->cell_volume() * domain_->multiplicity();
}

std::vector<std::int32_t> ContactMask::members() const {
  std::vector<std::int32_t> out;
  out.reserve(count_);
  for (std::size_t i = 0; i < flags_.size(); ++i)
    if (flags_[i]) out.push_back(static_cast<std::int32_t>(i));
  return out;
}

ContactMask nearest_cells(const DomainPtr& domain, std::size_t count,
                          const std::function<double(const Point&)>& key) {
  require(count <= domain->size(), "requested more contact cells than the domain holds");
  std::vector<std::pair<double, std::int32_t>> keyed(domain->size());
  for (std::size_t i = 0; i < domain->size(); ++i) {
    const auto cell = static_cast<std::int32_t>(i);
    keyed[i] = {key(domain->center(cell)), cell};
  }
  std::nth_element(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(count), keyed.end());
  ContactMask mask(domain);
  for (std::size_t i = 0; i < count; ++i) mask.insert(keyed[i].second);
  return mask;
}

// ---------------------------------------------------------------------------
// VectorField

VectorField::VectorField(DomainPtr domain, int components)
    : domain_(std::move(domain)),
      values_(static_cast<std::size_t>(components), std::vector<double>(domain_->size(), 0.0)),
      boundary_(static_cast<std::size_t>(components), std::vector<double>(domain_->boundary_faces().size(), 0.0)),
      fixed_(domain_->size(), 0),
      parity_(static_cast<std::size_t>(components)) {
  require(components >= 1, "a vector field needs at least one component");
  for (auto& p : parity_) p.fill(Parity::even);
}

void VectorField::clear_fixed() { std::fill(fixed_.begin(), fixed_.end(), std::uint8_t{0}); }

void VectorField::set_boundary(const BoundaryFn& g) {
  const auto faces = domain_->boundary_faces();
  std::vector<double> buf(values_.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    g(faces[f].point, buf);
    for (std::size_t c = 0; c < values_.size(); ++c) boundary_[c][f] = buf[c];
  }
}

void VectorField::set_values(const BoundaryFn& fn) {
  std::vector<double> buf(values_.size());
  for (std::size_t i = 0; i < domain_->size(); ++i) {
    fn(domain_->center(static_cast<std::int32_t>(i)), buf);
    for (std::size_t c = 0; c < values_.size(); ++c) values_[c][i] = buf[c];
  }
}

double VectorField::sample(int c, const Point& x, const std::function<double(int, const Point&)>& outside) const {
  const GridDomain& g = *domain_;
  const int d = g.dim();
  const double h = g.spacing();
  LatticeIndex base{};
  std::array<double, kMaxDim> t{};
  for (int a = 0; a < d; ++a) {
    const double s = x[a] / h - 0.5;
    base[a] = static_cast<int>(std::floor(s));
    t[a] = s - base[a];
  }
  double acc = 0.0;
  double weight_found = 0.0;
  for (int corner = 0; corner < (1 << d); ++corner) {
    LatticeIndex li = base;
    double w = 1.0;
    for (int a = 0; a < d; ++a) {
      const int bit = (corner >> a) & 1;
      li[a] += bit;
      w *= bit ? t[a] : 1.0 - t[a];
    }
    if (w == 0.0) continue;
    double sign = 1.0;
    LatticeIndex stored = li;
    for (int a = 0; a < d; ++a) {
      if (g.mirrored(a) && stored[a] < 0) {
        stored[a] = -1 - stored[a];
        sign *= mirror_sign(c, a);
      }
    }
    const std::int32_t cell = g.locate(stored);
    if (cell >= 0) {
      acc += w * sign * at(c, cell);
      weight_found += w;
    } else if (outside) {
      Point p{};
      for (int a = 0; a < d; ++a) p[a] = g.coordinate(li[a]);
      acc += w * outside(c, p);
      weight_found += w;
    }
  }
  if (outside) return acc;
  return weight_found > 0.0 ? acc / weight_found : 0.0;
}

bool VectorField::operator==(const VectorField& other) const {
  const auto same_grid = [&] {
    if (domain_ == other.domain_) return true;
    if (!domain_ || !other.domain_) return false;
    const GridSpec &a = domain_->spec(), &b = other.domain_->spec();
    return a.dim == b.dim && a.radius == b.radius && a.spacing == b.spacing && a.shape == b.shape &&
           a.inner_radius == b.inner_radius && a.mirror == b.mirror && a.fit == b.fit;
  };
  return same_grid() && values_ == other.values_ && boundary_ == other.boundary_ &&
         fixed_ == other.fixed_ && parity_ == other.parity_;
}

// ---------------------------------------------------------------------------
// Energy

double component_energy(const VectorField& field, int c) {
  const GridDomain& g = field.domain();
  const int nd = g.directions();
  const auto nbr = g.neighbor_table();
  const auto faces = g.boundary_faces();
  const auto u = field.values(c);
  const auto b = field.boundary_values(c);
  double e = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double ui = u[i];
    for (int dir = 0; dir < nd; ++dir) {
      const std::int32_t code = nbr[i * static_cast<std::size_t>(nd) + static_cast<std::size_t>(dir)];
      if (code >= 0) {
        if (dir % 2 == 1) {
          const double diff = ui - u[static_cast<std::size_t>(code)];
          e += diff * diff;
        }
      } else if (code == GridDomain::kMirror) {
        // Half of the full face (u - (-u))^2 belongs to this side.
        if (field.parity(c, dir / 2) == Parity::odd) e += 2.0 * ui * ui;
      } else {
        const std::size_t f = GridDomain::boundary_index(code);
        const double diff = ui - b[f];
        e += diff * diff / faces[f].theta;
      }
    }
  }
  return e * std::pow(g.spacing(), g.dim() - 2) * g.multiplicity();
}

double dirichlet_energy(const VectorField& field, std::span<const double> weights) {
  require(weights.empty() || static_cast<int>(weights.size()) == field.components(),
          "energy weights must have one entry per component");
  double total = 0.0;
  for (int c = 0; c < field.components(); ++c) {
    const double w = weights.empty() ? 1.0 : weights[static_cast<std::size_t>(c)];
    require(w > 0.0, "energy weights must be strictly positive");
    total += w * component_energy(field, c);
  }
  return total;
}

double l2_norm_sq(const VectorField& field, int c) {
  const auto u = field.values(c);
  double s = 0.0;
  for (double v : u) s += v * v;
  return s * field.domain().cell_volume() * field.domain().multiplicity();
}

// ---------------------------------------------------------------------------
// Solver: conjugate gradients preconditioned by symmetric SOR sweeps.

SolveStats solve_component(VectorField& field, int c, const SolverOptions& options) {
  const GridDomain& g = field.domain();
  const std::size_t n = g.size();
  const int nd = g.directions();
  const std::int32_t* nbr = g.neighbor_table().data();
  const auto faces = g.boundary_faces();
  const auto bvals = field.boundary_values(c);
  const auto fixed = field.fixed_mask();
  auto u = field.values(c);

  std::vector<std::int32_t> free;
  free.reserve(n);
  std::vector<double> diag(n, 1.0), rhs(n, 0.0), x(n, 0.0);
  std::array<bool, kMaxDim> odd{};
  for (int a = 0; a < g.dim(); ++a) odd[a] = field.parity(c, a) == Parity::odd;

  for (std::size_t i = 0; i < n; ++i) {
    if (fixed[i]) continue;
    free.push_back(static_cast<std::int32_t>(i));
    double dsum = 0.0, b = 0.0;
    const std::int32_t* row = nbr + i * static_cast<std::size_t>(nd);
    for (int dir = 0; dir < nd; ++dir) {
      const std::int32_t code = row[dir];
      if (code >= 0) {
        dsum += 1.0;
        if (fixed[static_cast<std::size_t>(code)]) b += u[static_cast<std::size_t>(code)];
      } else if (code == GridDomain::kMirror) {
        if (odd[static_cast<std::size_t>(dir / 2)]) dsum += 2.0;
      } else {
        const std::size_t f = GridDomain::boundary_index(code);
        dsum += 1.0 / faces[f].theta;
        b += bvals[f] / faces[f].theta;
      }
    }
    diag[i] = dsum;
    rhs[i] = b;
    x[i] = u[i];
  }
  SolveStats stats;
  if (free.empty()) return stats;

  double bnorm = 0.0;
  for (auto i : free) bnorm += rhs[static_cast<std::size_t>(i)] * rhs[static_cast<std::size_t>(i)];
  bnorm = std::sqrt(bnorm);
  if (bnorm == 0.0) {
    for (auto i : free) u[static_cast<std::size_t>(i)] = 0.0;
    return stats;
  }

  // Free-only neighbour sum (fixed entries of the iterate vectors stay zero).
  auto neighbor_sum = [&](const std::vector<double>& v, std::size_t i) {
    const std::int32_t* row = nbr + i * static_cast<std::size_t>(nd);
    double s = 0.0;
    for (int dir = 0; dir < nd; ++dir) {
      const std::int32_t code = row[dir];
      if (code >= 0) s += v[static_cast<std::size_t>(code)];
    }
    return s;
  };

  std::vector<double> r(n, 0.0), p(n, 0.0), q(n, 0.0), y(n, 0.0), z(n, 0.0);
  const double omega = options.relaxation;

  auto precondition = [&]() {
    std::fill(y.begin(), y.end(), 0.0);
    std::fill(z.begin(), z.end(), 0.0);
    for (auto ii : free) {
      const auto i = static_cast<std::size_t>(ii);
      y[i] = omega * (r[i] + neighbor_sum(y, i)) / diag[i];
    }
    for (auto it = free.rbegin(); it != free.rend(); ++it) {
      const auto i = static_cast<std::size_t>(*it);
      z[i] = y[i] + omega * neighbor_sum(z, i) / diag[i];
    }
  };

  for (auto ii : free) {
    const auto i = static_cast<std::size_t>(ii);
    r[i] = rhs[i] - diag[i] * x[i] + neighbor_sum(x, i);
  }
  // x holds fixed values for neighbour sums above only through rhs; fixed
  // entries of x must be zero for that sum to be correct.
  precondition();
  double rz = 0.0, rr = 0.0;
  for (auto ii : free) {
    const auto i = static_cast<std::size_t>(ii);
    p[i] = z[i];
    rz += r[i] * z[i];
    rr += r[i] * r[i];
  }

  int max_iter = options.max_iterations;
  if (max_iter <= 0) {
    max_iter = static_cast<int>(50.0 * std::pow(static_cast<double>(free.size()), 1.0 / g.dim())) + 50;
  }
  const double target = options.tolerance * bnorm;
  int it = 0;
  while (std::sqrt(rr) > target && it < max_iter) {
    double pq = 0.0;
    for (auto ii : free) {
      const auto i = static_cast<std::size_t>(ii);
      q[i] = diag[i] * p[i] - neighbor_sum(p, i);
      pq += p[i] * q[i];
    }
    const double alpha = rz / pq;
    rr = 0.0;
    for (auto ii : free) {
      const auto i = static_cast<std::size_t>(ii);
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
      rr += r[i] * r[i];
    }
    ++it;
    if (std::sqrt(rr) <= target) break;
    precondition();
    double rz_new = 0.0;
    for (auto ii : free) {
      const auto i = static_cast<std::size_t>(ii);
      rz_new += r[i] * z[i];
    }
    const double beta = rz_new / rz;
    rz = rz_new;
    for (auto ii : free) {
      const auto i = static_cast<std::size_t>(ii);
      p[i] = z[i] + beta * p[i];
    }
  }
  stats.iterations = it;
  stats.residual = std::sqrt(rr) / bnorm;
  if (std::sqrt(rr) > target) {
    throw ConvergenceError("Laplace solve did not converge", stats.residual, it);
  }
  for (auto ii : free) u[static_cast<std::size_t>(ii)] = x[static_cast<std::size_t>(ii)];
  return stats;
}

std::vector<SolveStats> solve_harmonic(VectorField& field, const SolverOptions& options) {
  std::vector<SolveStats> out;
  for (int c = 0; c < field.components(); ++c) out.push_back(solve_component(field, c, options));
  return out;
}

VectorField laplace_solve(const DomainPtr& domain, int components,
                          const std::vector<std::pair<std::int32_t, std::vector<double>>>& fixed,
                          const VectorField::BoundaryFn& boundary, const SolverOptions& options) {
  VectorField field(domain, components);
  if (boundary) field.set_boundary(boundary);
  for (const auto& [cell, vals] : fixed) {
    require(cell >= 0 && static_cast<std::size_t>(cell) < domain->size(), "fixed cell index out of range");
    require(static_cast<int>(vals.size()) == components, "fixed value must have one entry per component");
    field.set_fixed(cell, true);
    for (int c = 0; c < components; ++c) field.at(c, cell) = vals[static_cast<std::size_t>(c)];
  }
  solve_harmonic(field, options);
  return field;
}

VectorField exterior_harmonic_extension(int dim, double spacing, int components,
                                        const VectorField::BoundaryFn& inner_data, double radius,
                                        double far_radius, std::array<bool, kMaxDim> mirror,
                                        const std::vector<std::array<Parity, kMaxDim>>& parity,
                                        const SolverOptions& options) {
  require(far_radius >= 4.0 * radius, "exterior extension needs R_far >= 4 R");
  GridSpec spec;
  spec.dim = dim;
  spec.radius = far_radius;
  spec.spacing = spacing;
  spec.shape = Shape::annulus;
  spec.inner_radius = radius;
  spec.mirror = mirror;
  VectorField field(make_grid(spec), components);
  for (int c = 0; c < components && static_cast<std::size_t>(c) < parity.size(); ++c)
    for (int a = 0; a < dim; ++a) field.set_parity(c, a, parity[static_cast<std::size_t>(c)][static_cast<std::size_t>(a)]);
  const double split = 0.5 * (radius + far_radius);
  field.set_boundary([&](const Point& x, std::span<double> out) {
    if (std::sqrt(squared_norm(x, dim)) < split) {
      inner_data(x, out);
    } else {
      std::fill(out.begin(), out.end(), 0.0);
    }
  });
  solve_harmonic(field, options);
  return field;
}

VectorField exterior_harmonic_extension(const VectorField& inner, double radius, double far_radius,
                                        const SolverOptions& options) {
  const GridDomain& g = inner.domain();
  std::vector<std::array<Parity, kMaxDim>> parity(static_cast<std::size_t>(inner.components()));
  for (int c = 0; c < inner.components(); ++c)
    for (int a = 0; a < g.dim(); ++a) parity[static_cast<std::size_t>(c)][static_cast<std::size_t>(a)] = inner.parity(c, a);
  return exterior_harmonic_extension(
      g.dim(), g.spacing(), inner.components(),
      [&](const Point& x, std::span<double> out) {
        for (int c = 0; c < inner.components(); ++c) out[static_cast<std::size_t>(c)] = inner.sample(c, x);
      },
      radius, far_radius, g.spec().mirror, parity, options);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

nlohmann::json header_json(const VectorField& field, DumpFormat format) {
  const GridSpec& s = field.domain().spec();
  nlohmann::json mirror = nlohmann::json::array();
  for (int a = 0; a < s.dim; ++a) mirror.push_back(s.mirror[a]);
  nlohmann::json parity = nlohmann::json::array();
  for (int c = 0; c < field.components(); ++c) {
    std::string p;
    for (int a = 0; a < s.dim; ++a) p += field.parity(c, a) == Parity::odd ? 'o' : 'e';
    parity.push_back(p);
  }
  return {{"format", "freebound-field"},
          {"version", 1},
          {"encoding", format == DumpFormat::binary ? "binary" : "csv"},
          {"dim", s.dim},
          {"R", s.radius},
          {"h", s.spacing},
          {"k", field.components()},
          {"shape", to_string(s.shape)},
          {"inner_radius", s.inner_radius},
          {"fit", s.fit == BoundaryFit::fitted ? "fitted" : "staircase"},
          {"mirror", mirror},
          {"parity", parity},
          {"cells", field.domain().size()},
          {"boundary_faces", field.domain().boundary_faces().size()}};
}

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little, "dump writer assumes a little-endian host");
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ValidationError("truncated field dump");
  return value;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_field(std::ostream& out, const VectorField& field, DumpFormat format) {
  const GridDomain& g = field.domain();
  const int d = g.dim();
  out << header_json(field, format).dump() << '\n';
  if (format == DumpFormat::binary) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto cell = static_cast<std::int32_t>(i);
      const LatticeIndex li = g.lattice_index(cell);
      for (int a = 0; a < d; ++a) put_le<std::int32_t>(out, li[a]);
      put_le<std::uint8_t>(out, field.is_fixed(cell) ? 1 : 0);
      for (int c = 0; c < field.components(); ++c) put_le<double>(out, field.at(c, cell));
    }
    for (std::size_t f = 0; f < g.boundary_faces().size(); ++f)
      for (int c = 0; c < field.components(); ++c) put_le<double>(out, field.boundary_values(c)[f]);
    return;
  }
  out << "kind,index";
  for (int a = 0; a < d; ++a) out << ",j" << a;
  out << ",fixed";
  for (int c = 0; c < field.components(); ++c) out << ",w" << c;
  out << '\n';
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto cell = static_cast<std::int32_t>(i);
    const LatticeIndex li = g.lattice_index(cell);
    out << "cell," << i;
    for (int a = 0; a < d; ++a) out << ',' << li[a];
    out << ',' << (field.is_fixed(cell) ? 1 : 0);
    for (int c = 0; c < field.components(); ++c) out << ',' << fmt_double(field.at(c, cell));
    out << '\n';
  }
  for (std::size_t f = 0; f < g.boundary_faces().size(); ++f) {
    const BoundaryFace& face = g.boundary_faces()[f];
    out << "face," << f;
    for (int a = 0; a < d; ++a) out << ',' << (a == 0 ? face.cell : a == 1 ? face.direction : 0);
    out << ",0";
    for (int c = 0; c < field.components(); ++c) out << ',' << fmt_double(field.boundary_values(c)[f]);
    out << '\n';
  }
}

VectorField read_field(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty field dump");
  const auto header = nlohmann::json::parse(line);
  if (header.at("format") != "freebound-field") throw ValidationError("not a freebound field dump");
  GridSpec spec;
  spec.dim = header.at("dim");
  spec.radius = header.at("R");
  spec.spacing = header.at("h");
  spec.shape = shape_from_string(header.at("shape"));
  spec.inner_radius = header.at("inner_radius");
  spec.fit = header.at("fit") == "fitted" ? BoundaryFit::fitted : BoundaryFit::staircase;
  for (int a = 0; a < spec.dim; ++a) spec.mirror[a] = header.at("mirror").at(a);
  const int k = header.at("k");
  VectorField field(make_grid(spec), k);
  const GridDomain& g = field.domain();
  if (header.at("cells") != g.size() || header.at("boundary_faces") != g.boundary_faces().size())
    throw ValidationError("field dump does not match its declared grid");
  for (int c = 0; c < k; ++c) {
    const std::string p = header.at("parity").at(c);
    for (int a = 0; a < spec.dim; ++a) field.set_parity(c, a, p[static_cast<std::size_t>(a)] == 'o' ? Parity::odd : Parity::even);
  }
  const int d = spec.dim;
  if (header.at("encoding") == "binary") {
    for (std::size_t i = 0; i < g.size(); ++i) {
      LatticeIndex li{};
      for (int a = 0; a < d; ++a) li[a] = get_le<std::int32_t>(in);
      const auto cell = static_cast<std::int32_t>(i);
      if (g.locate(li) != cell) throw ValidationError("field dump cell order mismatch");
      field.set_fixed(cell, get_le<std::uint8_t>(in) != 0);
      for (int c = 0; c < k; ++c) field.at(c, cell) = get_le<double>(in);
    }
    for (std::size_t f = 0; f < g.boundary_faces().size(); ++f)
      for (int c = 0; c < k; ++c) field.boundary_values(c)[f] = get_le<double>(in);
    return field;
  }
  std::getline(in, line);  // column header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> cols;
    while (std::getline(ss, tok, ',')) cols.push_back(tok);
    if (cols.size() != static_cast<std::size_t>(3 + d + k)) throw ValidationError("malformed field dump row");
    const std::size_t index = std::stoul(cols[1]);
    const std::size_t value_col = static_cast<std::size_t>(3 + d);
    if (cols[0] == "cell") {
      const auto cell = static_cast<std::int32_t>(index);
      field.set_fixed(cell, cols[static_cast<std::size_t>(2 + d)] == "1");
      for (int c = 0; c < k; ++c) field.at(c, cell) = std::stod(cols[value_col + static_cast<std::size_t>(c)]);
    } else {
      for (int c = 0; c < k; ++c) field.boundary_values(c)[index] = std::stod(cols[value_col + static_cast<std::size_t>(c)]);
    }
  }
  return field;
}

}  // namespace freebound
