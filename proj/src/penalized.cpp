#include "freebound/penalized.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "freebound/error.hpp"

namespace freebound {

double f_m_eta(double t, const PenaltyParams& p) {
  require(t >= 0.0, "support measure must be nonnegative");
  return t > p.m ? (t - p.m) / p.eta : p.eta * (t - p.m);
}

void validate(const PenaltyParams& p, double domain_measure) {
  require(p.eta > 0.0 && p.eta <= 1.0, "penalty eta must lie in (0, 1]");
  require(p.m > 0.0, "target measure m must be positive");
  require(p.m < domain_measure, "target measure m must be below |D| = " + std::to_string(domain_measure));
  require(p.nondeg_scale >= 0.0, "nondeg_scale must be nonnegative");
}

BoundaryDatum BoundaryDatum::constant(const std::vector<double>& value) {
  require(!value.empty(), "constant datum needs at least one component");
  BoundaryDatum b;
  b.components = static_cast<int>(value.size());
  b.g = [value](const Point&, std::span<double> out) { std::copy(value.begin(), value.end(), out.begin()); };
  b.parity.assign(value.size(), {});
  for (auto& p : b.parity) p.fill(Parity::even);
  return b;
}

BoundaryDatum BoundaryDatum::linear(const Matrix& A) {
  BoundaryDatum b;
  b.components = A.rows;
  b.g = [A](const Point& x, std::span<double> out) {
    for (int r = 0; r < A.rows; ++r) {
      double s = 0.0;
      for (int c = 0; c < A.cols; ++c) s += A(r, c) * x[static_cast<std::size_t>(c)];
      out[static_cast<std::size_t>(r)] = s;
    }
  };
  b.parity.assign(static_cast<std::size_t>(A.rows), {});
  for (int r = 0; r < A.rows; ++r) {
    for (int a = 0; a < kMaxDim; ++a) {
      bool others_zero = true;
      for (int c = 0; c < A.cols; ++c)
        if (c != a && A(r, c) != 0.0) others_zero = false;
      const bool own_zero = a >= A.cols || A(r, a) == 0.0;
      auto& slot = b.parity[static_cast<std::size_t>(r)][static_cast<std::size_t>(a)];
      if (own_zero) slot = Parity::even;
      else if (others_zero) slot = Parity::odd;
    }
  }
  return b;
}

bool BoundaryDatum::reflects(int axis) const {
  for (const auto& p : parity)
    if (!p[static_cast<std::size_t>(axis)].has_value()) return false;
  return true;
}

namespace {

double squared_distance(const Point& a, const Point& b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// Gradient at a support cell of the scalar s, never differencing across the
// dead set: axes with a dead neighbour use the one-sided 3-point formula from
// the other side.
template <typename Value, typename Mirror, typename Boundary>
Point support_gradient(const GridDomain& g, const ContactMask& dead, std::int32_t cell, Value&& value,
                       Mirror&& mirror_value, Boundary&& boundary_value) {
  const double h = g.spacing();
  Point grad{};
  auto side = [&](std::int32_t from, int dir, double& v, double& dist, bool& is_dead, std::int32_t& next) {
    const std::int32_t code = g.neighbor(from, dir);
    next = -1;
    is_dead = false;
    dist = h;
    if (code >= 0) {
      is_dead = dead.contains(code);
      v = value(code);
      next = code;
    } else if (code == GridDomain::kMirror) {
      v = mirror_value(from, dir / 2);
    } else {
      const std::size_t f = GridDomain::boundary_index(code);
      v = boundary_value(f);
      dist = g.boundary_faces()[f].theta * h;
    }
  };
  const double u0 = value(cell);
  for (int a = 0; a < g.dim(); ++a) {
    double vm, vp, dm, dp;
    bool dead_m, dead_p;
    std::int32_t nm, np;
    side(cell, 2 * a, vm, dm, dead_m, nm);
    side(cell, 2 * a + 1, vp, dp, dead_p, np);
    double der = 0.0;
    if (!dead_m && !dead_p) {
      der = (vp - vm) / (dp + dm);
    } else if (dead_m != dead_p) {
      // One-sided from the support side (direction `sign`).
      const double sign = dead_m ? 1.0 : -1.0;
      const std::int32_t n1 = dead_m ? np : nm;
      const double v1 = dead_m ? vp : vm;
      const double d1 = dead_m ? dp : dm;
      bool two_step = false;
      if (n1 >= 0 && d1 == h) {
        double v2, d2;
        bool dead2;
        std::int32_t n2;
        side(n1, dead_m ? 2 * a + 1 : 2 * a, v2, d2, dead2, n2);
        if (!dead2 && d2 == h) {
          der = sign * (-3.0 * u0 + 4.0 * v1 - v2) / (2.0 * h);
          two_step = true;
        }
      }
      if (!two_step) der = sign * (v1 - u0) / d1;
    } else {
      der = u0 / h;  // sliver between two dead cells
    }
    grad[static_cast<std::size_t>(a)] = der;
  }
  return grad;
}

struct Interface {
  std::vector<std::int32_t> revive;  // dead cells with a support neighbour
  std::vector<std::int32_t> kill;    // support cells with a dead neighbour
};

Interface find_interface(const GridDomain& g, const ContactMask& dead) {
  Interface out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto cell = static_cast<std::int32_t>(i);
    const bool is_dead = dead.contains(cell);
    for (int dir = 0; dir < g.directions(); ++dir) {
      const std::int32_t nb = g.neighbor(cell, dir);
      if (nb >= 0 && dead.contains(nb) != is_dead) {
        (is_dead ? out.revive : out.kill).push_back(cell);
        break;
      }
    }
  }
  return out;
}

double diag_entry(const VectorField& U, int c, std::int32_t cell) {
  const GridDomain& g = U.domain();
  double d = 0.0;
  for (int dir = 0; dir < g.directions(); ++dir) {
    const std::int32_t code = g.neighbor(cell, dir);
    if (code >= 0) d += 1.0;
    else if (code == GridDomain::kMirror) d += U.parity(c, dir / 2) == Parity::odd ? 2.0 : 0.0;
    else d += 1.0 / g.boundary_faces()[GridDomain::boundary_index(code)].theta;
  }
  return d;
}

// Neighbour sum (the value a free cell would relax to, times its diagonal).
double neighbor_pull(const VectorField& U, int c, std::int32_t cell) {
  const GridDomain& g = U.domain();
  double s = 0.0;
  for (int dir = 0; dir < g.directions(); ++dir) {
    const std::int32_t code = g.neighbor(cell, dir);
    if (code >= 0) {
      s += U.at(c, code);
    } else if (GridDomain::is_boundary_code(code)) {
      const std::size_t f = GridDomain::boundary_index(code);
      s += U.boundary_values(c)[f] / g.boundary_faces()[f].theta;
    }
  }
  return s;
}

void apply_dead(VectorField& U, const ContactMask& dead) {
  U.clear_fixed();
  for (std::size_t i = 0; i < dead.flags().size(); ++i) {
    if (!dead.flags()[i]) continue;
    const auto cell = static_cast<std::int32_t>(i);
    U.set_fixed(cell, true);
    for (int c = 0; c < U.components(); ++c) U.at(c, cell) = 0.0;
  }
}

}  // namespace

PenalizedResult minimize_penalized(const DomainPtr& domain, const BoundaryDatum& datum, const PenaltyParams& params,
                                   const PenalizedOptions& options) {
  const GridDomain& g = *domain;
  const double vol = g.cell_volume() * g.multiplicity();
  const double total_measure = g.measure();
  validate(params, total_measure);
  require(datum.components >= 1 && datum.g, "penalized solve needs a boundary datum");
  for (int a = 0; a < g.dim(); ++a)
    if (g.mirrored(a)) require(datum.reflects(a), "boundary datum has no parity along a mirrored axis");

  PenalizedResult out;
  // Harmonic extension h of g.
  VectorField h(domain, datum.components);
  for (int c = 0; c < datum.components; ++c)
    for (int a = 0; a < g.dim(); ++a)
      h.set_parity(c, a, datum.parity[static_cast<std::size_t>(c)][static_cast<std::size_t>(a)].value_or(Parity::even));
  h.set_boundary(datum.g);
  bool boundary_nonzero = false;
  for (int c = 0; c < datum.components; ++c)
    for (double v : h.boundary_values(c))
      if (v != 0.0) boundary_nonzero = true;
  require(boundary_nonzero, "boundary datum g must be nonzero on the boundary");
  solve_harmonic(h, options.solver);
  const double energy_h = dirichlet_energy(h);

  SolveReport& rep = out.report;
  rep.harmonic_energy = energy_h;
  rep.lower_bound = energy_h - params.m;
  rep.upper_bound = energy_h + f_m_eta(total_measure, params);

  const std::size_t n = g.size();
  const std::size_t target_dead =
      static_cast<std::size_t>(std::max<long long>(0, std::llround((total_measure - params.m) / vol)));

  ContactMask dead(domain);
  if (options.seed != nullptr) {
    require(options.seed->domain_ptr() == domain, "seed dead set belongs to a different grid");
    dead = *options.seed;
  } else if (target_dead > 0) {
    // Seed at the minimum of |h|; ties by distance to the centre, then index.
    std::vector<double> mag(n, 0.0);
    for (int c = 0; c < datum.components; ++c)
      for (std::size_t i = 0; i < n; ++i) mag[i] += h.values(c)[i] * h.values(c)[i];
    const Point origin{};
    std::size_t arg = 0;
    for (std::size_t i = 1; i < n; ++i) {
      const auto ci = static_cast<std::int32_t>(i), ca = static_cast<std::int32_t>(arg);
      if (std::tuple(mag[i], squared_distance(g.center(ci), origin, g.dim())) <
          std::tuple(mag[arg], squared_distance(g.center(ca), origin, g.dim())))
        arg = i;
    }
    Point x0 = g.center(static_cast<std::int32_t>(arg));
    for (int a = 0; a < g.dim(); ++a)
      if (g.mirrored(a)) x0[static_cast<std::size_t>(a)] = 0.0;  // orbit centre
    std::vector<std::tuple<double, double, std::int32_t>> keyed(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto cell = static_cast<std::int32_t>(i);
      const Point c = g.center(cell);
      keyed[i] = {squared_distance(c, x0, g.dim()), squared_distance(c, origin, g.dim()), cell};
    }
    const std::size_t take = std::min(target_dead, n - 1);
    std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(take), keyed.end());
    for (std::size_t i = 0; i < take; ++i) dead.insert(std::get<2>(keyed[i]));
  }

  VectorField U = options.warm != nullptr ? *options.warm : h;
  require(U.domain_ptr() == domain && U.components() == datum.components, "warm start does not match the problem");
  for (int c = 0; c < datum.components; ++c) {
    std::copy(h.boundary_values(c).begin(), h.boundary_values(c).end(), U.boundary_values(c).begin());
    for (int a = 0; a < g.dim(); ++a) U.set_parity(c, a, h.parity(c, a));
  }
  auto evaluate = [&](VectorField& field, const ContactMask& dd) {
    apply_dead(field, dd);
    solve_harmonic(field, options.solver);
    return dirichlet_energy(field) + f_m_eta(static_cast<double>(n - dd.count()) * vol, params);
  };
  double J = evaluate(U, dead);
  rep.history.push_back(J);

  const double scale = std::pow(g.spacing(), g.dim() - 2) * g.multiplicity();
  const double kappa_threshold = params.nondeg_scale * params.eta * g.spacing();
  std::size_t batch = 0;
  bool stable = false;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    const std::size_t alive = n - dead.count();
    Interface iface = find_interface(g, dead);
    if (dead.empty()) {
      // Any cell may start a dead set.
      iface.kill.resize(n);
      std::iota(iface.kill.begin(), iface.kill.end(), 0);
    }
    std::vector<std::pair<double, std::int32_t>> gains, costs;  // signed energy changes
    for (std::int32_t r : iface.revive) {
      double gain = 0.0;
      for (int c = 0; c < U.components(); ++c) {
        const double pull = neighbor_pull(U, c, r);
        gain += pull * pull / diag_entry(U, c, r);
      }
      gains.emplace_back(-gain * scale, r);
    }
    std::vector<std::int32_t> degenerate;
    for (std::int32_t a : iface.kill) {
      double cost = 0.0, norm = 0.0;
      for (int c = 0; c < U.components(); ++c) {
        const double u = U.at(c, a);
        cost += diag_entry(U, c, a) * u * u;
        norm += u * u;
      }
      costs.emplace_back(cost * scale, a);
      if (kappa_threshold > 0.0 && !dead.empty() && std::sqrt(norm) < kappa_threshold) degenerate.push_back(a);
    }
    std::sort(gains.begin(), gains.end());
    std::sort(costs.begin(), costs.end());
    if (batch == 0) batch = std::max<std::size_t>(1, std::max(gains.size(), costs.size()) / 4);

    auto penalty_at = [&](std::size_t alive_cells) { return f_m_eta(static_cast<double>(alive_cells) * vol, params); };
    const double f_now = penalty_at(alive);
    enum class Move { none, revive, kill, swap, cleanup } move = Move::none;
    std::size_t take = 0;
    double best = 0.0;
    if (!degenerate.empty()) {
      move = Move::cleanup;
      take = degenerate.size();
      best = -1.0;
    } else {
      double acc = 0.0;
      for (std::size_t k = 0; k < std::min(batch, gains.size()); ++k) {
        acc += gains[k].first;
        const double pred = acc + penalty_at(alive + k + 1) - f_now;
        if (pred < best) best = pred, move = Move::revive, take = k + 1;
      }
      acc = 0.0;
      for (std::size_t k = 0; k < std::min({batch, costs.size(), alive - 1}); ++k) {
        acc += costs[k].first;
        const double pred = acc + penalty_at(alive - k - 1) - f_now;
        if (pred < best) best = pred, move = Move::kill, take = k + 1;
      }
      acc = 0.0;
      for (std::size_t k = 0; k < std::min({batch, gains.size(), costs.size()}); ++k) {
        acc += gains[k].first + costs[k].first;
        if (acc < best) best = acc, move = Move::swap, take = k + 1;
      }
    }
    if (move == Move::none) {
      stable = true;
      break;
    }
    ContactMask trial = dead;
    if (move == Move::cleanup) {
      for (std::int32_t a : degenerate) trial.insert(a);
    } else {
      for (std::size_t k = 0; k < take; ++k) {
        if (move == Move::revive || move == Move::swap) trial.erase(gains[k].second);
        if (move == Move::kill || move == Move::swap) trial.insert(costs[k].second);
      }
    }
    VectorField next = U;
    const double J_next = evaluate(next, trial);
    if (J_next < J - 1e-12 * std::abs(J)) {
      U = std::move(next);
      dead = std::move(trial);
      J = J_next;
      rep.history.push_back(J);
      if (move != Move::cleanup) batch = std::max<std::size_t>(batch, take);
    } else if (move == Move::cleanup) {
      // Verified cleanup failed: disable it for the rest of the run.
      degenerate.clear();
      break;
    } else {
      if (take == 1) {
        stable = true;
        break;
      }
      batch = std::max<std::size_t>(1, take / 2);
    }
  }
  rep.iterations = it;
  rep.converged = stable;

  // The harmonic extension (empty dead set) is always admissible.
  if (rep.upper_bound < J) {
    U = h;
    dead = ContactMask(domain);
    J = rep.upper_bound;
    rep.fallback = true;
    rep.history.push_back(J);
  }
  rep.energy = dirichlet_energy(U);
  rep.support_measure = static_cast<double>(n - dead.count()) * vol;
  rep.penalty = f_m_eta(rep.support_measure, params);
  rep.total = rep.energy + rep.penalty;
  if (options.compute_multipliers && !dead.empty()) {
    try {
      rep.lambda_flux = lambda_flux(U, dead);
    } catch (const ValidationError&) {
    }
    try {
      rep.lambda_shape = lambda_shape(U, dead);
    } catch (const ValidationError&) {
    }
  }
  out.field = std::move(U);
  out.dead = std::move(dead);
  out.harmonic = std::move(h);
  return out;
}

double lambda_flux(const VectorField& U, const ContactMask& dead) {
  require(dead.domain_ptr() == U.domain_ptr(), "dead set belongs to a different grid");
  const GridDomain& g = U.domain();
  const Interface iface = find_interface(g, dead);
  require(!dead.empty() && !iface.kill.empty(), "lambda_flux needs a nonempty free boundary");
  const int k = U.components();
  const int d = g.dim();
  const double h = g.spacing();
  auto norm_at = [&](std::int32_t cell) {
    double s = 0.0;
    for (int c = 0; c < k; ++c) s += U.at(c, cell) * U.at(c, cell);
    return std::sqrt(s);
  };
  auto gradient = [&](std::int32_t cell) {
    return support_gradient(
        g, dead, cell, [&](std::int32_t j) { return dead.contains(j) ? 0.0 : norm_at(j); },
        [&](std::int32_t j, int) { return norm_at(j); },  // |U| is even under every reflection
        [&](std::size_t f) {
          double s = 0.0;
          for (int c = 0; c < k; ++c) s += U.boundary_values(c)[f] * U.boundary_values(c)[f];
          return std::sqrt(s);
        });
  };
  auto magnitude = [&](const Point& v) {
    double s = 0.0;
    for (int a = 0; a < d; ++a) s += v[static_cast<std::size_t>(a)] * v[static_cast<std::size_t>(a)];
    return std::sqrt(s);
  };
  double acc = 0.0;
  for (std::int32_t cell : iface.kill) {
    const Point grad = gradient(cell);
    const double G1 = magnitude(grad);
    double G = G1;
    if (G1 > 0.0) {
      // Extrapolate |grad |U|| linearly along the normal to the zero level
      // |U| = 0, a distance |U| / G1 behind the cell centre. The slope comes
      // from the neighbour along the axis closest to the normal.
      int axis = 0;
      for (int a = 1; a < d; ++a)
        if (std::abs(grad[static_cast<std::size_t>(a)]) > std::abs(grad[static_cast<std::size_t>(axis)])) axis = a;
      const double na = grad[static_cast<std::size_t>(axis)] / G1;
      const std::int32_t next = g.neighbor(cell, 2 * axis + (na > 0.0 ? 1 : 0));
      if (next >= 0 && !dead.contains(next)) {
        const double G2 = magnitude(gradient(next));
        const double t = std::min(2.0, norm_at(cell) / G1 / (h * std::abs(na)));
        G = std::max(0.0, G1 + (G1 - G2) * t);
      }
    }
    acc += G * G;
  }
  return acc / static_cast<double>(iface.kill.size());
}

Deformation Deformation::localized_dilation(const Point& center, double r1, double r2, int dim) {
  require(r2 > r1 && r1 >= 0.0, "dilation cutoff needs 0 <= r1 < r2");
  Deformation xi;
  xi.eval = [=](const Point& x, Point& v, std::array<Point, kMaxDim>& jac) {
    v = Point{};
    for (auto& row : jac) row = Point{};
    Point y{};
    double r2sum = 0.0;
    for (int i = 0; i < dim; ++i) {
      y[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] - center[static_cast<std::size_t>(i)];
      r2sum += y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
    }
    const double r = std::sqrt(r2sum);
    if (r >= r2) return;
    double zeta = 1.0, dzeta = 0.0;
    if (r > r1) {
      const double t = (r - r1) / (r2 - r1);
      zeta = 1.0 - t * t * (3.0 - 2.0 * t);
      dzeta = -6.0 * t * (1.0 - t) / (r2 - r1);
    }
    for (int i = 0; i < dim; ++i) {
      v[static_cast<std::size_t>(i)] = zeta * y[static_cast<std::size_t>(i)];
      for (int j = 0; j < dim; ++j) {
        double e = (i == j) ? zeta : 0.0;
        if (r > 0.0) e += dzeta * y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)] / r;
        jac[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = e;
      }
    }
  };
  return xi;
}

namespace {

template <typename F>
void for_support_cells(const VectorField& U, const ContactMask& dead, F&& f) {
  const GridDomain& g = U.domain();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto cell = static_cast<std::int32_t>(i);
    if (!dead.contains(cell)) f(cell);
  }
}

}  // namespace

double shape_variation(const VectorField& U, const ContactMask& dead, const Deformation& xi) {
  require(dead.domain_ptr() == U.domain_ptr(), "dead set belongs to a different grid");
  const GridDomain& g = U.domain();
  const int d = g.dim();
  const double w = g.cell_volume() * g.multiplicity();
  double total = 0.0;
  Point v;
  std::array<Point, kMaxDim> jac;
  for_support_cells(U, dead, [&](std::int32_t cell) {
    xi.eval(g.center(cell), v, jac);
    double div = 0.0, jac_max = 0.0;
    for (int i = 0; i < d; ++i) {
      div += jac[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
      for (int j = 0; j < d; ++j) jac_max = std::max(jac_max, std::abs(jac[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]));
    }
    if (jac_max == 0.0) return;
    for (int c = 0; c < U.components(); ++c) {
      const Point grad = support_gradient(
          g, dead, cell, [&](std::int32_t j) { return U.at(c, j); },
          [&](std::int32_t j, int axis) { return U.mirror_sign(c, axis) * U.at(c, j); },
          [&](std::size_t f) { return U.boundary_values(c)[f]; });
      double quad = 0.0, sq = 0.0;
      for (int i = 0; i < d; ++i) {
        sq += grad[static_cast<std::size_t>(i)] * grad[static_cast<std::size_t>(i)];
        for (int j = 0; j < d; ++j)
          quad += grad[static_cast<std::size_t>(i)] * jac[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                  grad[static_cast<std::size_t>(j)];
      }
      total += (-2.0 * quad + sq * div) * w;
    }
  });
  return total;
}

double support_divergence(const VectorField& U, const ContactMask& dead, const Deformation& xi) {
  const GridDomain& g = U.domain();
  const double w = g.cell_volume() * g.multiplicity();
  double total = 0.0;
  Point v;
  std::array<Point, kMaxDim> jac;
  for_support_cells(U, dead, [&](std::int32_t cell) {
    xi.eval(g.center(cell), v, jac);
    for (int i = 0; i < g.dim(); ++i) total += jac[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] * w;
  });
  return total;
}

double lambda_shape(const VectorField& U, const ContactMask& dead, const Deformation* xi, double degeneracy_tol) {
  require(dead.domain_ptr() == U.domain_ptr(), "dead set belongs to a different grid");
  const GridDomain& g = U.domain();
  const int d = g.dim();
  Deformation fallback;
  if (xi == nullptr) {
    require(!dead.empty(), "default deformation needs a nonempty dead set");
    Point centroid{};
    const auto members = dead.members();
    for (std::int32_t cell : members) {
      const Point c = g.center(cell);
      for (int a = 0; a < d; ++a) centroid[static_cast<std::size_t>(a)] += c[static_cast<std::size_t>(a)];
    }
    for (int a = 0; a < d; ++a) {
      centroid[static_cast<std::size_t>(a)] /= static_cast<double>(members.size());
      if (g.mirrored(a)) centroid[static_cast<std::size_t>(a)] = 0.0;
    }
    double reach = 0.0;
    for (std::int32_t cell : members) reach = std::max(reach, std::sqrt(squared_distance(g.center(cell), centroid, d)));
    double gap;
    if (g.shape() == Shape::box) {
      double m = 0.0;
      for (int a = 0; a < d; ++a) m = std::max(m, std::abs(centroid[static_cast<std::size_t>(a)]));
      gap = g.radius() - m;
    } else {
      gap = g.radius() - std::sqrt(squared_distance(centroid, Point{}, d));
    }
    const double h = g.spacing();
    const double r1 = reach + 2.0 * h;
    const double r2 = reach + 0.5 * (gap - reach);
    require(r2 > r1 + h, "dead set too close to the outer boundary for the default deformation");
    fallback = Deformation::localized_dilation(centroid, r1, r2, d);
    xi = &fallback;
  }
  const double den = support_divergence(U, dead, *xi);
  // Scale for the degeneracy test: int_Omega |div xi|.
  double abs_div = 0.0;
  {
    const double w = g.cell_volume() * g.multiplicity();
    Point v;
    std::array<Point, kMaxDim> jac;
    for_support_cells(U, dead, [&](std::int32_t cell) {
      xi->eval(g.center(cell), v, jac);
      double div = 0.0;
      for (int i = 0; i < d; ++i) div += jac[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
      abs_div += std::abs(div) * w;
    });
  }
  require(abs_div > 0.0 && std::abs(den) > degeneracy_tol * abs_div,
          "degenerate deformation: the support integral of div xi vanishes");
  return -shape_variation(U, dead, *xi) / den;
}

SaturationResult eta_saturation_search(const DomainPtr& domain, const BoundaryDatum& g, double m,
                                       const std::vector<double>& etas, const PenalizedOptions& options) {
  require(!etas.empty(), "eta grid must be nonempty");
  for (std::size_t i = 1; i < etas.size(); ++i) require(etas[i] < etas[i - 1], "eta grid must be strictly decreasing");
  require(m < domain->measure(), "target measure m must be below |D|");
  SaturationResult out;
  out.cell_volume = domain->cell_volume() * domain->multiplicity();
  for (double eta : etas) {
    // Every eta starts from the same measure-m seed so results do not depend
    // on the order of the grid.
    PenalizedResult r = minimize_penalized(domain, g, PenaltyParams{m, eta, 0.0}, options);
    out.etas.push_back(eta);
    out.support_measures.push_back(r.report.support_measure);
    out.saturated.push_back(std::abs(r.report.support_measure - m) <= out.cell_volume * (1.0 + 1e-9));
    out.reports.push_back(r.report);
  }
  // Largest eta from which every smaller grid value is saturated.
  for (std::size_t i = etas.size(); i-- > 0;) {
    if (!out.saturated[i]) break;
    out.eta_tilde = etas[i];
    out.found = true;
  }
  return out;
}

}  // namespace freebound
