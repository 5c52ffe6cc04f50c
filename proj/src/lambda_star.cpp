#include "freebound/lambda_star.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "freebound/error.hpp"
#include "quadrature.hpp"

namespace freebound {

namespace {

using quad::integrate;
using quad::unit_ball_volume;

struct Evaluation {
  double value = std::numeric_limits<double>::infinity();
  CapacitarySolution solution;
  std::vector<double> axes;
};

LambdaStarEstimate make_estimate(const LinearDatum& datum, const GridDomain& g, CapacitarySolution&& sol,
                                 LambdaMethod method) {
  LambdaStarEstimate est;
  est.datum = datum;
  est.method = method;
  est.R_used = g.radius();
  est.h_used = g.spacing();
  est.contact_measure = sol.contact.measure();
  est.value = sol.energy / est.contact_measure;
  est.contact = std::move(sol.contact);
  est.field = std::move(sol.field);
  est.lower_bound = analytic_lower_bound(datum);
  return est;
}

}  // namespace

std::string to_string(LambdaMethod method) {
  switch (method) {
    case LambdaMethod::parametric:
      return "parametric";
    case LambdaMethod::exchange:
      return "exchange";
    case LambdaMethod::rank1_exact:
      return "rank1_exact";
  }
  return "parametric";
}

std::string to_string(ContactFamily family) { return family == ContactFamily::ball ? "ball" : "ellipsoid"; }

ContactFamily family_from_string(const std::string& name) {
  if (name == "ball") return ContactFamily::ball;
  if (name == "ellipsoid") return ContactFamily::ellipsoid;
  throw ValidationError("unknown contact family '" + name + "' (expected ball or ellipsoid)");
}

double analytic_lower_bound(const LinearDatum& datum) {
  double lb = datum.frob_sq;
  const int n = datum.rank;
  if (n >= 3) lb = std::max(lb, datum.gram_eigs.back() * (1.0 + n * (n - 2.0)));
  return lb;
}

LambdaStarEstimate rank_one_exact(const LinearDatum& datum) {
  require(datum.rank == 1, "rank_one_exact needs rank(A) = 1, got rank " + std::to_string(datum.rank));
  // W = A1 y on [-1/2, 1/2], constant outside: energy = |A1|^2 * |K| with |K| = 1.
  double energy = 0.0;
  for (int r = 0; r < datum.A1.rows; ++r) energy += datum.A1(r, 0) * datum.A1(r, 0);
  LambdaStarEstimate est;
  est.datum = datum;
  est.method = LambdaMethod::rank1_exact;
  est.value = energy;
  est.contact_measure = 1.0;
  est.history = {energy};
  est.lower_bound = datum.frob_sq;
  return est;
}

DomainPtr reduced_domain(int dim, const LambdaOptions& options) {
  GridSpec spec;
  spec.dim = dim;
  spec.radius = options.radius;
  spec.spacing = options.spacing;
  spec.shape = Shape::ball;
  spec.fit = options.fit;
  for (int a = 0; a < dim; ++a) spec.mirror[static_cast<std::size_t>(a)] = options.use_symmetry;
  return make_grid(spec);
}

std::size_t unit_measure_cells(const GridDomain& g) {
  const double per_cell = g.cell_volume() * g.multiplicity();
  return static_cast<std::size_t>(std::llround(1.0 / per_cell));
}

ContactMask ellipsoid_contact(const DomainPtr& domain, const std::vector<double>& semi_axes) {
  const int n = domain->dim();
  require(semi_axes.empty() || static_cast<int>(semi_axes.size()) == n, "one semi-axis per dimension");
  const std::size_t count = unit_measure_cells(*domain);
  require(count >= 1, "grid too coarse to represent a unit-measure contact set");
  std::vector<double> inv(static_cast<std::size_t>(n), 1.0);
  for (int i = 0; i < n && !semi_axes.empty(); ++i) inv[static_cast<std::size_t>(i)] = 1.0 / semi_axes[static_cast<std::size_t>(i)];
  ContactMask K = nearest_cells(domain, count, [&](const Point& y) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double t = y[static_cast<std::size_t>(i)] * inv[static_cast<std::size_t>(i)];
      s += t * t;
    }
    return s;
  });
  for (const BoundaryFace& f : domain->boundary_faces())
    require(!K.contains(f.cell), "unit-measure contact set does not fit inside B_R at this resolution");
  return K;
}

LambdaStarEstimate lambda_star_parametric(const LinearDatum& datum, const LambdaOptions& options,
                                          const std::vector<double>& initial_axes) {
  require(datum.rank >= 2, "parametric search needs rank(A) >= 2; use rank_one_exact");
  const int n = datum.rank;
  const DomainPtr domain = reduced_domain(n, options);
  require(unit_measure_cells(*domain) >= 8, "grid too coarse to represent a unit-measure contact set");
  const ContactProblem problem = ContactProblem::diagonal(datum);

  int solves = 0;
  Evaluation best;
  VectorField warm;
  bool have_warm = false;
  auto evaluate = [&](const std::vector<double>& axes) {
    ContactMask K = ellipsoid_contact(domain, axes);
    CapacitarySolution sol = solve_contact(domain, K, problem, options.solver, have_warm ? &warm : nullptr);
    ++solves;
    warm = sol.field;
    have_warm = true;
    const double v = sol.energy / K.measure();
    if (v < best.value) {
      best.value = v;
      best.solution = std::move(sol);
      best.axes = axes;
    }
    return v;
  };
  auto axes_from = [n](const std::vector<double>& p) {
    std::vector<double> a(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (int i = 0; i < n - 1; ++i) {
      a[static_cast<std::size_t>(i)] = std::exp(p[static_cast<std::size_t>(i)]);
      sum += p[static_cast<std::size_t>(i)];
    }
    a[static_cast<std::size_t>(n - 1)] = std::exp(-sum);
    return a;
  };

  std::vector<double> p(static_cast<std::size_t>(n - 1), 0.0);
  if (!initial_axes.empty()) {
    require(static_cast<int>(initial_axes.size()) == n, "initial semi-axes need one entry per dimension");
    const double norm = std::log(std::accumulate(initial_axes.begin(), initial_axes.end(), 1.0, std::multiplies<>())) / n;
    for (int i = 0; i < n - 1; ++i) p[static_cast<std::size_t>(i)] = std::log(initial_axes[static_cast<std::size_t>(i)]) - norm;
  }
  evaluate(std::vector<double>(static_cast<std::size_t>(n), 1.0));
  if (!initial_axes.empty()) evaluate(axes_from(p));

  if (options.family == ContactFamily::ellipsoid) {
    const double r0 = std::pow(1.0 / unit_ball_volume(n), 1.0 / n);
    // Semi-axes are r0 e^{p_i}: ratios up to max_aspect, largest axis inside B_R.
    const double limit = std::max(0.0, std::min(0.5 * std::log(options.max_aspect),
                                                std::log((options.radius - 2.0 * options.spacing) / r0)));
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    const int sweeps = n == 2 ? 1 : options.coordinate_sweeps;
    for (int sweep = 0; sweep < sweeps; ++sweep) {
      for (int coord = 0; coord < n - 1; ++coord) {
        auto f = [&](double t) {
          auto q = p;
          q[static_cast<std::size_t>(coord)] = t;
          return evaluate(axes_from(q));
        };
        double lo = -limit, hi = limit;
        double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
        double f1 = f(x1), f2 = f(x2);
        for (int it = 0; it < options.golden_iterations; ++it) {
          if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
          } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
          }
        }
        // Continue from the best point seen so far on this coordinate.
        for (int i = 0; i < n - 1; ++i) p[static_cast<std::size_t>(i)] = std::log(best.axes[static_cast<std::size_t>(i)]);
      }
    }
  }

  LambdaStarEstimate est = make_estimate(datum, *domain, std::move(best.solution), LambdaMethod::parametric);
  est.semi_axes = best.axes;
  est.history = {est.value};
  est.solves = solves;
  return est;
}

namespace {

// Per-component diagonal of the reduced Laplacian and the scale h^{d-2} 2^s.
struct LocalOperator {
  const GridDomain& g;
  const VectorField& field;
  double scale;

  double diag(int c, std::int32_t cell) const {
    double dsum = 0.0;
    for (int dir = 0; dir < g.directions(); ++dir) {
      const std::int32_t code = g.neighbor(cell, dir);
      if (code >= 0) {
        dsum += 1.0;
      } else if (code == GridDomain::kMirror) {
        if (field.parity(c, dir / 2) == Parity::odd) dsum += 2.0;
      } else {
        dsum += 1.0 / g.boundary_faces()[GridDomain::boundary_index(code)].theta;
      }
    }
    return dsum;
  }

  // A u - b at a cell (zero at free cells of a converged solve).
  double residual(int c, std::int32_t cell) const {
    double r = diag(c, cell) * field.at(c, cell);
    for (int dir = 0; dir < g.directions(); ++dir) {
      const std::int32_t code = g.neighbor(cell, dir);
      if (code >= 0) {
        r -= field.at(c, code);
      } else if (GridDomain::is_boundary_code(code)) {
        const std::size_t f = GridDomain::boundary_index(code);
        r -= field.boundary_values(c)[f] / g.boundary_faces()[f].theta;
      }
    }
    return r;
  }
};

}  // namespace

LambdaStarEstimate lambda_star_exchange(const LinearDatum& datum, const ContactMask& init, int iterations,
                                        const LambdaOptions& options) {
  require(iterations >= 0, "exchange iteration count must be nonnegative");
  const DomainPtr domain = init.domain_ptr();
  require(domain && domain->dim() == datum.rank, "initial contact set must live on the reduced grid");
  const GridDomain& g = *domain;
  require(init.count() == unit_measure_cells(g), "initial contact set must have round(1/h^n) cells");
  const ContactProblem problem = ContactProblem::diagonal(datum);
  const int k = problem.components;

  CapacitarySolution current = solve_contact(domain, init, problem, options.solver);
  int solves = 1, rejected = 0;
  std::vector<double> history{current.energy / current.contact.measure()};
  std::vector<double> buf(static_cast<std::size_t>(k));

  std::vector<std::uint8_t> touches_boundary(g.size(), 0);
  for (const BoundaryFace& f : g.boundary_faces()) touches_boundary[static_cast<std::size_t>(f.cell)] = 1;

  std::size_t batch = 0;
  int steps = 0;
  while (steps < iterations) {
    const ContactMask& K = current.contact;
    LocalOperator op{g, current.field, std::pow(g.spacing(), g.dim() - 2) * g.multiplicity()};

    // Removal gains (contact cells next to a free cell) and addition costs
    // (free cells next to K that keep K off the outer boundary).
    std::vector<std::pair<double, std::int32_t>> gains, costs;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto cell = static_cast<std::int32_t>(i);
      bool frontier = false;
      for (int dir = 0; dir < g.directions() && !frontier; ++dir) {
        const std::int32_t nb = g.neighbor(cell, dir);
        if (nb >= 0 && K.contains(nb) != K.contains(cell)) frontier = true;
      }
      if (!frontier) continue;
      if (K.contains(cell)) {
        double gain = 0.0;
        for (int c = 0; c < k; ++c) {
          const double r = op.residual(c, cell);
          gain += current.weights[static_cast<std::size_t>(c)] * r * r / op.diag(c, cell);
        }
        gains.emplace_back(-gain * op.scale, cell);
      } else if (!touches_boundary[i]) {
        problem.datum(g.center(cell), buf);
        double cost = 0.0;
        for (int c = 0; c < k; ++c) {
          const double diff = buf[static_cast<std::size_t>(c)] - current.field.at(c, cell);
          cost += current.weights[static_cast<std::size_t>(c)] * op.diag(c, cell) * diff * diff;
        }
        costs.emplace_back(cost * op.scale, cell);
      }
    }
    std::sort(gains.begin(), gains.end());  // most negative (largest gain) first, ties by index
    std::sort(costs.begin(), costs.end());
    const std::size_t pairs = std::min(gains.size(), costs.size());
    if (batch == 0) batch = options.exchange_batch > 0 ? static_cast<std::size_t>(options.exchange_batch)
                                                       : std::max<std::size_t>(1, gains.size() / 8);
    std::size_t take = 0;
    double predicted = 0.0, best_pred = 0.0;
    for (std::size_t i = 0; i < std::min(pairs, batch); ++i) {
      predicted += gains[i].first + costs[i].first;
      if (predicted < best_pred) {
        best_pred = predicted;
        take = i + 1;
      }
    }
    if (take == 0) break;  // no swap predicted to help

    ContactMask trial = K;
    for (std::size_t i = 0; i < take; ++i) {
      trial.erase(gains[i].second);
      trial.insert(costs[i].second);
    }
    CapacitarySolution next = solve_contact(domain, trial, problem, options.solver, &current.field);
    ++solves;
    ++steps;
    if (next.energy < current.energy * (1.0 - 1e-12)) {
      current = std::move(next);
      history.push_back(current.energy / current.contact.measure());
    } else {
      ++rejected;
      if (take == 1) break;  // local minimum for single swaps
      batch = std::max<std::size_t>(1, take / 2);
    }
  }

  LambdaStarEstimate est = make_estimate(datum, g, std::move(current), LambdaMethod::exchange);
  est.history = std::move(history);
  est.solves = solves;
  est.rejected = rejected;
  return est;
}

std::vector<LambdaStarEstimate> R_continuation(const LinearDatum& datum, const std::vector<double>& radii,
                                               const LambdaOptions& options) {
  require(!radii.empty(), "R-continuation needs at least one radius");
  for (std::size_t i = 1; i < radii.size(); ++i)
    require(radii[i] > radii[i - 1], "R-continuation radii must be strictly increasing");
  std::vector<LambdaStarEstimate> out;
  if (datum.rank == 1) {
    for (double R : radii) {
      LambdaStarEstimate e = rank_one_exact(datum);
      e.R_used = R;
      out.push_back(std::move(e));
    }
    return out;
  }
  std::vector<double> axes;
  for (double R : radii) {
    LambdaOptions o = options;
    o.radius = R;
    out.push_back(lambda_star_parametric(datum, o, axes));
    axes = out.back().semi_axes;
  }
  return out;
}

LambdaStarEstimate lambda_star(const LinearDatum& datum, const std::vector<double>& radii, int exchange_iterations,
                               const LambdaOptions& options) {
  std::vector<LambdaStarEstimate> cont = R_continuation(datum, radii, options);
  LambdaStarEstimate best = std::move(cont.back());
  if (datum.rank == 1 || exchange_iterations <= 0) return best;
  LambdaOptions o = options;
  o.radius = radii.back();
  LambdaStarEstimate ex = lambda_star_exchange(datum, best.contact, exchange_iterations, o);
  ex.semi_axes = best.semi_axes;
  ex.solves += best.solves;
  std::vector<double> history{best.value};
  history.insert(history.end(), ex.history.begin() + 1, ex.history.end());
  ex.history = std::move(history);
  return ex;
}

// ---------------------------------------------------------------------------

double CutoffProfile::value(double s) const {
  if (s <= inner) return 1.0;
  if (s >= outer) return 0.0;
  const double t = (s - inner) / (outer - inner);
  return 1.0 - t * t * (3.0 - 2.0 * t);
}

double CutoffProfile::slope(double s) const {
  if (s <= inner || s >= outer) return 0.0;
  const double t = (s - inner) / (outer - inner);
  return -6.0 * t * (1.0 - t) / (outer - inner);
}

CylinderEnergy cylinder_comparator(const CapacitarySolution& reduced, int ambient_dim, double delta,
                                   const CutoffProfile& cutoff, const CylinderOptions& options) {
  const GridDomain& g = reduced.field.domain();
  const int n = g.dim();
  require(ambient_dim > n, "cylinder comparator needs rank(A) < d (a nontrivial kernel direction)");
  require(ambient_dim <= kMaxDim, "ambient dimension above 4 is not supported");
  require(delta > 0.0, "cylinder comparator needs delta > 0");
  require(cutoff.inner > 0.0 && cutoff.outer > cutoff.inner, "cutoff needs 0 < inner < outer");
  const int m = ambient_dim - n;
  const double om = unit_ball_volume(m);

  CylinderEnergy out;
  out.y_extent = std::pow(delta, 1.0 / n) * g.radius();
  out.z_extent = cutoff.outer * std::pow(om * delta, -1.0 / m);
  require(out.y_extent <= options.ambient_radius && out.z_extent <= options.ambient_radius,
          "cylinder comparator support exits the ambient domain (delta too large or too small)");

  double energy_v = 0.0, l2_v = 0.0;
  for (int c = 0; c < reduced.field.components(); ++c) {
    const double w = reduced.weights[static_cast<std::size_t>(c)];
    energy_v += w * reduced.per_component_energy[static_cast<std::size_t>(c)];
    l2_v += w * l2_norm_sq(reduced.field, c);
  }
  // Radial integrals of the cutoff over R^m.
  const double sphere = m * om;
  const double phi_sq = sphere * integrate([&](double s) { return std::pow(cutoff.value(s), 2) * std::pow(s, m - 1); },
                                           0.0, cutoff.outer, options.quadrature_panels);
  const double grad_sq = sphere * integrate([&](double s) { return std::pow(cutoff.slope(s), 2) * std::pow(s, m - 1); },
                                            cutoff.inner, cutoff.outer, options.quadrature_panels);

  out.bulk_term = energy_v * phi_sq / om;
  out.cross_term = std::pow(om, 2.0 / m - 1.0) * std::pow(delta, 2.0 / n + 2.0 / m) * l2_v * grad_sq;
  out.energy = out.bulk_term + out.cross_term;
  out.contact_measure = reduced.contact.measure() * std::pow(cutoff.inner, m);
  out.quotient = out.energy / out.contact_measure;
  out.reduced_quotient = energy_v / reduced.contact.measure();
  return out;
}

}  // namespace freebound
