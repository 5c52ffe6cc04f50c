#include "freebound/sweep.hpp"

#include <algorithm>
#include <cmath>

#include "freebound/error.hpp"
#include "freebound/parallel.hpp"

namespace freebound {

VectorField rescale(const VectorField& V, double eps, double spacing) {
  require(eps > 0.0 && eps <= 1.0, "rescale needs eps in (0, 1]");
  if (eps == 1.0 && spacing <= 0.0) return V;
  const GridDomain& g = V.domain();
  const int d = g.dim();
  const double s = std::pow(eps, 1.0 / d);  // x_original = s * x_rescaled
  GridSpec spec = g.spec();
  spec.radius = g.radius() / s;
  spec.inner_radius = g.spec().inner_radius / s;
  spec.spacing = spacing > 0.0 ? spacing : g.spacing();
  VectorField out(make_grid(spec), V.components());
  for (int c = 0; c < V.components(); ++c)
    for (int a = 0; a < d; ++a) out.set_parity(c, a, V.parity(c, a));
  const auto zero = [](int, const Point&) { return 0.0; };
  const GridDomain& h = out.domain();
  for (std::size_t i = 0; i < h.size(); ++i) {
    Point x = h.center(static_cast<std::int32_t>(i));
    for (int a = 0; a < d; ++a) x[static_cast<std::size_t>(a)] *= s;
    for (int c = 0; c < V.components(); ++c) out.at(c, static_cast<std::int32_t>(i)) = V.sample(c, x, zero) / s;
  }
  return out;
}

double capacity_tail(const VectorField& V_tilde, const VectorField& h_tilde, double R, double rel_tol) {
  const GridDomain& g = V_tilde.domain();
  require(V_tilde.domain_ptr() == h_tilde.domain_ptr() || g.size() == h_tilde.domain().size(),
          "rescaled field and datum must share a grid");
  require(R > 0.0 && R < g.radius(), "capacity tail radius must lie inside the rescaled grid");
  double scale = 0.0;
  for (int c = 0; c < h_tilde.components(); ++c)
    for (double v : h_tilde.values(c)) scale = std::max(scale, std::abs(v));
  const double tol = rel_tol * std::max(scale, 1e-300);
  std::size_t count = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto cell = static_cast<std::int32_t>(i);
    const Point x = g.center(cell);
    double r2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) r2 += x[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)];
    if (r2 < R * R) continue;
    bool equal = true;
    for (int c = 0; c < V_tilde.components() && equal; ++c)
      if (std::abs(V_tilde.at(c, cell) - h_tilde.at(c, cell)) > tol) equal = false;
    // The dead set is where U = h - V vanishes, so V = h with h nonzero.
    if (equal) ++count;
  }
  return static_cast<double>(count) * g.cell_volume() * g.multiplicity();
}

double lipschitz_norm(const VectorField& U, const Point& x0, double window) {
  const GridDomain& g = U.domain();
  const int d = g.dim();
  auto inside = [&](std::int32_t cell) {
    const Point c = g.center(cell);
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += (c[static_cast<std::size_t>(a)] - x0[static_cast<std::size_t>(a)]) *
                                      (c[static_cast<std::size_t>(a)] - x0[static_cast<std::size_t>(a)]);
    return r2 < window * window;
  };
  double best = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto cell = static_cast<std::int32_t>(i);
    if (!inside(cell)) continue;
    for (int dir = 1; dir < g.directions(); dir += 2) {
      const std::int32_t nb = g.neighbor(cell, dir);
      if (nb < 0 || !inside(nb)) continue;
      double s = 0.0;
      for (int c = 0; c < U.components(); ++c) s += std::pow(U.at(c, cell) - U.at(c, nb), 2);
      best = std::max(best, std::sqrt(s) / g.spacing());
    }
  }
  return best;
}

std::vector<double> default_eps_list(const GridDomain& domain, double eps0, std::size_t min_cells) {
  const double floor = static_cast<double>(min_cells) * domain.cell_volume() * domain.multiplicity();
  require(eps0 >= floor && eps0 < domain.measure(), "initial eps is not resolvable on this grid");
  std::vector<double> out;
  for (double e = eps0; e >= floor; e *= 0.5) out.push_back(e);
  return out;
}

SweepResult run_sweep(const DomainPtr& domain, const BoundaryDatum& g, const std::vector<double>& eps_list,
                      const SweepOptions& options, const std::optional<Matrix>& grad_h) {
  require(!eps_list.empty(), "eps list must be nonempty");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    require(eps_list[i] < eps_list[i - 1], "eps list must be strictly decreasing");
  const GridDomain& D = *domain;
  const double vol = D.cell_volume() * D.multiplicity();
  for (double e : eps_list) {
    require(e > 0.0 && e < D.measure(), "each eps must lie in (0, |D|)");
    require(e >= static_cast<double>(options.min_dead_cells) * vol,
            "eps below the resolvable floor of " + std::to_string(options.min_dead_cells) + " dead cells");
  }
  const int d = D.dim();

  SweepResult out;
  // Harmonic extension and its zero.
  VectorField h(domain, g.components);
  for (int c = 0; c < g.components; ++c)
    for (int a = 0; a < d; ++a)
      h.set_parity(c, a, g.parity[static_cast<std::size_t>(c)][static_cast<std::size_t>(a)].value_or(Parity::even));
  h.set_boundary(g.g);
  solve_harmonic(h, options.penalized.solver);
  out.harmonic_energy = dirichlet_energy(h);

  double gmax = 0.0;
  for (int c = 0; c < g.components; ++c)
    for (double v : h.boundary_values(c)) gmax = std::max(gmax, std::abs(v));
  std::size_t arg = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < D.size(); ++i) {
    double s = 0.0;
    for (int c = 0; c < g.components; ++c) s += h.values(c)[i] * h.values(c)[i];
    if (s < best) best = s, arg = i;
  }
  out.x0 = D.center(static_cast<std::int32_t>(arg));
  for (int a = 0; a < d; ++a)
    if (D.mirrored(a)) out.x0[static_cast<std::size_t>(a)] = 0.0;

  Matrix A;
  if (grad_h.has_value()) {
    A = *grad_h;
  } else {
    // Central differences of h at the nearest cell to x0.
    A = Matrix(g.components, d);
    const auto cell = static_cast<std::int32_t>(arg);
    for (int a = 0; a < d; ++a) {
      const std::int32_t lo = D.neighbor(cell, 2 * a), hi = D.neighbor(cell, 2 * a + 1);
      for (int c = 0; c < g.components; ++c) {
        const double vlo = lo >= 0 ? h.at(c, lo) : (lo == GridDomain::kMirror ? h.mirror_sign(c, a) * h.at(c, cell) : h.at(c, cell));
        const double vhi = hi >= 0 ? h.at(c, hi) : h.at(c, cell);
        A(c, a) = (vhi - vlo) / (2.0 * D.spacing());
      }
    }
  }
  out.grad_h = A.to_rows();
  out.in_hypothesis = std::sqrt(best) <= options.zero_tolerance * std::max(gmax, 1e-300);
  if (out.in_hypothesis) {
    // Ker(grad h(x0)) = {0}: full column rank.
    if (A.max_abs() == 0.0) {
      out.in_hypothesis = false;
    } else {
      const LinearDatum datum = reduce(A);
      out.in_hypothesis = datum.rank == d;
      if (out.in_hypothesis && options.compute_target)
        out.lambda_target = lambda_star(datum, options.lambda_radii, options.lambda_exchange_iterations, options.lambda).value;
    }
  }

  out.entries.resize(eps_list.size());
  parallel_for(eps_list.size(), options.workers, [&](std::size_t idx) {
    const double eps = eps_list[idx];
    const double m = D.measure() - eps;
    SweepEntry entry;
    entry.eps = eps;
    PenalizedResult chosen;
    bool have = false;
    for (double eta : options.etas) {
      PenalizedResult r = minimize_penalized(domain, g, PenaltyParams{m, eta, 0.0}, options.penalized);
      const bool sat = std::abs(r.report.support_measure - m) <= vol * (1.0 + 1e-9);
      if (sat || !have) {
        chosen = std::move(r);
        entry.eta = eta;
        entry.saturated = sat;
        have = true;
      }
      if (sat) break;
    }
    const SolveReport& rep = chosen.report;
    entry.support_measure = rep.support_measure;
    entry.dead_cells = chosen.dead.count();
    entry.quotient = (rep.energy - out.harmonic_energy) / eps;
    entry.converged = rep.converged;
    entry.lambda_flux = rep.lambda_flux;
    double haus = 0.0;
    for (std::int32_t cell : chosen.dead.members()) {
      const Point c = D.center(cell);
      double r2 = 0.0;
      for (int a = 0; a < d; ++a) r2 += std::pow(c[static_cast<std::size_t>(a)] - out.x0[static_cast<std::size_t>(a)], 2);
      haus = std::max(haus, std::sqrt(r2));
    }
    entry.dead_hausdorff = haus;
    entry.lip_norm = lipschitz_norm(chosen.field, out.x0, options.window_radius);

    // V = h - U vanishes on the boundary; its energy is the excess energy.
    VectorField V = h;
    for (int c = 0; c < g.components; ++c) {
      auto v = V.values(c);
      auto u = chosen.field.values(c);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= u[i];
      auto b = V.boundary_values(c);
      std::fill(b.begin(), b.end(), 0.0);
    }
    entry.h1_gap = dirichlet_energy(V);
    if (options.rescaled_energy) entry.rescaled_energy = dirichlet_energy(rescale(V, eps));
    out.entries[idx] = entry;
  });
  return out;
}

}  // namespace freebound
