#include "freebound/capacitary.hpp"

#include <cmath>

#include "freebound/error.hpp"

namespace freebound {

ContactProblem ContactProblem::diagonal(const LinearDatum& datum) {
  ContactProblem p;
  const int n = datum.rank;
  p.components = n;
  p.weights = diagonal_form(datum);
  p.parity.assign(static_cast<std::size_t>(n), {});
  for (int j = 0; j < n; ++j) {
    p.parity[static_cast<std::size_t>(j)].fill(Parity::even);
    p.parity[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] = Parity::odd;
  }
  p.datum = [n](const Point& y, std::span<double> out) {
    for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(j)] = y[static_cast<std::size_t>(j)];
  };
  return p;
}

ContactProblem ContactProblem::matrix(const Matrix& A1) {
  ContactProblem p;
  p.components = A1.rows;
  p.datum = [A1](const Point& y, std::span<double> out) {
    for (int r = 0; r < A1.rows; ++r) {
      double s = 0.0;
      for (int c = 0; c < A1.cols; ++c) s += A1(r, c) * y[static_cast<std::size_t>(c)];
      out[static_cast<std::size_t>(r)] = s;
    }
  };
  return p;
}

ContactProblem ContactProblem::radial_norm() {
  ContactProblem p;
  p.components = 1;
  p.datum = [](const Point& y, std::span<double> out) {
    out[0] = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3]);
  };
  return p;
}

CapacitarySolution solve_contact(const DomainPtr& domain, const ContactMask& K, const ContactProblem& problem,
                                 const SolverOptions& options, const VectorField* warm) {
  require(!K.empty(), "contact set K must be nonempty");
  require(K.domain_ptr() == domain, "contact set belongs to a different grid");
  require(problem.components >= 1 && problem.datum, "contact problem needs a datum");
  const GridDomain& g = *domain;
  for (const BoundaryFace& face : g.boundary_faces())
    require(!K.contains(face.cell), "contact set K must lie strictly inside the domain");

  CapacitarySolution out;
  out.contact = K;
  out.weights = problem.weights.empty() ? std::vector<double>(static_cast<std::size_t>(problem.components), 1.0)
                                        : problem.weights;
  require(static_cast<int>(out.weights.size()) == problem.components, "one weight per component required");

  if (warm != nullptr) {
    require(warm->domain_ptr() == domain && warm->components() == problem.components, "warm start does not match");
    out.field = *warm;
    out.field.clear_fixed();
    for (int c = 0; c < problem.components; ++c) {
      auto b = out.field.boundary_values(c);
      std::fill(b.begin(), b.end(), 0.0);
    }
  } else {
    out.field = VectorField(domain, problem.components);
  }
  for (int c = 0; c < problem.components && static_cast<std::size_t>(c) < problem.parity.size(); ++c)
    for (int a = 0; a < g.dim(); ++a)
      out.field.set_parity(c, a, problem.parity[static_cast<std::size_t>(c)][static_cast<std::size_t>(a)]);

  std::vector<double> buf(static_cast<std::size_t>(problem.components));
  for (std::int32_t cell : K.members()) {
    problem.datum(g.center(cell), buf);
    out.field.set_fixed(cell, true);
    for (int c = 0; c < problem.components; ++c) out.field.at(c, cell) = buf[static_cast<std::size_t>(c)];
  }
  out.stats = solve_harmonic(out.field, options);
  for (int c = 0; c < problem.components; ++c) {
    const double e = component_energy(out.field, c);
    out.per_component_energy.push_back(e);
    out.energy += out.weights[static_cast<std::size_t>(c)] * e;
  }
  return out;
}

CapacitarySolution solve_contact(const DomainPtr& domain, const ContactMask& K, const LinearDatum& datum,
                                 const SolverOptions& options, const VectorField* warm) {
  require(domain->dim() == datum.rank, "the reduced contact problem lives in dimension rank(A)");
  return solve_contact(domain, K, ContactProblem::diagonal(datum), options, warm);
}

CapacitarySolution solve_ball_contact(int dim, double rho, double R, double h, const ContactProblem& problem,
                                      bool mirror, const SolverOptions& options) {
  require(problem.components >= 1 && problem.datum, "contact problem needs a datum");
  require(rho > 0.0 && rho < R, "contact radius must lie in (0, R)");
  GridSpec spec;
  spec.dim = dim;
  spec.radius = R;
  spec.spacing = h;
  spec.shape = Shape::annulus;
  spec.inner_radius = rho;
  spec.fit = BoundaryFit::fitted;
  for (int a = 0; a < dim; ++a) spec.mirror[static_cast<std::size_t>(a)] = mirror;
  GridSpec inner = spec;
  inner.shape = Shape::ball;
  inner.radius = rho;
  inner.inner_radius = 0.0;

  CapacitarySolution out;
  out.weights = problem.weights.empty() ? std::vector<double>(static_cast<std::size_t>(problem.components), 1.0)
                                        : problem.weights;
  require(static_cast<int>(out.weights.size()) == problem.components, "one weight per component required");
  out.field = VectorField(make_grid(spec), problem.components);
  VectorField core(make_grid(inner), problem.components);
  for (int c = 0; c < problem.components && static_cast<std::size_t>(c) < problem.parity.size(); ++c)
    for (int a = 0; a < dim; ++a) {
      out.field.set_parity(c, a, problem.parity[static_cast<std::size_t>(c)][static_cast<std::size_t>(a)]);
      core.set_parity(c, a, problem.parity[static_cast<std::size_t>(c)][static_cast<std::size_t>(a)]);
    }
  const double split = 0.5 * (rho + R);
  out.field.set_boundary([&](const Point& y, std::span<double> v) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += y[static_cast<std::size_t>(a)] * y[static_cast<std::size_t>(a)];
    if (r2 < split * split) {
      problem.datum(y, v);
    } else {
      std::fill(v.begin(), v.end(), 0.0);
    }
  });
  core.set_values(problem.datum);
  core.set_boundary(problem.datum);
  out.stats = solve_harmonic(out.field, options);
  for (int c = 0; c < problem.components; ++c) {
    const double e = component_energy(out.field, c) + component_energy(core, c);
    out.per_component_energy.push_back(e);
    out.energy += out.weights[static_cast<std::size_t>(c)] * e;
  }
  return out;
}

VectorField harmonic_replacement(const VectorField& W, const ContactMask& K, const VectorField::BoundaryFn& datum,
                                 const SolverOptions& options) {
  require(!K.empty(), "contact set K must be nonempty");
  require(K.domain_ptr() == W.domain_ptr(), "contact set belongs to a different grid");
  VectorField out = W;
  out.clear_fixed();
  for (int c = 0; c < out.components(); ++c) {
    auto b = out.boundary_values(c);
    std::fill(b.begin(), b.end(), 0.0);
  }
  const GridDomain& g = W.domain();
  std::vector<double> buf(static_cast<std::size_t>(W.components()));
  for (std::int32_t cell : K.members()) {
    out.set_fixed(cell, true);
    if (datum) {
      datum(g.center(cell), buf);
      for (int c = 0; c < out.components(); ++c) out.at(c, cell) = buf[static_cast<std::size_t>(c)];
    }
  }
  solve_harmonic(out, options);
  return out;
}

}  // namespace freebound
