// freebound: command-line front end.
//
//   freebound <command> [--config FILE] [key=value ...] [--output DIR]
//   freebound --golden
//
// Exit codes: 0 success, 1 I/O or unexpected failure, 2 validation error,
// 3 solver non-convergence, 4 golden-check failure.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "freebound/capacitary.hpp"
#include "freebound/config.hpp"
#include "freebound/error.hpp"
#include "freebound/io.hpp"
#include "freebound/lambda_star.hpp"
#include "freebound/monitors.hpp"
#include "freebound/parallel.hpp"
#include "freebound/penalized.hpp"
#include "freebound/radial.hpp"
#include "freebound/sweep.hpp"

using namespace freebound;
using nlohmann::json;

namespace {

BoundaryDatum make_datum(const RunConfig& c) {
  return c.matrix.has_value() ? BoundaryDatum::linear(*c.matrix) : BoundaryDatum::constant(*c.constant);
}

DomainPtr make_domain(const RunConfig& c, const BoundaryDatum& g) {
  GridSpec spec = c.grid_spec();
  for (int a = 0; a < c.dim; ++a) spec.mirror[static_cast<std::size_t>(a)] = c.mirror && g.reflects(a);
  return make_grid(spec);
}

SolverOptions solver_options(const RunConfig& c) {
  SolverOptions s;
  s.tolerance = c.tolerance;
  return s;
}

json domain_json(const GridDomain& g) {
  return json{{"dim", g.dim()}, {"shape", to_string(g.shape())}, {"radius", g.radius()}, {"spacing", g.spacing()},
              {"cells", g.size()}, {"multiplicity", g.multiplicity()}, {"measure", g.measure()}};
}

void run_lambda_star(const RunConfig& c, ResultSet& out) {
  const LinearDatum datum = reduce(*c.matrix);
  LambdaOptions lo;
  lo.radius = c.radii.back();
  lo.spacing = c.spacing;
  lo.family = c.family;
  lo.fit = c.fit;
  lo.solver = solver_options(c);
  const LambdaStarEstimate est = lambda_star(datum, c.radii, c.exchange_iterations, lo);
  out.summary() = to_json(est);
  out.summary()["radii"] = c.radii;
  out.add_table("history", history_table(est.history, "quotient"));
  if (c.dump_fields && est.field.components() > 0) out.add_field("field", est.field, c.dump_format);
}

void run_penalized(const RunConfig& c, ResultSet& out) {
  const BoundaryDatum g = make_datum(c);
  const DomainPtr domain = make_domain(c, g);
  PenalizedOptions po;
  po.solver = solver_options(c);
  po.max_iterations = c.max_iterations;
  const PenalizedResult r = minimize_penalized(domain, g, PenaltyParams{*c.m, c.eta, 0.0}, po);
  out.summary() = to_json(r.report);
  out.summary()["m"] = *c.m;
  out.summary()["eta"] = c.eta;
  out.summary()["dead_cells"] = r.dead.count();
  out.summary()["domain"] = domain_json(*domain);
  out.add_table("history", history_table(r.report.history, "J"));
  if (c.dump_fields) {
    out.add_field("field", r.field, c.dump_format);
    out.add_field("harmonic", r.harmonic, c.dump_format);
  }
}

void run_sweep_command(const RunConfig& c, ResultSet& out) {
  const BoundaryDatum g = make_datum(c);
  const DomainPtr domain = make_domain(c, g);
  SweepOptions so;
  so.etas = c.etas;
  so.penalized.solver = solver_options(c);
  so.penalized.max_iterations = c.max_iterations;
  so.lambda.spacing = c.lambda_spacing;
  so.lambda.family = c.family;
  so.lambda.solver = solver_options(c);
  so.lambda_radii = c.radii;
  so.lambda_exchange_iterations = c.exchange_iterations;
  so.workers = workers_from_env();
  std::optional<Matrix> grad;
  if (c.matrix.has_value()) grad = *c.matrix;
  const SweepResult r = run_sweep(domain, g, c.eps, so, grad);
  out.summary() = to_json(r);
  out.summary()["domain"] = domain_json(*domain);
  out.add_table("sweep", sweep_table(r));
}

void run_oracle(const RunConfig& c, ResultSet& out) {
  const RadialProfile p = c.profile == ProfileKind::capacitary ? capacitary_profile(c.dim, c.r_eps, c.radius)
                                                                 : dead_core_profile(c.dim, c.r_eps, c.radius);
  const RadialObstacle f = c.profile == ProfileKind::capacitary ? RadialObstacle::norm() : RadialObstacle::constant(1.0);
  const RadialReduction scan = reduce_radial(f, Gauge::linear(), c.dim, c.scan, c.radius);
  out.summary() = json{{"profile", c.profile == ProfileKind::capacitary ? "capacitary" : "dead_core"},
                       {"dim", c.dim},
                       {"r_eps", c.r_eps},
                       {"radius", c.radius},
                       {"energy", p.energy()},
                       {"contact_measure", p.contact_measure()},
                       {"ratio", p.energy() / p.contact_measure()},
                       {"interface_derivative", p.derivative(c.r_eps)},
                       {"scan_best_ratio", scan.best_ratio},
                       {"scan_best_radius", scan.best_radius}};
  out.add_table("profile", profile_table(p));
  out.add_table("scan", reduction_table(scan));
}

void run_monitor(const RunConfig& c, ResultSet& out) {
  std::optional<VectorField> field;
  if (!c.field_path.empty()) {
    std::ifstream in(c.field_path, std::ios::binary);
    if (!in) throw IoError("cannot read field " + c.field_path);
    field = read_field(in);
  } else {
    const BoundaryDatum g = make_datum(c);
    const DomainPtr domain = make_domain(c, g);
    VectorField h(domain, g.components);
    for (int k = 0; k < g.components; ++k)
      for (int a = 0; a < c.dim; ++a)
        h.set_parity(k, a, g.parity[static_cast<std::size_t>(k)][static_cast<std::size_t>(a)].value_or(Parity::even));
    h.set_boundary(g.g);
    solve_harmonic(h, solver_options(c));
    field = std::move(h);
  }
  const int d = field->domain().dim();
  Point x0{};
  for (std::size_t a = 0; a < c.center.size(); ++a) x0[a] = c.center[a];
  std::vector<double> sigma = c.sigma;
  if (sigma.empty()) {
    sigma.assign(static_cast<std::size_t>(field->components()), 0.0);
    sigma[0] = 1.0;
  }
  const FrequencySeries fs = frequency(*field, x0, c.monitor_radii);
  const std::vector<double> phi = acf_product(*field, x0, sigma, c.monitor_radii);
  out.summary() = json{{"dim", d},
                       {"center", std::vector<double>(x0.begin(), x0.begin() + d)},
                       {"sigma", sigma},
                       {"N_defect", monotonicity_defect(fs.N)},
                       {"Phi_defect", monotonicity_defect(phi)}};
  const double r = c.monitor_radii.front();
  if (2.0 * r + 1.5 * field->domain().spacing() <= field->domain().radius() && !fs.flagged.front()) {
    const DoublingResult db = doubling_check(*field, x0, r, fs.N.front());
    out.summary()["doubling"] = json{{"r", r}, {"ratio", db.ratio}, {"surface_ratio", db.surface_ratio},
                                     {"bound", db.bound}, {"holds", db.holds}, {"surface_holds", db.surface_holds}};
  }
  out.add_table("frequency", frequency_table(fs, phi));
}

// Fast oracle comparisons; any breach fails the run.
int run_golden() {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    if (!ok) ++failures;
  };
  char buf[256];

  {
    const RadialProfile p = capacitary_profile(3, 0.5);
    // Midpoint rule on a dense radial grid with the closed-form derivative.
    const int n = 400000;
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = (i + 0.5) / n;
      e += 4.0 * M_PI * r * r * std::pow(p.derivative(r), 2) / n;
    }
    std::snprintf(buf, sizeof buf, "closed form %.12f, quadrature %.12f", p.energy(), e);
    check("capacitary energy vs quadrature", std::abs(p.energy() - e) <= 1e-8 * p.energy(), buf);
  }
  {
    // Grid solver against the radial oracle on a fitted contact sphere.
    const CapacitarySolution s = solve_ball_contact(3, 0.5, 1.0, 1.0 / 32, ContactProblem::radial_norm());
    const double exact = capacitary_profile(3, 0.5).energy();
    std::snprintf(buf, sizeof buf, "grid %.6f, closed form %.6f", s.energy, exact);
    check("capacitary grid solve (d=3, h=1/32)", std::abs(s.energy - exact) <= 0.03 * exact, buf);
  }
  {
    const RadialProfile p = dead_core_profile(3, 0.5);
    std::snprintf(buf, sizeof buf, "u(1)=%.15g u(0.5)=%.15g u'(0.5)=%.15g", p.value(1.0), p.value(0.5), p.derivative(0.5));
    check("dead-core profile", std::abs(p.value(1.0) - 1.0) < 1e-14 && p.value(0.5) == 0.0 &&
                                   std::abs(p.derivative(0.5) - 4.0) < 1e-12, buf);
  }
  {
    bool inc = true;
    for (int i = 1; i < 99; ++i) inc = inc && capacitary_ratio(3, (i + 1) / 100.0) > capacitary_ratio(3, i / 100.0);
    check("capacitary ratio increasing (d=3)", inc, "99 scan points");
  }
  {
    const Matrix A = Matrix::from_rows({{0.3}, {-1.2}, {0.5}}) * Matrix::from_rows({{1.0, 2.0, -0.7}});
    const LambdaStarEstimate e = rank_one_exact(reduce(A));
    std::snprintf(buf, sizeof buf, "value %.15g, |A|^2 %.15g", e.value, A.frobenius_sq());
    check("rank-one exact", std::abs(e.value - A.frobenius_sq()) <= 1e-6, buf);
  }
  {
    std::mt19937_64 rng(0);
    std::uniform_int_distribution<int> tick(0, 1 << 10), pe(0, 10);
    int bad = 0;
    for (int i = 0; i < 1000; ++i) {
      double t1 = tick(rng) / 256.0, t2 = tick(rng) / 256.0;
      if (t1 > t2) std::swap(t1, t2);
      const PenaltyParams p{1.0 + tick(rng) / 256.0, std::ldexp(1.0, -pe(rng)), 0.0};
      const double df = f_m_eta(t2, p) - f_m_eta(t1, p);
      if (!(f_m_eta(t1, p) >= -p.eta * p.m && p.eta * (t2 - t1) <= df && df <= (t2 - t1) / p.eta)) ++bad;
    }
    check("penalty algebra", bad == 0, std::to_string(bad) + " of 1000 violations");
  }
  {
    const DomainPtr g = make_grid(2, 1.0, 1.0 / 64, Shape::ball);
    VectorField lin(g, 1), quad(g, 1);
    lin.set_values([](const Point& x, std::span<double> v) { v[0] = x[0]; });
    quad.set_values([](const Point& x, std::span<double> v) { v[0] = x[0] * x[1]; });
    const std::vector<double> radii{0.25, 0.5, 0.75};
    const FrequencySeries f1 = frequency(lin, Point{}, radii), f2 = frequency(quad, Point{}, radii);
    double e1 = 0.0, e2 = 0.0;
    for (std::size_t i = 0; i < radii.size(); ++i)
      e1 = std::max(e1, std::abs(f1.N[i] - 1.0)), e2 = std::max(e2, std::abs(f2.N[i] - 2.0));
    std::snprintf(buf, sizeof buf, "max |N-1| %.3g, max |N-2| %.3g", e1, e2);
    check("frequency on homogeneous harmonics", e1 <= 1e-2 && e2 <= 2e-2, buf);
    const std::vector<double> phi = acf_product(lin, Point{}, {1.0}, radii);
    double ea = 0.0;
    for (double v : phi) ea = std::max(ea, std::abs(v / (M_PI * M_PI / 4.0) - 1.0));
    std::snprintf(buf, sizeof buf, "max relative error %.3g", ea);
    check("ACF product for x1", ea <= 0.03, buf);
  }
  return failures == 0 ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments for vectorial free-boundary problems"};
  bool golden = false;
  app.add_flag("--golden", golden, "Re-run the oracle comparisons; exit 4 on any breach");
  app.require_subcommand(0, 1);

  struct Args {
    std::string config;
    std::vector<std::string> sets;
    std::string output;
    bool dump = false;
  };
  std::vector<std::pair<CLI::App*, std::string>> subs;
  std::map<std::string, Args> args;
  for (const char* name : {"lambda-star", "penalized", "sweep", "oracle", "monitor"}) {
    CLI::App* sub = app.add_subcommand(name);
    Args& a = args[name];
    sub->add_option("--config,-c", a.config, "JSON or key=value config file")->check(CLI::ExistingFile);
    sub->add_option("settings", a.sets, "key=value overrides");
    sub->add_option("--set", a.sets, "key=value override");
    sub->add_option("--output,-o", a.output, "output directory");
    sub->add_flag("--dump", a.dump, "write field dumps");
    subs.emplace_back(sub, name);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (golden) return run_golden();
    for (auto& [sub, name] : subs) {
      if (!sub->parsed()) continue;
      Args& a = args[name];
      std::vector<std::string> overrides = a.sets;
      if (!a.output.empty()) overrides.push_back("output=\"" + a.output + "\"");
      if (a.dump) overrides.push_back("dump_fields=true");
      const RunConfig cfg = parse_config(a.config.empty() ? std::nullopt : std::optional<std::filesystem::path>(a.config),
                                         overrides, name);
      ResultSet out(cfg.output);
      switch (cfg.command) {
        case Command::lambda_star: run_lambda_star(cfg, out); break;
        case Command::penalized: run_penalized(cfg, out); break;
        case Command::sweep: run_sweep_command(cfg, out); break;
        case Command::oracle: run_oracle(cfg, out); break;
        case Command::monitor: run_monitor(cfg, out); break;
      }
      out.summary()["command"] = name;
      const auto manifest = out.emit();
      std::cout << out.summary().dump(2) << "\n";
      std::cerr << "wrote " << manifest.size() + 1 << " files to " << cfg.output.string() << "\n";
      return 0;
    }
    std::cerr << app.help();
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "solver did not converge: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
