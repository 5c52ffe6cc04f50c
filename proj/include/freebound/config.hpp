#pragma once

// Run configuration for the command-line front end. Accepted inputs are a
// JSON object or key = value lines ('#' starts a comment); values in the
// latter are parsed as JSON when possible and as bare strings otherwise.
// Unknown keys are rejected.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "freebound/grid.hpp"
#include "freebound/lambda_star.hpp"
#include "freebound/linear_datum.hpp"
#include "freebound/radial.hpp"

namespace freebound {

enum class Command { lambda_star, penalized, sweep, oracle, monitor };

std::string to_string(Command command);
Command command_from_string(const std::string& name);

struct RunConfig {
  Command command = Command::lambda_star;

  // domain
  int dim = 2;
  Shape shape = Shape::ball;
  double radius = 1.0;        // lambda-star: 4
  double spacing = 1.0 / 32;  // lambda-star: 1/48
  double inner_radius = 0.0;
  bool mirror = false;        // store one orthant where the datum allows it
  BoundaryFit fit = BoundaryFit::fitted;

  // datum: exactly one of matrix / constant (lambda-star: matrix only)
  std::optional<Matrix> matrix;
  std::optional<std::vector<double>> constant;
  std::string matrix_path;

  // knobs
  std::optional<double> m;
  double eta = 0.25;
  std::vector<double> etas{1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
  std::vector<double> eps{0.4, 0.2, 0.1, 0.05};
  std::vector<double> radii;  // lambda-star continuation; default {radius}
  int exchange_iterations = 0;
  int max_iterations = 200;
  double tolerance = 1e-10;
  ContactFamily family = ContactFamily::ellipsoid;
  double lambda_spacing = 1.0 / 48;  // sweep: grid of the Lambda* target

  // oracle
  ProfileKind profile = ProfileKind::capacitary;
  double r_eps = 0.5;
  std::vector<double> scan;  // reduce_radial contact radii; default 0.05 .. 0.95

  // monitor
  std::vector<double> monitor_radii{0.25, 0.5, 0.75};
  std::vector<double> center;  // default origin
  std::vector<double> sigma;   // ACF direction; default e_1
  std::string field_path;      // monitor a dumped field instead of the harmonic extension

  // output
  std::filesystem::path output = "out";
  bool dump_fields = false;
  DumpFormat dump_format = DumpFormat::binary;
  std::uint64_t seed = 0;

  GridSpec grid_spec() const;
};

/// Parses JSON (leading '{') or key = value text. `base` resolves relative
/// matrix_path entries.
RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base = ".");
RunConfig parse_config_file(const std::filesystem::path& path);
/// Builds from a config file (optional) plus key=value overrides applied on top.
RunConfig parse_config(const std::optional<std::filesystem::path>& path, const std::vector<std::string>& overrides,
                       const std::optional<std::string>& command = std::nullopt);

/// Reads a matrix from a JSON array of rows or whitespace/comma separated rows.
Matrix read_matrix_file(const std::filesystem::path& path);

}  // namespace freebound
