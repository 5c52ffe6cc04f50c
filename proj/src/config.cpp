#include "freebound/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "freebound/error.hpp"
#include "quadrature.hpp"

namespace freebound {
namespace {

using nlohmann::json;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "command", "dim", "shape", "radius", "spacing", "inner_radius", "mirror", "fit", "matrix", "matrix_path",
      "constant", "m", "eta", "etas", "eps", "radii", "exchange_iterations", "max_iterations", "tolerance",
      "family", "lambda_spacing", "profile", "r_eps", "scan", "monitor_radii", "center", "sigma", "field_path",
      "output", "dump_fields", "dump_format", "seed"};
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// key = value; the value is JSON when it parses, a bare string otherwise.
void apply_assignment(json& raw, const std::string& line, const std::string& where) {
  const auto eq = line.find('=');
  require(eq != std::string::npos, where + ": expected key = value, got '" + line + "'");
  const std::string key = trim(line.substr(0, eq));
  const std::string text = trim(line.substr(eq + 1));
  require(!key.empty(), where + ": empty key");
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  raw[key] = value;
}

json parse_raw(const std::string& text) {
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    json raw = json::parse(body, nullptr, false);
    require(!raw.is_discarded() && raw.is_object(), "config: malformed JSON");
    return raw;
  }
  json raw = json::object();
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    apply_assignment(raw, line, "config line " + std::to_string(number));
  }
  return raw;
}

double get_number(const json& raw, const std::string& key) {
  const json& v = raw.at(key);
  require(v.is_number(), "config key '" + key + "' must be a number");
  return v.get<double>();
}

int get_int(const json& raw, const std::string& key) {
  const json& v = raw.at(key);
  require(v.is_number_integer(), "config key '" + key + "' must be an integer");
  return v.get<int>();
}

bool get_bool(const json& raw, const std::string& key) {
  const json& v = raw.at(key);
  require(v.is_boolean(), "config key '" + key + "' must be true or false");
  return v.get<bool>();
}

std::string get_string(const json& raw, const std::string& key) {
  const json& v = raw.at(key);
  require(v.is_string(), "config key '" + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> get_list(const json& raw, const std::string& key) {
  const json& v = raw.at(key);
  if (v.is_number()) return {v.get<double>()};
  require(v.is_array(), "config key '" + key + "' must be a list of numbers");
  std::vector<double> out;
  for (const json& e : v) {
    require(e.is_number(), "config key '" + key + "' must be a list of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

Matrix matrix_from_json(const json& v, const std::string& what) {
  require(v.is_array() && !v.empty(), what + " must be a nonempty list of rows");
  std::vector<std::vector<double>> rows;
  for (const json& r : v) {
    require(r.is_array() && !r.empty(), what + " must be a nonempty list of rows");
    std::vector<double> row;
    for (const json& e : r) {
      require(e.is_number(), what + " entries must be numbers");
      row.push_back(e.get<double>());
    }
    require(rows.empty() || row.size() == rows.front().size(), what + " rows must have equal length");
    rows.push_back(std::move(row));
  }
  return Matrix::from_rows(rows);
}

double shape_measure(const RunConfig& c) {
  const double omega = quad::unit_ball_volume(c.dim);
  switch (c.shape) {
    case Shape::ball: return omega * std::pow(c.radius, c.dim);
    case Shape::box: return std::pow(2.0 * c.radius, c.dim);
    case Shape::annulus: return omega * (std::pow(c.radius, c.dim) - std::pow(c.inner_radius, c.dim));
  }
  return 0.0;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

RunConfig build(const json& raw, const std::filesystem::path& base, const std::optional<std::string>& command) {
  for (const auto& [key, value] : raw.items())
    require(known_keys().count(key) != 0, "unknown config key '" + key + "'");

  RunConfig c;
  std::string name;
  if (raw.contains("command")) name = get_string(raw, "command");
  if (command.has_value()) {
    require(name.empty() || name == *command,
            "config command '" + name + "' conflicts with requested '" + *command + "'");
    name = *command;
  }
  require(!name.empty(), "config key 'command' is required");
  c.command = command_from_string(name);
  if (c.command == Command::lambda_star) {
    c.radius = 4.0;
    c.spacing = 1.0 / 48;
  }
  if (c.command == Command::oracle) c.dim = 3;

  if (raw.contains("dim")) c.dim = get_int(raw, "dim");
  if (raw.contains("shape")) c.shape = shape_from_string(get_string(raw, "shape"));
  if (raw.contains("radius")) c.radius = get_number(raw, "radius");
  if (raw.contains("spacing")) c.spacing = get_number(raw, "spacing");
  if (raw.contains("inner_radius")) c.inner_radius = get_number(raw, "inner_radius");
  if (raw.contains("mirror")) c.mirror = get_bool(raw, "mirror");
  if (raw.contains("fit")) {
    const std::string f = get_string(raw, "fit");
    require(f == "fitted" || f == "staircase", "config key 'fit' must be 'fitted' or 'staircase'");
    c.fit = f == "fitted" ? BoundaryFit::fitted : BoundaryFit::staircase;
  }
  require(!(raw.contains("matrix") && raw.contains("matrix_path")),
          "config keys 'matrix' and 'matrix_path' are mutually exclusive");
  if (raw.contains("matrix")) c.matrix = matrix_from_json(raw.at("matrix"), "config key 'matrix'");
  if (raw.contains("matrix_path")) {
    std::filesystem::path p = get_string(raw, "matrix_path");
    if (p.is_relative()) p = base / p;
    require(std::filesystem::exists(p), "config key 'matrix_path': file not found: " + p.string());
    c.matrix_path = p.string();
    c.matrix = read_matrix_file(p);
  }
  if (raw.contains("constant")) c.constant = get_list(raw, "constant");
  if (raw.contains("m")) c.m = get_number(raw, "m");
  if (raw.contains("eta")) c.eta = get_number(raw, "eta");
  if (raw.contains("etas")) c.etas = get_list(raw, "etas");
  if (raw.contains("eps")) c.eps = get_list(raw, "eps");
  if (raw.contains("radii")) c.radii = get_list(raw, "radii");
  if (raw.contains("exchange_iterations")) c.exchange_iterations = get_int(raw, "exchange_iterations");
  if (raw.contains("max_iterations")) c.max_iterations = get_int(raw, "max_iterations");
  if (raw.contains("tolerance")) c.tolerance = get_number(raw, "tolerance");
  if (raw.contains("family")) c.family = family_from_string(get_string(raw, "family"));
  if (raw.contains("lambda_spacing")) c.lambda_spacing = get_number(raw, "lambda_spacing");
  if (raw.contains("profile")) {
    const std::string p = get_string(raw, "profile");
    require(p == "capacitary" || p == "dead_core", "config key 'profile' must be 'capacitary' or 'dead_core'");
    c.profile = p == "capacitary" ? ProfileKind::capacitary : ProfileKind::dead_core;
  }
  if (raw.contains("r_eps")) c.r_eps = get_number(raw, "r_eps");
  if (raw.contains("scan")) c.scan = get_list(raw, "scan");
  if (raw.contains("monitor_radii")) c.monitor_radii = get_list(raw, "monitor_radii");
  if (raw.contains("center")) c.center = get_list(raw, "center");
  if (raw.contains("sigma")) c.sigma = get_list(raw, "sigma");
  if (raw.contains("field_path")) {
    std::filesystem::path p = get_string(raw, "field_path");
    if (p.is_relative()) p = base / p;
    require(std::filesystem::exists(p), "config key 'field_path': file not found: " + p.string());
    c.field_path = p.string();
  }
  if (raw.contains("output")) c.output = get_string(raw, "output");
  if (raw.contains("dump_fields")) c.dump_fields = get_bool(raw, "dump_fields");
  if (raw.contains("dump_format")) {
    const std::string f = get_string(raw, "dump_format");
    require(f == "binary" || f == "csv", "config key 'dump_format' must be 'binary' or 'csv'");
    c.dump_format = f == "binary" ? DumpFormat::binary : DumpFormat::csv;
  }
  if (raw.contains("seed")) {
    require(raw.at("seed").is_number_unsigned(), "config key 'seed' must be a nonnegative integer");
    c.seed = raw.at("seed").get<std::uint64_t>();
  }

  // Ranges.
  require(c.dim >= 2 && c.dim <= kMaxDim, "config key 'dim' must be in [2, " + std::to_string(kMaxDim) + "]");
  require(c.radius > 0.0, "config key 'radius' must be positive");
  require(c.spacing > 0.0 && c.spacing <= c.radius / 4.0, "config key 'spacing' must be in (0, radius / 4]");
  if (c.shape == Shape::annulus)
    require(c.inner_radius > 0.0 && c.inner_radius < c.radius, "config key 'inner_radius' must be in (0, radius)");
  require(c.eta > 0.0, "config key 'eta' must be positive");
  require(!c.etas.empty() && strictly_decreasing(c.etas) && c.etas.back() > 0.0,
          "config key 'etas' must be positive and strictly decreasing");
  require(c.max_iterations > 0, "config key 'max_iterations' must be positive");
  require(c.exchange_iterations >= 0, "config key 'exchange_iterations' must be nonnegative");
  require(c.tolerance > 0.0 && c.tolerance < 1e-2, "config key 'tolerance' must be in (0, 1e-2)");
  require(c.lambda_spacing > 0.0, "config key 'lambda_spacing' must be positive");
  require(c.matrix.has_value() + c.constant.has_value() <= 1,
          "ambiguous datum: both 'matrix' and 'constant' were given");
  if (c.constant.has_value()) require(!c.constant->empty(), "config key 'constant' must be nonempty");
  if (c.matrix.has_value())
    require(c.matrix->cols == c.dim || c.command == Command::lambda_star,
            "config key 'matrix' must have 'dim' = " + std::to_string(c.dim) + " columns");

  const double measure = shape_measure(c);
  switch (c.command) {
    case Command::lambda_star:
      require(c.matrix.has_value(), "lambda-star needs a 'matrix' datum");
      require(!c.constant.has_value(), "lambda-star takes a matrix datum, not 'constant'");
      if (c.radii.empty()) c.radii = {c.radius};
      require(strictly_increasing(c.radii) && c.radii.front() > 0.0,
              "config key 'radii' must be positive and strictly increasing");
      break;
    case Command::penalized:
      require(c.matrix.has_value() || c.constant.has_value(), "penalized needs a 'matrix' or 'constant' datum");
      require(c.m.has_value(), "penalized needs 'm'");
      require(*c.m > 0.0 && *c.m < measure,
              "config key 'm' must satisfy 0 < m < |D| = " + std::to_string(measure));
      break;
    case Command::sweep:
      require(c.matrix.has_value() || c.constant.has_value(), "sweep needs a 'matrix' or 'constant' datum");
      require(!c.eps.empty() && strictly_decreasing(c.eps) && c.eps.back() > 0.0 && c.eps.front() < measure,
              "config key 'eps' must be strictly decreasing in (0, |D|)");
      if (c.radii.empty()) c.radii = {2.0, 3.0, 4.0};
      break;
    case Command::oracle:
      require(c.r_eps > 0.0 && c.r_eps < c.radius, "config key 'r_eps' must be in (0, radius)");
      if (c.scan.empty())
        for (int i = 1; i < 20; ++i) c.scan.push_back(c.radius * i / 20.0);
      require(strictly_increasing(c.scan) && c.scan.front() > 0.0 && c.scan.back() < c.radius,
              "config key 'scan' must be strictly increasing in (0, radius)");
      break;
    case Command::monitor:
      require(!c.field_path.empty() || c.matrix.has_value() || c.constant.has_value(),
              "monitor needs 'field_path' or a datum");
      require(!c.monitor_radii.empty() && strictly_increasing(c.monitor_radii) && c.monitor_radii.front() > 0.0,
              "config key 'monitor_radii' must be positive and strictly increasing");
      if (!c.center.empty()) require(static_cast<int>(c.center.size()) == c.dim, "config key 'center' must have 'dim' entries");
      break;
  }
  return c;
}

}  // namespace

std::string to_string(Command command) {
  switch (command) {
    case Command::lambda_star: return "lambda-star";
    case Command::penalized: return "penalized";
    case Command::sweep: return "sweep";
    case Command::oracle: return "oracle";
    case Command::monitor: return "monitor";
  }
  return "?";
}

Command command_from_string(const std::string& name) {
  for (Command c : {Command::lambda_star, Command::penalized, Command::sweep, Command::oracle, Command::monitor})
    if (to_string(c) == name) return c;
  throw ValidationError("unknown command '" + name + "' (expected lambda-star, penalized, sweep, oracle or monitor)");
}

GridSpec RunConfig::grid_spec() const {
  GridSpec s;
  s.dim = dim;
  s.radius = radius;
  s.spacing = spacing;
  s.shape = shape;
  s.inner_radius = inner_radius;
  s.fit = fit;
  return s;
}

Matrix read_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read matrix file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = trim(buf.str());
  if (!text.empty() && text.front() == '[') {
    json v = json::parse(text, nullptr, false);
    require(!v.is_discarded(), "matrix file " + path.string() + ": malformed JSON");
    return matrix_from_json(v, "matrix file " + path.string());
  }
  json rows = json::array();
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    json row = json::array();
    double x;
    while (ls >> x) row.push_back(x);
    require(ls.eof(), "matrix file " + path.string() + ": non-numeric entry");
    if (!row.empty()) rows.push_back(row);
  }
  return matrix_from_json(rows, "matrix file " + path.string());
}

RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base) {
  return build(parse_raw(text), base, std::nullopt);
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  return parse_config(path, {});
}

RunConfig parse_config(const std::optional<std::filesystem::path>& path, const std::vector<std::string>& overrides,
                       const std::optional<std::string>& command) {
  json raw = json::object();
  std::filesystem::path base = ".";
  if (path.has_value()) {
    std::ifstream in(*path);
    if (!in) throw IoError("cannot read config file " + path->string());
    std::stringstream buf;
    buf << in.rdbuf();
    raw = parse_raw(buf.str());
    base = path->parent_path().empty() ? std::filesystem::path(".") : path->parent_path();
  }
  for (const std::string& o : overrides) apply_assignment(raw, o, "override");
  return build(raw, base, command);
}

}  // namespace freebound
