#include "freebound/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "freebound/error.hpp"

namespace freebound {

using nlohmann::json;

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += '\n';
  char buf[32];
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      out += (i ? "," : "");
      out += buf;
    }
    out += '\n';
  }
  return out;
}

Table history_table(const std::vector<double>& history, const std::string& column) {
  Table t{{"step", column}, {}};
  for (std::size_t i = 0; i < history.size(); ++i) t.rows.push_back({static_cast<double>(i), history[i]});
  return t;
}

Table frequency_table(const FrequencySeries& series, const std::vector<double>& acf) {
  Table t{{"r", "D", "H", "N", "flagged"}, {}};
  if (!acf.empty()) {
    require(acf.size() == series.radii.size(), "ACF series must share the frequency radii");
    t.columns.push_back("Phi");
  }
  for (std::size_t i = 0; i < series.radii.size(); ++i) {
    std::vector<double> row{series.radii[i], series.D[i], series.H[i], series.N[i], series.flagged[i] ? 1.0 : 0.0};
    if (!acf.empty()) row.push_back(acf[i]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table sweep_table(const SweepResult& result) {
  Table t{{"eps", "quotient", "dead_hausdorff", "lip_norm", "eta", "saturated", "support_measure", "dead_cells",
           "h1_gap", "rescaled_energy", "lambda_flux", "converged"},
          {}};
  for (const SweepEntry& e : result.entries)
    t.rows.push_back({e.eps, e.quotient, e.dead_hausdorff, e.lip_norm, e.eta, e.saturated ? 1.0 : 0.0,
                      e.support_measure, static_cast<double>(e.dead_cells), e.h1_gap, e.rescaled_energy,
                      e.lambda_flux, e.converged ? 1.0 : 0.0});
  return t;
}

Table profile_table(const RadialProfile& profile) {
  Table t{{"r", "value"}, {}};
  for (const auto& [r, v] : profile.samples) t.rows.push_back({r, v});
  return t;
}

Table reduction_table(const RadialReduction& reduction) {
  Table t{{"radius", "measure", "energy", "ratio"}, {}};
  for (std::size_t i = 0; i < reduction.radii.size(); ++i)
    t.rows.push_back({reduction.radii[i], reduction.measures[i], reduction.energies[i], reduction.ratios[i]});
  return t;
}

Table saturation_table(const SaturationResult& result) {
  Table t{{"eta", "support_measure", "saturated", "energy", "total"}, {}};
  for (std::size_t i = 0; i < result.etas.size(); ++i)
    t.rows.push_back({result.etas[i], result.support_measures[i], result.saturated[i] ? 1.0 : 0.0,
                      result.reports[i].energy, result.reports[i].total});
  return t;
}

json to_json(const LambdaStarEstimate& e) {
  return json{{"value", e.value},
              {"method", to_string(e.method)},
              {"R_used", e.R_used},
              {"h_used", e.h_used},
              {"frob_sq", e.datum.frob_sq},
              {"rank", e.datum.rank},
              {"gram_eigs", e.datum.gram_eigs},
              {"lower_bound", e.lower_bound},
              {"contact_measure", e.contact_measure},
              {"semi_axes", e.semi_axes},
              {"solves", e.solves},
              {"rejected", e.rejected}};
}

json to_json(const SolveReport& r) {
  return json{{"energy", r.energy},
              {"support_measure", r.support_measure},
              {"penalty", r.penalty},
              {"total", r.total},
              {"lambda_flux", r.lambda_flux},
              {"lambda_shape", r.lambda_shape},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"harmonic_energy", r.harmonic_energy},
              {"lower_bound", r.lower_bound},
              {"upper_bound", r.upper_bound},
              {"fallback", r.fallback}};
}

json to_json(const SweepResult& r) {
  const std::size_t d = r.grad_h.empty() ? r.x0.size() : r.grad_h.front().size();
  std::vector<double> x0(r.x0.begin(), r.x0.begin() + static_cast<std::ptrdiff_t>(d));
  return json{{"lambda_target", r.lambda_target},
              {"in_hypothesis", r.in_hypothesis},
              {"x0", x0},
              {"harmonic_energy", r.harmonic_energy},
              {"grad_h", r.grad_h},
              {"entries", r.entries.size()}};
}

void ResultSet::add_table(const std::string& name, const Table& table) { files_[name + ".csv"] = table.to_csv(); }

void ResultSet::add_field(const std::string& name, const VectorField& field, DumpFormat format) {
  std::ostringstream out(std::ios::binary);
  write_field(out, field, format);
  files_[name + (format == DumpFormat::binary ? ".fbf" : ".csv")] = out.str();
}

void ResultSet::add_text(const std::string& file, std::string contents) { files_[file] = std::move(contents); }

std::vector<ManifestEntry> ResultSet::emit() const {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
  std::map<std::string, std::string> all = files_;
  all["summary.json"] = summary_.dump(2) + "\n";
  std::vector<ManifestEntry> manifest;
  json listing = json::array();
  for (const auto& [name, contents] : all) {
    const std::filesystem::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("cannot write " + p.string());
    manifest.push_back({name, sha256_hex(contents), contents.size()});
    listing.push_back({{"path", name}, {"sha256", manifest.back().sha256}, {"bytes", contents.size()}});
  }
  const std::filesystem::path mp = dir_ / "manifest.json";
  std::ofstream out(mp, std::ios::binary | std::ios::trunc);
  out << json{{"files", listing}}.dump(2) << "\n";
  if (!out) throw IoError("cannot write " + mp.string());
  return manifest;
}

}  // namespace freebound
