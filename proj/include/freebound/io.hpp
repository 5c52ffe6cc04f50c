#pragma once

// Result persistence: summary.json for scalars, one CSV per series, optional
// field dumps, and manifest.json listing every file with its SHA-256.
// Output bytes depend only on the results, never on timing or scheduling.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "freebound/lambda_star.hpp"
#include "freebound/monitors.hpp"
#include "freebound/penalized.hpp"
#include "freebound/radial.hpp"
#include "freebound/sweep.hpp"

namespace freebound {

std::string sha256_hex(std::string_view data);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::string to_csv() const;  // header line, then %.17g values
};

Table history_table(const std::vector<double>& history, const std::string& column = "value");
Table frequency_table(const FrequencySeries& series, const std::vector<double>& acf = {});
Table sweep_table(const SweepResult& result);
Table profile_table(const RadialProfile& profile);
Table reduction_table(const RadialReduction& reduction);
Table saturation_table(const SaturationResult& result);

nlohmann::json to_json(const LambdaStarEstimate& estimate);
nlohmann::json to_json(const SolveReport& report);
nlohmann::json to_json(const SweepResult& result);

struct ManifestEntry {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::size_t bytes = 0;
};

class ResultSet {
 public:
  explicit ResultSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

  nlohmann::json& summary() { return summary_; }
  void add_table(const std::string& name, const Table& table);  // writes <name>.csv
  void add_field(const std::string& name, const VectorField& field, DumpFormat format);
  void add_text(const std::string& file, std::string contents);

  /// Writes every file plus manifest.json (files sorted by path) and returns
  /// the manifest. Throws IoError naming the path on failure.
  std::vector<ManifestEntry> emit() const;

 private:
  std::filesystem::path dir_;
  nlohmann::json summary_ = nlohmann::json::object();
  std::map<std::string, std::string> files_;
};

}  // namespace freebound
