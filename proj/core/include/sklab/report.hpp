#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sklab/amp.hpp"

namespace sklab {

inline constexpr const char* kReportSchema = "sklab.report/1";
inline constexpr const char* kToolVersion = SKLAB_VERSION;

/// 17 significant digits, locale-independent ("nan"/"inf" for non-finite).
std::string format_double(double v);

/// FNV-1a 64 of the compact JSON dump, as 16 lowercase hex digits.
std::string config_hash(const nlohmann::json& config);

/// Provenance block carried by every output file.
nlohmann::json output_metadata(const nlohmann::json& config, std::uint64_t base_seed);

/// {"schema", "meta", "config", "result"}.
nlohmann::json report_envelope(const std::string& kind, const nlohmann::json& config,
                               std::uint64_t base_seed, nlohmann::json result);

class CsvTable {
 public:
  using Cell = std::variant<double, std::int64_t, std::string>;

  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}
  void add_row(std::vector<Cell> row);

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }

  /// "# <metadata json>" line, header line, then rows.
  std::string render(const nlohmann::json& metadata) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

/// Columns (k, i, value).
CsvTable trace_table(const IterTrace& trace);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
void write_csv(const std::filesystem::path& path, const CsvTable& table,
               const nlohmann::json& metadata);

}  // namespace sklab
