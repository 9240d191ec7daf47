#include "sklab/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "sklab/error.hpp"

namespace sklab {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string config_hash(const nlohmann::json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
    h >>= 4;
  }
  return out;
}

nlohmann::json output_metadata(const nlohmann::json& config, std::uint64_t base_seed) {
  return {{"tool", "sklab"},
          {"version", kToolVersion},
          {"config_hash", config_hash(config)},
          {"base_seed", base_seed}};
}

nlohmann::json report_envelope(const std::string& kind, const nlohmann::json& config,
                               std::uint64_t base_seed, nlohmann::json result) {
  nlohmann::json meta = output_metadata(config, base_seed);
  meta["kind"] = kind;
  return {{"schema", kReportSchema},
          {"meta", std::move(meta)},
          {"config", config},
          {"result", std::move(result)}};
}

void CsvTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size()) throw DomainError("CsvTable: row width != column count");
  rows_.push_back(std::move(row));
}

std::string CsvTable::render(const nlohmann::json& metadata) const {
  std::string out = "# " + metadata.dump() + "\n";
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (c) out += ',';
    out += columns_[c];
  }
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              out += format_double(v);
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
              out += std::to_string(v);
            } else {
              out += v;
            }
          },
          row[c]);
    }
    out += '\n';
  }
  return out;
}

CsvTable trace_table(const IterTrace& trace) {
  CsvTable t({"k", "i", "value"});
  for (std::size_t k = 0; k < trace.levels.size(); ++k) {
    for (std::size_t i = 0; i < trace.levels[k].size(); ++i) {
      t.add_row({static_cast<std::int64_t>(k), static_cast<std::int64_t>(i), trace.levels[k][i]});
    }
  }
  return t;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open output file " + path.string());
  out << text;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

void write_csv(const std::filesystem::path& path, const CsvTable& table,
               const nlohmann::json& metadata) {
  write_text(path, table.render(metadata));
}

}  // namespace sklab
