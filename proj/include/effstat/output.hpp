#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace effstat {

inline constexpr const char* kVersion = "1.0.0";

enum class OutputFormat { Csv, JsonLines };

OutputFormat parse_output_format(const std::string& text);

using Cell = std::variant<double, std::int64_t, bool, std::string>;

/// Numbers use 9 significant digits; NaN and infinities print as "nan",
/// "inf", "-inf" in CSV and null in JSON.
std::string format_number(double value);

/// Column-ordered result table with a metadata header.
class OutputRecord {
 public:
  explicit OutputRecord(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  const std::vector<std::pair<std::string, std::string>>& metadata() const { return metadata_; }

  void add_row(std::vector<Cell> row);
  /// Replaces an existing key in place.
  void set_meta(const std::string& key, std::string value);

  /// CSV: "# key: value" metadata lines, then an RFC 4180 header and records
  /// terminated by CRLF.
  void write_csv(std::ostream& out) const;
  /// JSON lines: a {"metadata": {...}} line, then one object per row.
  void write_json_lines(std::ostream& out) const;
  void write(std::ostream& out, OutputFormat format) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
  std::vector<std::pair<std::string, std::string>> metadata_;
};

}  // namespace effstat
