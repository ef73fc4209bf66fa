#include "effstat/output.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace effstat {

namespace {

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (const char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

std::string csv_cell(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return format_number(*d);
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  if (const auto* b = std::get_if<bool>(&cell)) return *b ? "true" : "false";
  return csv_field(std::get<std::string>(cell));
}

std::string json_cell(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell))
    return std::isfinite(*d) ? format_number(*d) : "null";
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  if (const auto* b = std::get_if<bool>(&cell)) return *b ? "true" : "false";
  return nlohmann::json(std::get<std::string>(cell)).dump();
}

}  // namespace

OutputFormat parse_output_format(const std::string& text) {
  if (text == "csv") return OutputFormat::Csv;
  if (text == "json") return OutputFormat::JsonLines;
  throw std::invalid_argument("unknown output format '" + text + "'");
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

OutputRecord::OutputRecord(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void OutputRecord::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size()) throw std::logic_error("row width does not match columns");
  rows_.push_back(std::move(row));
}

void OutputRecord::set_meta(const std::string& key, std::string value) {
  for (auto& [k, v] : metadata_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  metadata_.emplace_back(key, std::move(value));
}

void OutputRecord::write_csv(std::ostream& out) const {
  for (const auto& [key, value] : metadata_) out << "# " << key << ": " << value << "\r\n";
  for (std::size_t i = 0; i < columns_.size(); ++i)
    out << (i ? "," : "") << csv_field(columns_[i]);
  out << "\r\n";
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
    out << "\r\n";
  }
}

void OutputRecord::write_json_lines(std::ostream& out) const {
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  for (const auto& [key, value] : metadata_) meta[key] = value;
  out << nlohmann::ordered_json{{"metadata", meta}}.dump() << '\n';
  for (const auto& row : rows_) {
    out << '{';
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << nlohmann::json(columns_[i]).dump() << ':' << json_cell(row[i]);
    out << "}\n";
  }
}

void OutputRecord::write(std::ostream& out, OutputFormat format) const {
  if (format == OutputFormat::Csv)
    write_csv(out);
  else
    write_json_lines(out);
}

}  // namespace effstat
