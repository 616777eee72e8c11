#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "cope/errors.hpp"

namespace cope {

using Cell = std::variant<std::int64_t, double, bool, std::string>;

struct Column {
  std::string name;
  std::vector<Cell> values;

  friend bool operator==(const Column&, const Column&) = default;
};

/// Named, equal-length columns plus an ordered metadata block that echoes the
/// configuration that produced them.
class ReportTable {
 public:
  template <typename T>
  ReportTable& add_column(std::string name, const std::vector<T>& values) {
    Column col{std::move(name), {}};
    col.values.reserve(values.size());
    for (const auto& v : values) col.values.emplace_back(to_cell(v));
    columns_.push_back(std::move(col));
    return *this;
  }

  ReportTable& add_column(Column col) {
    columns_.push_back(std::move(col));
    return *this;
  }

  /// Insert or overwrite a metadata entry; insertion order is kept.
  ReportTable& set_meta(const std::string& key, std::string value) {
    for (auto& [k, v] : metadata_)
      if (k == key) {
        v = std::move(value);
        return *this;
      }
    metadata_.emplace_back(key, std::move(value));
    return *this;
  }

  const std::vector<Column>& columns() const noexcept { return columns_; }
  const std::vector<std::pair<std::string, std::string>>& metadata() const noexcept { return metadata_; }

  const std::string* meta(std::string_view key) const {
    for (const auto& [k, v] : metadata_)
      if (k == key) return &v;
    return nullptr;
  }

  const Column& column(std::string_view name) const {
    for (const auto& c : columns_)
      if (c.name == name) return c;
    throw std::out_of_range("ReportTable: no column named '" + std::string(name) + "'");
  }

  std::size_t rows() const noexcept { return columns_.empty() ? 0 : columns_.front().values.size(); }

  void validate() const {
    std::set<std::string> names;
    for (const auto& c : columns_) {
      detail::require(names.insert(c.name).second, "ReportTable: duplicate column name '" + c.name + "'");
      detail::require(c.values.size() == rows(), "ReportTable: column '" + c.name + "' has a different length");
    }
  }

  friend bool operator==(const ReportTable&, const ReportTable&) = default;

 private:
  static Cell to_cell(double v) { return v; }
  static Cell to_cell(bool v) { return v; }
  static Cell to_cell(std::int64_t v) { return v; }
  static Cell to_cell(int v) { return static_cast<std::int64_t>(v); }
  static Cell to_cell(std::size_t v) { return static_cast<std::int64_t>(v); }
  static Cell to_cell(const std::string& v) { return v; }

  std::vector<Column> columns_;
  std::vector<std::pair<std::string, std::string>> metadata_;
};

/// Shortest representation that reads back to the same double; integral
/// values keep a trailing ".0" so they stay distinguishable from integers.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  std::string s(buf, ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

namespace detail {

inline std::string format_cell(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(const std::string& v) const {
      if (v.find_first_of(",\"\n\r") == std::string::npos) return v;
      std::string q = "\"";
      for (char c : v) {
        if (c == '"') q += '"';
        q += c;
      }
      return q + "\"";
    }
  };
  return std::visit(Visitor{}, cell);
}

inline Cell parse_cell(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && s.find_first_of(".eEni") == std::string::npos) {
    std::int64_t i = 0;
    const auto [ptr, ec] = std::from_chars(first, last, i);
    if (ec == std::errc() && ptr == last) return i;
  }
  double d = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, d);
  if (!s.empty() && ec == std::errc() && ptr == last) return d;
  return s;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw format_error("CSV: unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

}  // namespace detail

/// CSV layout: '# key: value' metadata lines, a header row, then data rows.
inline void write_csv(const ReportTable& table, std::ostream& out) {
  table.validate();
  for (const auto& [k, v] : table.metadata()) out << "# " << k << ": " << v << '\n';
  const auto& cols = table.columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c].name;
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << detail::format_cell(cols[c].values[r]);
    out << '\n';
  }
}

inline void emit_csv(const ReportTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_csv(table, out);
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

inline ReportTable parse_csv(std::istream& in) {
  ReportTable table;
  std::string line;
  std::vector<Column> cols;
  bool have_header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!have_header && line.starts_with("#")) {
      std::string_view body(line);
      body.remove_prefix(body.starts_with("# ") ? 2 : 1);
      const auto colon = body.find(": ");
      if (colon == std::string_view::npos)
        table.set_meta(std::string(body), "");
      else
        table.set_meta(std::string(body.substr(0, colon)), std::string(body.substr(colon + 2)));
      continue;
    }
    auto fields = detail::split_csv_line(line);
    if (!have_header) {
      for (auto& f : fields) cols.push_back(Column{std::move(f), {}});
      have_header = true;
      continue;
    }
    if (fields.size() != cols.size())
      throw format_error("CSV line " + std::to_string(lineno) + ": expected " + std::to_string(cols.size()) +
                         " fields, found " + std::to_string(fields.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) cols[c].values.push_back(detail::parse_cell(fields[c]));
  }
  if (!have_header) throw format_error("CSV: missing header row");
  for (auto& c : cols) table.add_column(std::move(c));
  return table;
}

inline ReportTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  return parse_csv(in);
}

/// Numeric view of a column; integers and bools convert, strings throw.
inline std::vector<double> column_as_doubles(const Column& col) {
  std::vector<double> out;
  out.reserve(col.values.size());
  for (const auto& cell : col.values) {
    if (const auto* d = std::get_if<double>(&cell))
      out.push_back(*d);
    else if (const auto* i = std::get_if<std::int64_t>(&cell))
      out.push_back(static_cast<double>(*i));
    else if (const auto* b = std::get_if<bool>(&cell))
      out.push_back(*b ? 1.0 : 0.0);
    else
      throw std::invalid_argument("column '" + col.name + "' is not numeric");
  }
  return out;
}

}  // namespace cope
