#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "calmnet/core.hpp"

namespace calmnet {

class CsvError : public ValidationError {
 public:
  CsvError(const std::filesystem::path& path, std::size_t line, const std::string& what)
      : ValidationError(path.string() + ":" + std::to_string(line) + ": " + what) {}
};

/// Line-oriented reader for the comma-separated files this project exchanges
/// (UTF-8, header row, no quoting). Validates the header on open and reports
/// 1-based line numbers on malformed rows.
class CsvReader {
 public:
  CsvReader(std::filesystem::path path, const std::vector<std::string>& expected_header)
      : path_(std::move(path)), in_(path_) {
    if (!in_)
      throw ValidationError("cannot open '" + path_.string() + "'");
    std::string header;
    if (!std::getline(in_, header))
      throw CsvError(path_, 1, "missing header row");
    strip_cr(header);
    ++line_;
    std::string want;
    for (std::size_t i = 0; i < expected_header.size(); ++i) {
      if (i) want += ',';
      want += expected_header[i];
    }
    if (header != want)
      throw CsvError(path_, 1, "expected header '" + want + "', got '" + header + "'");
    n_fields_ = expected_header.size();
  }

  /// Reads the next row into `fields`; false at end of file. Blank trailing
  /// lines are ignored.
  bool next(std::vector<std::string>& fields) {
    std::string row;
    while (std::getline(in_, row)) {
      strip_cr(row);
      ++line_;
      if (row.empty()) continue;
      split(row, fields);
      if (fields.size() != n_fields_)
        throw CsvError(path_, line_,
                       "expected " + std::to_string(n_fields_) + " fields, got " +
                           std::to_string(fields.size()));
      return true;
    }
    return false;
  }

  std::size_t line() const { return line_; }
  const std::filesystem::path& path() const { return path_; }

  std::int64_t to_int(const std::string& field) const {
    std::int64_t v = 0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [p, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || p != end)
      throw CsvError(path_, line_, "expected an integer, got '" + field + "'");
    return v;
  }

  double to_double(const std::string& field) const {
    try {
      std::size_t pos = 0;
      const double v = std::stod(field, &pos);
      if (pos != field.size()) throw std::invalid_argument(field);
      return v;
    } catch (const std::exception&) {
      throw CsvError(path_, line_, "expected a number, got '" + field + "'");
    }
  }

 private:
  static void strip_cr(std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  }

  static void split(const std::string& row, std::vector<std::string>& out) {
    out.clear();
    std::size_t start = 0;
    for (std::size_t i = 0; i <= row.size(); ++i) {
      if (i == row.size() || row[i] == ',') {
        out.emplace_back(row.substr(start, i - start));
        start = i + 1;
      }
    }
  }

  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t line_ = 0;
  std::size_t n_fields_ = 0;
};

/// Shortest decimal form that parses back to the same double; keeps exported
/// files byte-stable across runs.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = 0.0;
  for (int prec = 1; prec <= 16; ++prec) {
    char shorter[40];
    std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
    std::sscanf(shorter, "%lf", &back);
    if (back == v) return std::string(shorter);
  }
  return std::string(buf);
}

}  // namespace calmnet
