// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <variant>
#include <vector>

#include "robin/error.hpp"

namespace robin::io {

/// Scientific notation with 17 significant digits, '.' decimal point.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

using Cell = std::variant<double, long, std::string>;

inline std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  if (const auto* i = std::get_if<long>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

/// Comma-separated file with a header row.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : out_(path), columns_(header.size()) {
    if (!out_) throw Error("io", "cannot open " + path.string());
    write_line(header);
  }

  void row(std::initializer_list<Cell> cells) {
    if (cells.size() != columns_) throw Error("io", "row width does not match header");
    std::vector<std::string> s;
    for (const auto& c : cells) s.push_back(format_cell(c));
    write_line(s);
  }

 private:
  void write_line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

  std::ofstream out_;
  std::size_t columns_;
};

}  // namespace robin::io
