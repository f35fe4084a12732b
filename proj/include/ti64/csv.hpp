#pragma once

#include <cstdio>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "ti64/errors.hpp"

namespace ti64::csv {

/// Shortest fixed-format float rendering, 9 significant digits. Used for all
/// file output so results are byte-identical across thread counts.
inline std::string format9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim ASCII whitespace
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline double to_double(const std::string& s, long line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw ParseError("trailing characters in numeric cell '" + s + "'", line);
    return v;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError("non-numeric cell '" + s + "'", line);
  }
}

/// Reads a CSV with the exact given header; returns data rows with their
/// 1-based line numbers. Blank lines and '#' comments are skipped.
inline std::vector<std::pair<long, std::vector<std::string>>> read_rows(
    std::istream& in, const std::string& expected_header) {
  std::string line;
  long lineno = 0;
  bool have_header = false;
  std::vector<std::pair<long, std::vector<std::string>>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      std::string compact;
      for (char c : line)
        if (c != ' ' && c != '\t') compact += c;
      if (compact != expected_header)
        throw ParseError("expected header '" + expected_header + "', got '" + line + "'",
                         lineno);
      have_header = true;
      continue;
    }
    rows.emplace_back(lineno, split_line(line));
  }
  if (!have_header) throw ParseError("missing header '" + expected_header + "'");
  return rows;
}

}  // namespace ti64::csv
