#pragma once

// Minimal RFC 4180 reader/writer: quoted fields, doubled quotes, no
// embedded newlines.

#include <string>
#include <string_view>
#include <vector>

#include "chromsearch/common.hpp"

namespace chromsearch::csv {

inline std::vector<std::string> parse_line(std::string_view line, std::string_view where = {}) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"' && cur.empty()) {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError(std::string(where) + ": unterminated quote");
  out.push_back(std::move(cur));
  return out;
}

inline std::string escape(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

// Reads a file whose first line is a header; every row must have the
// header's column count.
inline Table read_table(const std::string& path, const std::vector<std::string>& expected_header) {
  const auto lines = read_lines(path);
  Table t;
  bool have_header = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& raw = lines[i];
    if (trim(raw).empty()) continue;
    const std::string where = path + ":" + std::to_string(i + 1);
    auto fields = parse_line(raw, where);
    if (!have_header) {
      if (!expected_header.empty() && fields != expected_header) {
        throw ParseError(where + ": expected header " + join(expected_header, ","));
      }
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw ParseError(where + ": expected " + std::to_string(t.header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(i + 1);
  }
  if (!have_header) throw ParseError(path + ": empty file");
  return t;
}

}  // namespace chromsearch::csv
