#include "gp/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>

namespace gp {

namespace {

// Splits one CSV record, honoring double-quoted fields with "" escapes.
std::vector<std::string> split_record(const std::string& line,
                                      std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (quoted)
    throw ParseError("line " + std::to_string(line_no) +
                         ": unterminated quoted field",
                     line.size());
  fields.push_back(std::move(cur));
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r'))
    --e;
  return s.substr(b, e - b);
}

double parse_number(const std::string& field, std::size_t line_no,
                    std::size_t col_no) {
  const std::string t = trim(field);
  double value = 0.0;
  const auto [next, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || next != t.data() + t.size())
    throw ParseError("line " + std::to_string(line_no) + ", column " +
                         std::to_string(col_no) + ": not a number: '" + t +
                         "'",
                     col_no);
  return value;
}

}  // namespace

Eigen::Index Dataset::find_column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<Eigen::Index>(i);
  return -1;
}

Dataset read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw EmptyData("CSV is empty");
  std::vector<std::string> header = split_record(line, 1);
  for (std::string& h : header) h = trim(h);
  if (header.empty() || (header.size() == 1 && header[0].empty()))
    throw EmptyData("CSV has no header columns");

  const bool has_label_col = header.back() == "label";
  const std::size_t numeric_cols = header.size() - (has_label_col ? 1 : 0);
  if (numeric_cols == 0)
    throw InvalidInput("CSV needs at least one numeric column");

  Dataset ds;
  ds.columns.assign(header.begin(),
                    header.begin() + static_cast<std::ptrdiff_t>(numeric_cols));

  std::vector<double> data;
  std::size_t rows = 0, line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_record(line, line_no);
    if (fields.size() != header.size())
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    for (std::size_t j = 0; j < numeric_cols; ++j)
      data.push_back(parse_number(fields[j], line_no, j + 1));
    if (has_label_col) ds.labels.push_back(trim(fields.back()));
    ++rows;
  }
  if (rows == 0) throw EmptyData("CSV has a header but no data rows");

  ds.values.resize(static_cast<Eigen::Index>(rows),
                   static_cast<Eigen::Index>(numeric_cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < numeric_cols; ++j)
      ds.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          data[i * numeric_cols + j];
  return ds;
}

Dataset read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open file: " + path);
  return read_csv(in);
}

std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace gp
