#ifndef GP_DATASET_HPP
#define GP_DATASET_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "gp/numerics.hpp"

namespace gp {

/// Columnar numeric table read from CSV. A trailing column named "label"
/// is kept as strings (class labels / plot coloring); every other column
/// must be numeric.
struct Dataset {
  std::vector<std::string> columns;  // numeric column names
  Matrix values;                     // n x columns.size()
  std::vector<std::string> labels;   // trailing "label" column, if present

  bool has_labels() const noexcept { return !labels.empty(); }
  Eigen::Index rows() const noexcept { return values.rows(); }

  /// Index of a numeric column by name, or -1.
  Eigen::Index find_column(const std::string& name) const;
};

/// RFC-4180-style reader: header required, comma separated, double-quote
/// escaping, UTF-8, '.' decimal separator.
Dataset read_csv(std::istream& in);
Dataset read_csv_file(const std::string& path);

/// Full-precision formatting (17 significant digits) used for CSV output
/// so written predictions round-trip exactly.
std::string format_full(double v);

}  // namespace gp

#endif  // GP_DATASET_HPP
