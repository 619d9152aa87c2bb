#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace lagaboost {

struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Comma-separated text with a header row; no quoting. Row numbers in error
/// messages are 1-based data rows (the header is row 0).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a named column; throws CsvError naming it when absent.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
  std::size_t num_rows() const { return rows.size(); }
};

CsvTable read_csv(std::istream& is);
CsvTable read_csv_file(const std::string& path);

double parse_double(const std::string& cell, const std::string& column, std::size_t row);
std::int64_t parse_int(const std::string& cell, const std::string& column, std::size_t row);

Eigen::VectorXd numeric_column(const CsvTable& t, const std::string& name);
std::vector<std::int64_t> integer_column(const CsvTable& t, const std::string& name);
Eigen::MatrixXd numeric_columns(const CsvTable& t, const std::vector<std::string>& names);

}  // namespace lagaboost
