#include "lagaboost/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

namespace lagaboost {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto first = cell.find_first_not_of(" \t");
    const auto last = cell.find_last_not_of(" \t");
    out.push_back(first == std::string::npos ? std::string() : cell.substr(first, last - first + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw CsvError("missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has_column(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      if (line.empty()) continue;
      t.header = split_line(line);
      for (std::size_t c = 0; c < t.header.size(); ++c) {
        if (t.header[c].empty()) throw CsvError("empty name for header column " + std::to_string(c + 1));
        if (std::count(t.header.begin(), t.header.end(), t.header[c]) > 1) {
          throw CsvError("duplicate column '" + t.header[c] + "'");
        }
      }
      have_header = true;
      continue;
    }
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != t.header.size()) {
      throw CsvError("row " + std::to_string(t.rows.size() + 1) + " has " + std::to_string(cells.size()) +
                     " cells, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (!have_header) throw CsvError("missing header row");
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CsvError("cannot open '" + path + "'");
  return read_csv(is);
}

double parse_double(const std::string& cell, const std::string& column, std::size_t row) {
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (!cell.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw CsvError("non-numeric value '" + cell + "' in column '" + column + "' at row " + std::to_string(row));
  }
  return v;
}

std::int64_t parse_int(const std::string& cell, const std::string& column, std::size_t row) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
    // Accept integral values written as decimals, e.g. "12.0".
    const double d = parse_double(cell, column, row);
    if (d != std::floor(d) || std::abs(d) > 9e15) {
      throw CsvError("non-integer group id '" + cell + "' in column '" + column + "' at row " + std::to_string(row));
    }
    return static_cast<std::int64_t>(d);
  }
  return v;
}

Eigen::VectorXd numeric_column(const CsvTable& t, const std::string& name) {
  const std::size_t c = t.column(name);
  Eigen::VectorXd v(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) v[r] = parse_double(t.rows[r][c], name, r + 1);
  return v;
}

std::vector<std::int64_t> integer_column(const CsvTable& t, const std::string& name) {
  const std::size_t c = t.column(name);
  std::vector<std::int64_t> v(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) v[r] = parse_int(t.rows[r][c], name, r + 1);
  return v;
}

Eigen::MatrixXd numeric_columns(const CsvTable& t, const std::vector<std::string>& names) {
  Eigen::MatrixXd X(t.rows.size(), names.size());
  for (std::size_t k = 0; k < names.size(); ++k) X.col(k) = numeric_column(t, names[k]);
  return X;
}

}  // namespace lagaboost
