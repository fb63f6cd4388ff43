#pragma once

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "optshrink/linalg.hpp"

namespace optshrink {

// Matrix CSV convention: one row per line, decimal reals. An empty cell or a
// literal NaN marks a missing entry: the loaded matrix stores 0 there and the
// mask records 0, so X_tilde = M .* (S + X) comes straight off disk.
struct CsvMatrix {
  Matrix matrix;
  Matrix mask;  // 1 observed, 0 missing
  bool has_missing = false;

  double observed_fraction() const {
    return mask.size() > 0 ? mask.sum() / static_cast<double>(mask.size()) : 0.0;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

inline bool is_nan_token(const std::string& cell) {
  return cell.size() == 3 && (cell[0] == 'n' || cell[0] == 'N') &&
         (cell[1] == 'a' || cell[1] == 'A') && (cell[2] == 'n' || cell[2] == 'N');
}

}  // namespace detail

inline CsvMatrix load_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open matrix file: " + path.string());
  }
  std::vector<std::vector<double>> values;
  std::vector<std::vector<double>> bits;
  bool has_missing = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::trim(line);
    if (line.empty()) continue;
    std::vector<double> row;
    std::vector<double> row_bits;
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      cell = detail::trim(cell);
      if (cell.empty() || detail::is_nan_token(cell)) {
        row.push_back(0.0);
        row_bits.push_back(0.0);
        has_missing = true;
        continue;
      }
      std::size_t consumed = 0;
      double value = 0.0;
      try {
        value = std::stod(cell, &consumed);
      } catch (const std::exception&) {
        throw std::invalid_argument("line " + std::to_string(line_no) +
                                    ": cannot parse cell '" + cell + "'");
      }
      if (consumed != cell.size() || !std::isfinite(value)) {
        throw std::invalid_argument("line " + std::to_string(line_no) +
                                    ": cannot parse cell '" + cell + "'");
      }
      row.push_back(value);
      row_bits.push_back(1.0);
    }
    if (line.back() == ',') {  // trailing comma means a final missing cell
      row.push_back(0.0);
      row_bits.push_back(0.0);
      has_missing = true;
    }
    if (!values.empty() && row.size() != values.front().size()) {
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": ragged row (expected " +
                                  std::to_string(values.front().size()) +
                                  " cells, got " + std::to_string(row.size()) + ")");
    }
    values.push_back(std::move(row));
    bits.push_back(std::move(row_bits));
  }
  if (values.empty() || values.front().empty()) {
    throw std::invalid_argument("matrix file is empty: " + path.string());
  }
  const Index rows = static_cast<Index>(values.size());
  const Index cols = static_cast<Index>(values.front().size());
  CsvMatrix out;
  out.matrix.resize(rows, cols);
  out.mask.resize(rows, cols);
  out.has_missing = has_missing;
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      out.matrix(i, j) = values[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      out.mask(i, j) = bits[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return out;
}

inline void save_matrix_csv(const std::filesystem::path& path, const Matrix& a) {
  validate_finite(a, "matrix to save");
  std::ofstream out(path);
  if (!out) {
    throw std::invalid_argument("cannot open output file: " + path.string());
  }
  char buffer[64];
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      std::snprintf(buffer, sizeof(buffer), "%.17g", a(i, j));
      out << buffer;
      if (j + 1 < a.cols()) out << ',';
    }
    out << '\n';
  }
  if (!out) {
    throw std::runtime_error("failed writing matrix file: " + path.string());
  }
}

}  // namespace optshrink
