#pragma once

// CSV I/O. Matrix format: row-major, no header, full square matrix;
// symmetry is validated to 1e-9 on load and the matrix symmetrized by
// averaging. Data format: n rows x p columns, no header.

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "gmrf/errors.hpp"
#include "gmrf/linalg.hpp"
#include "gmrf/models.hpp"

namespace gmrf {

inline std::vector<std::vector<double>> parse_csv_rows(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IOFailure("csv: cannot parse value '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw IOFailure("csv: ragged rows");
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix load_matrix_csv_stream(std::istream& in) {
  const auto rows = parse_csv_rows(in);
  if (rows.empty()) throw IOFailure("csv: empty matrix");
  const auto n = rows.size();
  if (rows.front().size() != n) throw IOFailure("csv: matrix must be square");
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = rows[i][j];
  if (sup_norm_deviation(m, m.transpose().eval()) > 1e-9)
    throw IOFailure("csv: matrix is not symmetric within 1e-9");
  return ((m + m.transpose()) * 0.5).eval();
}

inline Matrix load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IOFailure("cannot open " + path);
  return load_matrix_csv_stream(in);
}

inline void save_matrix_csv(const Matrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IOFailure("cannot open " + path + " for writing");
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
}

inline SampleSet load_data_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IOFailure("cannot open " + path);
  const auto rows = parse_csv_rows(in);
  if (rows.empty()) throw IOFailure("csv: empty data file");
  SampleSet xs;
  xs.x.resize(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.front().size(); ++j) xs.x(i, j) = rows[i][j];
  return xs;
}

inline void save_data_csv(const SampleSet& xs, const std::string& path) {
  save_matrix_csv(xs.x, path);  // same layout, no squareness requirement
}

}  // namespace gmrf
