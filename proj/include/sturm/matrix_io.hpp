// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "sturm/csv.hpp"
#include "sturm/reference_element.hpp"

namespace sturm {

/// Dense row-major text dump with a one-line header "n rows, m cols".
template <typename Scalar>
void dump_matrix(std::ostream& os, const MatrixX<Scalar>& m) {
  os << m.rows() << " rows, " << m.cols() << " cols\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << format_significant(static_cast<double>(m(i, j)));
    }
    os << '\n';
  }
}

template <typename Scalar = double>
MatrixX<Scalar> load_matrix(std::istream& is) {
  std::string header;
  std::getline(is, header);
  Eigen::Index rows = 0, cols = 0;
  {
    std::istringstream hs(header);
    std::string word;
    hs >> rows >> word >> cols;
    if (rows <= 0 || cols <= 0) throw Error("load_matrix: bad header '" + header + "'");
  }
  MatrixX<Scalar> m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      double v = 0;
      if (!(is >> v)) throw Error("load_matrix: truncated data");
      m(i, j) = static_cast<Scalar>(v);
    }
  }
  return m;
}

}  // namespace sturm
