#pragma once

// Shared helpers for the test binaries: random matrices and independent
// reference computations.

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "margreg/linalg.hpp"

namespace margreg::test {

inline Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

inline DesignMatrix random_standardized(Eigen::Index n, Eigen::Index p, std::mt19937_64& rng) {
  return standardize_columns(DesignMatrix(gaussian_matrix(n, p, rng)));
}

// [[1, -1/2, c], [-1/2, 1, 0], [c, 0, 1]].
inline Matrix small_example_gram(double c) {
  Matrix m(3, 3);
  m << 1.0, -0.5, c, -0.5, 1.0, 0.0, c, 0.0, 1.0;
  return m;
}

// Orthogonal projection onto span of the listed columns via the
// pseudo-inverse: H = A A^+.
inline Matrix projection_onto(const Matrix& x, const std::vector<Index>& cols) {
  Matrix a(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    a.col(static_cast<Eigen::Index>(k)) = x.col(static_cast<Eigen::Index>(cols[k]));
  }
  return a * a.completeOrthogonalDecomposition().pseudoInverse();
}

// A standardized design whose Gram matrix is exactly `gram` (n = p), from
// the Cholesky factor.
inline DesignMatrix design_with_gram(const Matrix& gram) {
  const Eigen::LLT<Matrix> llt(gram);
  Matrix x = llt.matrixU();
  return standardize_columns(DesignMatrix(x));
}

// Random SPD matrix with unit diagonal: normalized Gram of a Gaussian
// design with n rows.
inline Matrix random_correlation(Eigen::Index dim, Eigen::Index n, std::mt19937_64& rng) {
  const DesignMatrix x = random_standardized(n, dim, rng);
  Matrix c = x.values().transpose() * x.values();
  c.diagonal().setOnes();
  return 0.5 * (c + c.transpose());
}

}  // namespace margreg::test
