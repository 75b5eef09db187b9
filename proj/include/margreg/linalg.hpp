#pragma once

// Dense linear-algebra substrate shared by every other module: designs,
// support sets, Gram partitions, symmetric eigen extremes, SPD solves and
// nested-projection residuals.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace margreg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = std::size_t;

inline constexpr double kUnitNormTolerance = 1e-12;
inline constexpr double kSymmetryTolerance = 1e-10;
inline constexpr double kRankTolerance = 1e-10;

/// An n x p design. Columns are variables, rows are observations.
class DesignMatrix {
 public:
  /// Validates shape and finiteness. When `standardized` is true the unit
  /// column norm claim is checked, not trusted.
  explicit DesignMatrix(Matrix values, bool standardized = false);

  /// Wraps `values`, setting the standardized flag iff every column already
  /// has unit norm to within kUnitNormTolerance.
  static DesignMatrix detect(Matrix values);

  const Matrix& values() const noexcept { return values_; }
  Index n() const noexcept { return static_cast<Index>(values_.rows()); }
  Index p() const noexcept { return static_cast<Index>(values_.cols()); }
  bool standardized() const noexcept { return standardized_; }
  auto column(Index j) const { return values_.col(static_cast<Eigen::Index>(j)); }

 private:
  Matrix values_;
  bool standardized_;
};

/// Strictly increasing column indices, all below p.
class SupportSet {
 public:
  SupportSet() = default;

  /// Accepts indices in any order; sorts them and rejects duplicates or
  /// anything >= p.
  static SupportSet from_indices(std::vector<Index> indices, Index p);

  /// Nonzero coordinates of `beta`.
  static SupportSet of(const Vector& beta);

  const std::vector<Index>& indices() const noexcept { return indices_; }
  Index size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  Index universe() const noexcept { return p_; }
  bool contains(Index j) const;

  /// Indices of [0, p) not in the set, increasing.
  std::vector<Index> complement() const;

  friend bool operator==(const SupportSet&, const SupportSet&) = default;

 private:
  std::vector<Index> indices_;
  Index p_ = 0;
};

/// C = X^T X split by a support set. C_NN is never formed.
struct GramPartition {
  Matrix c_ss;       // s x s
  Matrix c_ns;       // (p - s) x s, rows follow support.complement()
  SupportSet support;
  Vector full_diag;  // diagonal of C, length p
};

DesignMatrix standardize_columns(const DesignMatrix& x);

GramPartition gram_partition(const DesignMatrix& x, const SupportSet& s);

/// Smallest eigenvalue of a symmetric matrix. Input is symmetrized by
/// averaging with its transpose after the kSymmetryTolerance check.
double min_eigenvalue(const Matrix& m);

/// Maximum absolute row sum. Summation runs left to right over each row.
double inf_operator_norm(const Matrix& m);

/// Solves m v = b for symmetric positive definite m. Throws
/// NearSingularError when lambda_min(m) <= 1e-12.
Vector solve_spd(const Matrix& m, const Vector& b);
Matrix solve_spd(const Matrix& m, const Matrix& b);

/// delta(k) = ||(H(k+1) - H(k)) y|| for k = 1 .. L-1, where H(k) projects
/// onto the span of the first k columns listed in `order`. A column that
/// does not enlarge the span yields exactly 0.
std::vector<double> project_residual_norms(const DesignMatrix& x,
                                           std::span<const Index> order,
                                           const Vector& y);

/// Gathers the listed columns of x into a new matrix.
Matrix gather_columns(const Matrix& x, std::span<const Index> cols);

}  // namespace margreg
