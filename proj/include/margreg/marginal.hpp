#pragma once

// Marginal regression: alpha = X^T Y, hard thresholding, rank screening, the
// data-driven support-size estimate and the signal-resolution functional.

#include <string>
#include <vector>

#include "margreg/linalg.hpp"

namespace margreg {

struct MarginalFit {
  Vector alpha_hat;
  std::vector<Index> order;  // columns sorted by |alpha_hat| descending
  double threshold = 0.0;
  SupportSet selected;

  /// alpha_hat on the selected set, zero elsewhere.
  Vector estimate() const;
  std::string to_json(bool include_alpha, int indent = 2) const;
};

/// X^T Y.
Vector marginal_coefficients(const DesignMatrix& x, const Vector& y);

/// Indices sorted by |alpha| descending; ties go to the lower index.
std::vector<Index> rank_order(const Vector& alpha);

MarginalFit threshold_select(const Vector& alpha_hat, double t);

/// The k columns with largest |alpha|, returned as a sorted support set.
SupportSet top_k_screen(const Vector& alpha_hat, Index k);

struct SupportSizeEstimate {
  Index s_hat = 1;
  double cutoff = 0.0;          // sigma sqrt(2 log n)
  std::vector<Index> order;     // data-driven ranking of all p columns
  std::vector<double> delta;    // delta(k), k = 1 .. K_max
  SupportSet support;           // top s_hat columns of `order`
};

/// s_hat = max{k : delta(k) >= sigma sqrt(2 log n)} + 1, or 1 when no k
/// qualifies. delta is scanned for k up to min(p - 1, n - 1).
SupportSizeEstimate estimate_support_size(const DesignMatrix& x, const Vector& y,
                                          double sigma);

struct DeltaStar {
  double value = 0.0;
  bool degenerate = false;          // X_S column-rank deficient or s > n
  std::vector<double> per_index;    // Delta(k) in support order
};

/// min over the support of |beta_j| times the distance from x_j to the span
/// of the other support columns.
DeltaStar delta_star(const DesignMatrix& x, const Vector& beta);

/// Nested top-k supports for k = 1 .. k_max.
std::vector<SupportSet> mr_path(const DesignMatrix& x, const Vector& y, Index k_max);

}  // namespace margreg
