#include "margreg/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "margreg/errors.hpp"

namespace margreg {

namespace {

using EIdx = Eigen::Index;

// Orthonormal basis (CGS2) of the listed columns; dependent columns dropped.
Matrix orthonormal_basis(const Matrix& x, const std::vector<Index>& cols) {
  Matrix q(x.rows(), static_cast<EIdx>(std::min<std::size_t>(cols.size(), x.rows())));
  EIdx rank = 0;
  for (Index j : cols) {
    if (rank == q.cols()) break;
    Vector v = x.col(static_cast<EIdx>(j));
    const double original = v.norm();
    for (int pass = 0; pass < 2 && rank > 0; ++pass) {
      const Vector c = q.leftCols(rank).transpose() * v;
      v.noalias() -= q.leftCols(rank) * c;
    }
    const double residual = v.norm();
    if (original > 0.0 && residual >= kRankTolerance * original) {
      q.col(rank++) = v / residual;
    }
  }
  return q.leftCols(rank);
}

}  // namespace

Vector MarginalFit::estimate() const {
  Vector b = Vector::Zero(alpha_hat.size());
  for (Index j : selected.indices()) b(static_cast<EIdx>(j)) = alpha_hat(static_cast<EIdx>(j));
  return b;
}

Vector marginal_coefficients(const DesignMatrix& x, const Vector& y) {
  if (static_cast<Index>(y.size()) != x.n()) {
    throw Error(ErrorCode::DimensionMismatch,
                "response has length " + std::to_string(y.size()) + " but design has n = " +
                    std::to_string(x.n()));
  }
  return x.values().transpose() * y;
}

std::vector<Index> rank_order(const Vector& alpha) {
  std::vector<Index> order(static_cast<std::size_t>(alpha.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    const double fa = std::abs(alpha(static_cast<EIdx>(a)));
    const double fb = std::abs(alpha(static_cast<EIdx>(b)));
    return fa > fb || (fa == fb && a < b);
  });
  return order;
}

MarginalFit threshold_select(const Vector& alpha_hat, double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "threshold must be >= 0");
  const Index p = static_cast<Index>(alpha_hat.size());
  std::vector<Index> keep;
  for (Index j = 0; j < p; ++j) {
    if (std::abs(alpha_hat(static_cast<EIdx>(j))) >= t) keep.push_back(j);
  }
  MarginalFit fit;
  fit.alpha_hat = alpha_hat;
  fit.order = rank_order(alpha_hat);
  fit.threshold = t;
  fit.selected = SupportSet::from_indices(std::move(keep), p);
  return fit;
}

SupportSet top_k_screen(const Vector& alpha_hat, Index k) {
  const Index p = static_cast<Index>(alpha_hat.size());
  if (k < 1 || k > p) {
    throw Error(ErrorCode::KOutOfRange,
                "k = " + std::to_string(k) + " outside [1, " + std::to_string(p) + "]");
  }
  std::vector<Index> order = rank_order(alpha_hat);
  order.resize(k);
  return SupportSet::from_indices(std::move(order), p);
}

SupportSizeEstimate estimate_support_size(const DesignMatrix& x, const Vector& y,
                                          double sigma) {
  if (!x.standardized()) {
    throw Error(ErrorCode::NotStandardized,
                "estimate_support_size requires a standardized design");
  }
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be > 0");
  if (x.n() < 2) throw Error(ErrorCode::InvalidArgument, "estimate_support_size needs n >= 2");

  SupportSizeEstimate est;
  est.cutoff = sigma * std::sqrt(2.0 * std::log(static_cast<double>(x.n())));
  est.order = rank_order(marginal_coefficients(x, y));

  const Index k_max = std::min(x.p() - 1, x.n() - 1);
  if (k_max >= 1) {
    const std::span<const Index> prefix(est.order.data(), k_max + 1);
    est.delta = project_residual_norms(x, prefix, y);
  }
  Index last = 0;
  for (Index k = 1; k <= est.delta.size(); ++k) {
    if (est.delta[k - 1] >= est.cutoff) last = k;
  }
  est.s_hat = last + 1;  // also covers the "no k qualifies" case
  std::vector<Index> top(est.order.begin(), est.order.begin() + static_cast<long>(est.s_hat));
  est.support = SupportSet::from_indices(std::move(top), x.p());
  return est;
}

DeltaStar delta_star(const DesignMatrix& x, const Vector& beta) {
  if (static_cast<Index>(beta.size()) != x.p()) {
    throw Error(ErrorCode::DimensionMismatch, "beta length differs from design p");
  }
  const SupportSet s = SupportSet::of(beta);
  if (s.empty()) throw Error(ErrorCode::EmptySupport, "delta_star needs a nonzero beta");

  DeltaStar out;
  out.per_index.reserve(s.size());
  if (s.size() > x.n()) {
    out.degenerate = true;
    out.per_index.assign(s.size(), 0.0);
    return out;
  }

  const auto& idx = s.indices();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    std::vector<Index> others;
    others.reserve(idx.size() - 1);
    for (std::size_t m = 0; m < idx.size(); ++m) {
      if (m != k) others.push_back(idx[m]);
    }
    const Matrix q = orthonormal_basis(x.values(), others);
    Vector v = x.column(idx[k]);
    const double original = v.norm();
    for (int pass = 0; pass < 2 && q.cols() > 0; ++pass) {
      const Vector c = q.transpose() * v;
      v.noalias() -= q * c;
    }
    double residual = v.norm();
    if (static_cast<Index>(q.cols()) < others.size() || !(original > 0.0) ||
        residual < kRankTolerance * original) {
      out.degenerate = true;
      residual = 0.0;
    }
    out.per_index.push_back(std::abs(beta(static_cast<EIdx>(idx[k]))) * residual);
  }
  out.value = out.degenerate ? 0.0
                             : *std::min_element(out.per_index.begin(), out.per_index.end());
  return out;
}

std::vector<SupportSet> mr_path(const DesignMatrix& x, const Vector& y, Index k_max) {
  if (k_max < 1 || k_max > x.p()) {
    throw Error(ErrorCode::KOutOfRange,
                "k_max = " + std::to_string(k_max) + " outside [1, " + std::to_string(x.p()) +
                    "]");
  }
  const std::vector<Index> order = rank_order(marginal_coefficients(x, y));
  std::vector<SupportSet> path;
  path.reserve(k_max);
  for (Index k = 1; k <= k_max; ++k) {
    path.push_back(SupportSet::from_indices({order.begin(), order.begin() + static_cast<long>(k)},
                                            x.p()));
  }
  return path;
}

}  // namespace margreg
