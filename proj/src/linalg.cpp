#include "margreg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "margreg/errors.hpp"

namespace margreg {

namespace {

using EIdx = Eigen::Index;

EIdx eidx(Index i) { return static_cast<EIdx>(i); }

bool columns_have_unit_norm(const Matrix& m) {
  for (EIdx j = 0; j < m.cols(); ++j) {
    if (std::abs(m.col(j).squaredNorm() - 1.0) > kUnitNormTolerance) return false;
  }
  return true;
}

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + ": expected a nonempty square matrix, got " +
                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

Matrix checked_symmetric(const Matrix& m, const char* what) {
  require_square(m, what);
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= kSymmetryTolerance * scale)) {
    throw Error(ErrorCode::NotSymmetric,
                std::string(what) + ": matrix is not symmetric (max |m - m^T| = " +
                    std::to_string(asym) + ")");
  }
  return 0.5 * (m + m.transpose());
}

double min_eigenvalue_of_symmetric(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

}  // namespace

DesignMatrix::DesignMatrix(Matrix values, bool standardized)
    : values_(std::move(values)), standardized_(standardized) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw Error(ErrorCode::InvalidArgument, "design must have n >= 1 and p >= 1");
  }
  if (!values_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "design contains non-finite entries");
  }
  if (standardized_ && !columns_have_unit_norm(values_)) {
    throw Error(ErrorCode::NotStandardized,
                "design flagged standardized but a column norm differs from 1");
  }
}

DesignMatrix DesignMatrix::detect(Matrix values) {
  const bool unit = values.size() > 0 && columns_have_unit_norm(values);
  return DesignMatrix(std::move(values), unit);
}

SupportSet SupportSet::from_indices(std::vector<Index> indices, Index p) {
  std::sort(indices.begin(), indices.end());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= p) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "support index " + std::to_string(indices[i]) + " >= p = " +
                      std::to_string(p));
    }
    if (i > 0 && indices[i] == indices[i - 1]) {
      throw Error(ErrorCode::InvalidArgument,
                  "duplicate support index " + std::to_string(indices[i]));
    }
  }
  SupportSet s;
  s.indices_ = std::move(indices);
  s.p_ = p;
  return s;
}

SupportSet SupportSet::of(const Vector& beta) {
  std::vector<Index> idx;
  for (EIdx j = 0; j < beta.size(); ++j) {
    if (beta(j) != 0.0) idx.push_back(static_cast<Index>(j));
  }
  return from_indices(std::move(idx), static_cast<Index>(beta.size()));
}

bool SupportSet::contains(Index j) const {
  return std::binary_search(indices_.begin(), indices_.end(), j);
}

std::vector<Index> SupportSet::complement() const {
  std::vector<Index> out;
  out.reserve(p_ - indices_.size());
  auto it = indices_.begin();
  for (Index j = 0; j < p_; ++j) {
    if (it != indices_.end() && *it == j) {
      ++it;
    } else {
      out.push_back(j);
    }
  }
  return out;
}

Matrix gather_columns(const Matrix& x, std::span<const Index> cols) {
  Matrix out(x.rows(), eidx(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    out.col(eidx(k)) = x.col(eidx(cols[k]));
  }
  return out;
}

DesignMatrix standardize_columns(const DesignMatrix& x) {
  Matrix v = x.values();
  for (EIdx j = 0; j < v.cols(); ++j) {
    const double norm = v.col(j).norm();
    if (!(norm >= 1e-300)) {
      throw Error(ErrorCode::ZeroColumn,
                  "column " + std::to_string(j) + " has zero norm");
    }
    v.col(j) /= norm;
  }
  return DesignMatrix(std::move(v), true);
}

GramPartition gram_partition(const DesignMatrix& x, const SupportSet& s) {
  if (!x.standardized()) {
    throw Error(ErrorCode::NotStandardized,
                "gram_partition requires a standardized design");
  }
  if (s.universe() != x.p()) {
    throw Error(ErrorCode::DimensionMismatch,
                "support set built for p = " + std::to_string(s.universe()) +
                    " but design has p = " + std::to_string(x.p()));
  }
  if (s.empty()) throw Error(ErrorCode::EmptySupport, "support set is empty");
  if (s.size() == x.p()) {
    throw Error(ErrorCode::FullSupport, "support covers every column; no noise block");
  }

  const Matrix xs = gather_columns(x.values(), s.indices());
  const std::vector<Index> noise = s.complement();
  const Matrix xn = gather_columns(x.values(), noise);

  GramPartition gp;
  Matrix css = xs.transpose() * xs;
  gp.c_ss = 0.5 * (css + css.transpose());
  gp.c_ns = xn.transpose() * xs;
  gp.support = s;
  gp.full_diag = x.values().colwise().squaredNorm().transpose();
  return gp;
}

double min_eigenvalue(const Matrix& m) {
  return min_eigenvalue_of_symmetric(checked_symmetric(m, "min_eigenvalue"));
}

double inf_operator_norm(const Matrix& m) {
  double best = 0.0;
  for (EIdx i = 0; i < m.rows(); ++i) {
    double row = 0.0;
    for (EIdx j = 0; j < m.cols(); ++j) row += std::abs(m(i, j));
    best = std::max(best, row);
  }
  return best;
}

Matrix solve_spd(const Matrix& m, const Matrix& b) {
  const Matrix sym = checked_symmetric(m, "solve_spd");
  if (b.rows() != sym.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "solve_spd: right-hand side has wrong length");
  }
  const double lambda_min = min_eigenvalue_of_symmetric(sym);
  if (!(lambda_min > 1e-12)) throw NearSingularError(lambda_min);

  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() != Eigen::Success) throw NearSingularError(lambda_min);
  Matrix v = llt.solve(b);
  // One step of iterative refinement tightens ill-conditioned solves.
  const Matrix residual = b - sym * v;
  v += llt.solve(residual);
  return v;
}

Vector solve_spd(const Matrix& m, const Vector& b) {
  return solve_spd(m, Matrix(b)).col(0);
}

std::vector<double> project_residual_norms(const DesignMatrix& x,
                                           std::span<const Index> order,
                                           const Vector& y) {
  const Index n = x.n();
  const Index p = x.p();
  if (order.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "project_residual_norms needs at least 2 columns");
  }
  if (static_cast<Index>(y.size()) != n) {
    throw Error(ErrorCode::DimensionMismatch, "response length differs from design rows");
  }
  std::vector<bool> seen(p, false);
  for (Index j : order) {
    if (j >= p) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "order index " + std::to_string(j) + " >= p = " + std::to_string(p));
    }
    if (seen[j]) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "order index " + std::to_string(j) + " repeated");
    }
    seen[j] = true;
  }

  const Index width = std::min<Index>(order.size(), n);
  Matrix q(eidx(n), eidx(width));
  EIdx rank = 0;
  std::vector<double> delta(order.size() - 1, 0.0);
  Vector v(eidx(n));

  for (std::size_t k = 0; k < order.size(); ++k) {
    if (static_cast<Index>(rank) == n) break;  // span is all of R^n

    v = x.column(order[k]);
    const double original = v.norm();
    if (rank > 0) {
      // Classical Gram-Schmidt, applied twice.
      for (int pass = 0; pass < 2; ++pass) {
        const Vector coeff = q.leftCols(rank).transpose() * v;
        v.noalias() -= q.leftCols(rank) * coeff;
      }
    }
    const double residual = v.norm();
    if (!(original > 0.0) || residual < kRankTolerance * original) continue;

    q.col(rank) = v / residual;
    if (k > 0) delta[k - 1] = std::abs(q.col(rank).dot(y));
    ++rank;
  }
  return delta;
}

}  // namespace margreg
