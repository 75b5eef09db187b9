#pragma once

// Lasso for ||Y - X b||^2 + lambda ||b||_1 (no 1/2, no 1/n) by cyclic
// coordinate descent with active-set sweeps, plus a warm-started path and
// sign/support scoring.

#include <optional>
#include <string>
#include <vector>

#include "margreg/linalg.hpp"

namespace margreg {

inline constexpr double kKktTolerance = 1e-6;

struct LassoOptions {
  double tol = 1e-8;        // max coordinate change that ends a sweep cycle
  long max_iter = 100000;   // sweeps, full and active-set combined
  double kkt_tol = kKktTolerance;
};

struct LassoFit {
  Vector beta_hat;
  double lambda = 0.0;
  long iterations = 0;
  bool converged = false;
  double kkt_violation = 0.0;

  Index support_size() const;
  /// Sparse representation: index/value pairs of the nonzeros.
  std::string to_json(int indent = 2) const;
};

/// Throws InvalidArgument on lambda < 0 or tol <= 0. Non-convergence is
/// reported through the `converged` flag, never thrown.
LassoFit lasso_solve(const DesignMatrix& x, const Vector& y, double lambda,
                     const LassoOptions& options = {},
                     const std::optional<Vector>& warm_start = std::nullopt);

/// Fits along a strictly decreasing lambda grid, each fit warm-started from
/// the previous one.
std::vector<LassoFit> lasso_path(const DesignMatrix& x, const Vector& y,
                                 const std::vector<double>& lambdas,
                                 const LassoOptions& options = {});

/// Smallest lambda whose solution is identically zero: 2 max |X^T Y|.
double null_lambda(const DesignMatrix& x, const Vector& y);

/// Max KKT slack of beta for the objective above.
double kkt_violation(const DesignMatrix& x, const Vector& y, const Vector& beta,
                     double lambda);

/// ||Y - X b||^2 + lambda ||b||_1.
double lasso_objective(const DesignMatrix& x, const Vector& y, const Vector& beta,
                       double lambda);

struct SignConsistency {
  bool sign_recovered = false;     // sgn(beta_hat) == sgn(beta)
  bool support_recovered = false;  // zero patterns agree
  Index hamming = 0;               // # j with sgn(beta_hat_j) != sgn(beta_j)
};

SignConsistency sign_consistency(const Vector& beta_hat, const Vector& beta_true);
inline SignConsistency sign_consistency(const LassoFit& fit, const Vector& beta_true) {
  return sign_consistency(fit.beta_hat, beta_true);
}

}  // namespace margreg
