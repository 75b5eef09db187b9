#include "margreg/lasso.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "margreg/errors.hpp"

namespace margreg {

namespace {

using EIdx = Eigen::Index;

double soft_threshold(double z, double level) {
  if (z > level) return z - level;
  if (z < -level) return z + level;
  return 0.0;
}

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void require_response(const DesignMatrix& x, const Vector& y) {
  if (static_cast<Index>(y.size()) != x.n()) {
    throw Error(ErrorCode::DimensionMismatch,
                "response has length " + std::to_string(y.size()) + " but design has n = " +
                    std::to_string(x.n()));
  }
}

}  // namespace

Index LassoFit::support_size() const {
  Index k = 0;
  for (EIdx j = 0; j < beta_hat.size(); ++j) k += beta_hat(j) != 0.0;
  return k;
}

double null_lambda(const DesignMatrix& x, const Vector& y) {
  require_response(x, y);
  return 2.0 * (x.values().transpose() * y).cwiseAbs().maxCoeff();
}

double lasso_objective(const DesignMatrix& x, const Vector& y, const Vector& beta,
                       double lambda) {
  return (y - x.values() * beta).squaredNorm() + lambda * beta.lpNorm<1>();
}

double kkt_violation(const DesignMatrix& x, const Vector& y, const Vector& beta,
                     double lambda) {
  require_response(x, y);
  const Vector grad = -2.0 * (x.values().transpose() * (y - x.values() * beta));
  double worst = 0.0;
  for (EIdx j = 0; j < beta.size(); ++j) {
    const double slack = beta(j) != 0.0 ? std::abs(grad(j) + lambda * sgn(beta(j)))
                                        : std::max(0.0, std::abs(grad(j)) - lambda);
    worst = std::max(worst, slack);
  }
  return worst;
}

LassoFit lasso_solve(const DesignMatrix& x, const Vector& y, double lambda,
                     const LassoOptions& options, const std::optional<Vector>& warm_start) {
  require_response(x, y);
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be >= 0");
  if (!(options.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be > 0");
  if (options.max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 1");

  const Matrix& xv = x.values();
  const EIdx p = xv.cols();
  const Vector col_sq = xv.colwise().squaredNorm().transpose();
  const double level = 0.5 * lambda;

  LassoFit fit;
  fit.lambda = lambda;
  fit.beta_hat = Vector::Zero(p);
  if (warm_start) {
    if (warm_start->size() != p) {
      throw Error(ErrorCode::DimensionMismatch, "warm start has the wrong length");
    }
    fit.beta_hat = *warm_start;
  }
  Vector& beta = fit.beta_hat;
  Vector resid = y - xv * beta;

  auto update = [&](EIdx j) {
    if (col_sq(j) == 0.0) return 0.0;
    const double old = beta(j);
    const double z = xv.col(j).dot(resid) + col_sq(j) * old;
    const double fresh = soft_threshold(z, level) / col_sq(j);
    if (fresh == old) return 0.0;
    resid.noalias() -= (fresh - old) * xv.col(j);
    beta(j) = fresh;
    return std::abs(fresh - old);
  };

  // Active-set step. With support and signs fixed the stationary point
  // solves X_A^T X_A b = X_A^T y - level sgn(b_A); move toward it up to the
  // first sign change and drop the coordinate that reaches zero. Needed when
  // |A| is close to n, where coordinate descent alone crawls.
  auto polish = [&](std::vector<EIdx>& act) {
    act.erase(std::remove_if(act.begin(), act.end(), [&](EIdx j) { return beta(j) == 0.0; }),
              act.end());
    const EIdx k = static_cast<EIdx>(act.size());
    if (k == 0 || k > xv.rows()) return false;
    Matrix xa(xv.rows(), k);
    Vector current(k), signs(k);
    for (EIdx a = 0; a < k; ++a) {
      xa.col(a) = xv.col(act[static_cast<std::size_t>(a)]);
      current(a) = beta(act[static_cast<std::size_t>(a)]);
      signs(a) = sgn(current(a));
    }
    const Eigen::LDLT<Matrix> ldlt(xa.transpose() * xa);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
    const Vector target = ldlt.solve(xa.transpose() * y - level * signs);
    if (!target.allFinite()) return false;
    double step = 1.0;
    EIdx leaving = -1;
    for (EIdx a = 0; a < k; ++a) {
      if (sgn(target(a)) != signs(a)) {
        const double t = current(a) / (current(a) - target(a));
        if (t < step) {
          step = t;
          leaving = a;
        }
      }
    }
    Vector candidate = beta;
    for (EIdx a = 0; a < k; ++a) {
      double v = current(a) + step * (target(a) - current(a));
      if (a == leaving || sgn(v) != signs(a)) v = 0.0;
      candidate(act[static_cast<std::size_t>(a)]) = v;
    }
    if (!(lasso_objective(x, y, candidate, lambda) < lasso_objective(x, y, beta, lambda))) {
      return false;
    }
    beta = candidate;
    resid = y - xv * beta;
    return true;
  };

#ifndef NDEBUG
  double previous = lasso_objective(x, y, beta, lambda);
  auto check_descent = [&] {
    const double now = lasso_objective(x, y, beta, lambda);
    assert(now <= previous + 1e-9 * std::max(1.0, std::abs(previous)));
    previous = now;
  };
#else
  auto check_descent = [] {};
#endif

  // A small coordinate change can coexist with KKT slack above kkt_tol on
  // ill-conditioned problems; each failed check tightens the sweep tolerance.
  double tol = options.tol;
  std::vector<EIdx> active;
  while (fit.iterations < options.max_iter) {
    double change = 0.0;
    for (EIdx j = 0; j < p; ++j) change = std::max(change, update(j));
    ++fit.iterations;
    check_descent();

    if (change < tol) {
      resid = y - xv * beta;
      fit.kkt_violation = kkt_violation(x, y, beta, lambda);
      if (fit.kkt_violation <= options.kkt_tol) {
        fit.converged = true;
        break;
      }
      tol = std::max(0.1 * tol, 1e-300);
    }

    active.clear();
    for (EIdx j = 0; j < p; ++j) {
      if (beta(j) != 0.0) active.push_back(j);
    }
    for (long sweep = 1; fit.iterations < options.max_iter; ++sweep) {
      double inner = 0.0;
      for (EIdx j : active) inner = std::max(inner, update(j));
      ++fit.iterations;
      check_descent();
      if (inner < tol) break;
      if (sweep % 20 == 0 && polish(active)) check_descent();
    }
    if (polish(active)) check_descent();
  }
  if (!fit.converged) fit.kkt_violation = kkt_violation(x, y, beta, lambda);
  return fit;
}

std::vector<LassoFit> lasso_path(const DesignMatrix& x, const Vector& y,
                                 const std::vector<double>& lambdas,
                                 const LassoOptions& options) {
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambdas must be >= 0");
    if (i > 0 && !(lambdas[i] < lambdas[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "lambdas must be strictly decreasing");
    }
  }
  std::vector<LassoFit> fits;
  fits.reserve(lambdas.size());
  std::optional<Vector> warm;
  for (double lambda : lambdas) {
    fits.push_back(lasso_solve(x, y, lambda, options, warm));
    warm = fits.back().beta_hat;
  }
  return fits;
}

SignConsistency sign_consistency(const Vector& beta_hat, const Vector& beta_true) {
  if (beta_hat.size() != beta_true.size()) {
    throw Error(ErrorCode::DimensionMismatch, "sign_consistency: length mismatch");
  }
  SignConsistency out;
  bool support_equal = true;
  for (EIdx j = 0; j < beta_hat.size(); ++j) {
    if (sgn(beta_hat(j)) != sgn(beta_true(j))) ++out.hamming;
    if ((beta_hat(j) != 0.0) != (beta_true(j) != 0.0)) support_equal = false;
  }
  out.sign_recovered = out.hamming == 0;
  out.support_recovered = support_equal;
  return out;
}

}  // namespace margreg
