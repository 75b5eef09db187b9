#include "margreg/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "margreg/errors.hpp"

namespace margreg {

namespace {

using EIdx = Eigen::Index;

std::string fmt(const char* pattern, double a) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

std::string fmt(const char* pattern, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

Vector sign_of(const Vector& v) { return v.unaryExpr([](double e) { return sgn(e); }); }

void require_length(const Vector& v, Index s, const char* what) {
  if (static_cast<Index>(v.size()) != s) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + ": expected length " + std::to_string(s) +
                    ", got " + std::to_string(v.size()));
  }
}

double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }
double min_abs(const Vector& v) {
  return v.size() == 0 ? std::numeric_limits<double>::infinity() : v.cwiseAbs().minCoeff();
}

// Non-strict "lhs <= rhs" style conditions are satisfied on ties.
ConditionRecord non_strict(std::string name, double lhs, double rhs, std::string detail) {
  return {std::move(name), lhs <= rhs, lhs, rhs, rhs - lhs, std::move(detail)};
}

ConditionRecord strict(std::string name, double lhs, double rhs, std::string detail) {
  return {std::move(name), lhs < rhs, lhs, rhs, rhs - lhs, std::move(detail)};
}

}  // namespace

void ConditionParams::validate() const {
  if (!(eta > 0.0 && eta < 1.0)) throw Error(ErrorCode::InvalidArgument, "eta must lie in (0,1)");
  if (!(lambda0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda0 must be > 0");
  if (!(rho_min > 0.0)) throw Error(ErrorCode::InvalidArgument, "rho_min must be > 0");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be >= 0");
  if (!(sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be >= 0");
}

const ConditionRecord* ConditionReport::find(const std::string& name) const {
  for (const auto& r : records) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

std::pair<ConditionRecord, ConditionRecord> check_E(const GramPartition& gp,
                                                    const ConditionParams& params) {
  const double lmin = min_eigenvalue(gp.c_ss);
  ConditionRecord e;
  e.name = "E";
  e.lhs = lmin;
  e.rhs = 1e-12;
  e.margin = lmin - 1e-12;
  e.satisfied = lmin > 1e-12;
  e.detail = "lambda_min(C_SS) > 0";

  ConditionRecord ep;
  ep.name = "E'";
  ep.lhs = lmin;
  ep.rhs = params.lambda0;
  ep.margin = lmin - params.lambda0;
  ep.satisfied = lmin >= params.lambda0;
  ep.detail = fmt("lambda_min(C_SS) >= lambda0 = %.6g", params.lambda0);
  return {e, ep};
}

Matrix irrepresentable_matrix(const GramPartition& gp) {
  return solve_spd(gp.c_ss, Matrix(gp.c_ns.transpose())).transpose();
}

ConditionRecord check_I(const GramPartition& gp, const Vector& sign_pattern) {
  require_length(sign_pattern, static_cast<Index>(gp.c_ss.rows()), "check_I sign pattern");
  const Vector w = gp.c_ns * solve_spd(gp.c_ss, sign_pattern);
  return non_strict("I", max_abs(w), 1.0, "max |C_NS C_SS^-1 sgn(beta_S)| <= 1");
}

double irrepresentable_sign_maximum(const GramPartition& gp) {
  const EIdx s = gp.c_ss.rows();
  if (s > 25) {
    throw Error(ErrorCode::InvalidArgument, "exhaustive sign search limited to s <= 25");
  }
  const Matrix m = irrepresentable_matrix(gp);
  std::vector<double> sign(static_cast<std::size_t>(s));
  double best = 0.0;
  const unsigned long patterns = 1UL << s;
  for (unsigned long mask = 0; mask < patterns; ++mask) {
    for (EIdx j = 0; j < s; ++j) sign[j] = ((mask >> j) & 1UL) ? -1.0 : 1.0;
    for (EIdx i = 0; i < m.rows(); ++i) {
      double acc = 0.0;
      for (EIdx j = 0; j < s; ++j) acc += m(i, j) * sign[j];
      best = std::max(best, std::abs(acc));
    }
  }
  return best;
}

std::pair<ConditionRecord, ConditionRecord> check_I_uniform(const GramPartition& gp,
                                                            double eta, bool cross_check) {
  if (!(eta > 0.0 && eta < 1.0)) throw Error(ErrorCode::InvalidArgument, "eta must lie in (0,1)");
  const double norm = inf_operator_norm(irrepresentable_matrix(gp));

  std::string detail = "||C_NS C_SS^-1||_inf <= 1";
  if (cross_check && gp.c_ss.rows() <= 12) {
    detail += fmt("; exhaustive sign maximum = %.17g", irrepresentable_sign_maximum(gp));
  }
  auto i_all = non_strict("I", norm, 1.0, detail);
  auto i_prime = non_strict("I'", norm, 1.0 - eta, fmt("||C_NS C_SS^-1||_inf <= 1 - eta = %.6g", 1.0 - eta));
  return {i_all, i_prime};
}

std::pair<ConditionRecord, ConditionRecord> check_J(const GramPartition& gp,
                                                    const Vector& beta_s,
                                                    const ConditionParams& params) {
  const Index s = static_cast<Index>(gp.c_ss.rows());
  require_length(beta_s, s, "check_J beta_S");
  const Vector shrink = solve_spd(gp.c_ss, sign_of(beta_s));
  const double gap = min_abs(beta_s - params.lambda * shrink);
  ConditionRecord j;
  j.name = "J";
  j.lhs = gap;
  j.rhs = 0.0;
  j.margin = gap;
  j.satisfied = gap > 0.0;
  j.detail = fmt("min |beta_S - lambda C_SS^-1 sgn(beta_S)| > 0 at lambda = %.6g", params.lambda);

  const Matrix inv = solve_spd(gp.c_ss, Matrix(Matrix::Identity(gp.c_ss.rows(), gp.c_ss.cols())));
  const double lhs = params.lambda * inf_operator_norm(inv);
  auto jp = strict("J'", lhs, params.rho_min,
                   fmt("lambda ||C_SS^-1||_inf < rho = %.6g (lambda = %.6g)", params.rho_min,
                       params.lambda));
  return {j, jp};
}

ConditionRecord check_F(const GramPartition& gp, const Vector& beta_s) {
  require_length(beta_s, static_cast<Index>(gp.c_ss.rows()), "check_F beta_S");
  const double lhs = max_abs(gp.c_ns * beta_s);
  const double rhs = min_abs(gp.c_ss * beta_s);
  return strict("F", lhs, rhs, "max |C_NS beta_S| < min |C_SS beta_S|");
}

ConditionRecord check_F_noisy(const GramPartition& gp, const Vector& beta_s, double sigma,
                              Index p) {
  if (p < 2) throw Error(ErrorCode::InvalidArgument, "check_F_noisy needs p >= 2");
  if (!(sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be >= 0");
  require_length(beta_s, static_cast<Index>(gp.c_ss.rows()), "check_F_noisy beta_S");
  const double penalty = 2.0 * sigma * std::sqrt(2.0 * std::log(static_cast<double>(p)));
  const double lhs = max_abs(gp.c_ns * beta_s) + penalty;
  const double rhs = min_abs(gp.c_ss * beta_s);
  return strict("F'", lhs, rhs,
                fmt("max |C_NS beta_S| + 2 sigma sqrt(2 log p) < min |C_SS beta_S| "
                    "(noise term %.6g, sigma = %.6g)",
                    penalty, sigma));
}

double incoherence(const Matrix& c) {
  if (c.rows() != c.cols() || c.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "incoherence needs a square matrix");
  }
  double best = 0.0;
  for (EIdx i = 0; i < c.rows(); ++i) {
    if (std::abs(c(i, i) - 1.0) > 1e-8) {
      throw Error(ErrorCode::NotUnitDiagonal,
                  "Gram diagonal entry " + std::to_string(i) + " differs from 1");
    }
    for (EIdx j = 0; j < c.cols(); ++j) {
      if (i != j) best = std::max(best, std::abs(c(i, j)));
    }
  }
  return best;
}

IncoherenceBounds incoherence_bounds(double mu, double c_mr) {
  if (!(mu >= 0.0)) throw Error(ErrorCode::InvalidArgument, "incoherence must be >= 0");
  if (!(c_mr > 0.0 && c_mr < 1.0)) throw Error(ErrorCode::InvalidArgument, "c must lie in (0,1)");
  if (mu == 0.0) return {};
  // Largest integer strictly below x.
  auto below = [](double x) { return static_cast<long>(std::ceil(x)) - 1; };
  return {below((1.0 + mu) / (2.0 * mu)), below(c_mr / (2.0 * mu))};
}

Vector construct_unfaithful_beta(const Matrix& c, double rho) {
  if (!(rho > 0.0)) throw Error(ErrorCode::InvalidArgument, "rho must be > 0");
  const double lmin = min_eigenvalue(c);
  if (!(lmin > 1e-10)) throw NearSingularError(lmin);

  const EIdx s = c.rows();
  EIdx chosen = -1;
  EIdx chosen_k = 0;
  bool any_off_diagonal = false;
  for (EIdx i = 0; i < s; ++i) {
    EIdx k = 0;
    bool dominated = true;
    for (EIdx j = 0; j < s; ++j) {
      if (j == i) continue;
      if (c(i, j) != 0.0) ++k;
      if (!(std::abs(c(i, j)) < c(i, i))) dominated = false;
    }
    if (k > 0) any_off_diagonal = true;
    if (k > 0 && dominated && k > chosen_k) {
      chosen = i;
      chosen_k = k;
    }
  }
  if (!any_off_diagonal) {
    throw Error(ErrorCode::DiagonalMatrix, "matrix is diagonal; no unfaithful beta exists");
  }
  if (chosen < 0) {
    throw Error(ErrorCode::NoValidRow,
                "no row with nonzero off-diagonals is strictly dominated by its diagonal");
  }

  Vector beta(s);
  const double cii = c(chosen, chosen);
  for (EIdx j = 0; j < s; ++j) {
    if (j == chosen) {
      beta(j) = -static_cast<double>(chosen_k) * rho;
    } else if (c(chosen, j) != 0.0) {
      beta(j) = rho * cii / c(chosen, j);
    } else {
      beta(j) = rho;
    }
  }
  return beta;
}

ConditionReport check_all(const DesignMatrix& x, const SupportSet& s, const Vector& beta_s,
                          const ConditionParams& params) {
  params.validate();
  const GramPartition gp = gram_partition(x, s);
  require_length(beta_s, s.size(), "beta_S");

  ConditionReport report;
  auto [e, ep] = check_E(gp, params);
  const double lmin = e.lhs;
  report.add(e);
  report.add(ep);

  if (e.satisfied) {
    try {
      report.add(check_I(gp, sign_of(beta_s)));
      auto [i_all, i_prime] = check_I_uniform(gp, params.eta, true);
      i_all.name = "I_uniform";
      report.add(i_all);
      report.add(i_prime);
      auto [j, jp] = check_J(gp, beta_s, params);
      report.add(j);
      report.add(jp);
    } catch (const NearSingularError& err) {
      for (const char* name : {"I", "I_uniform", "I'", "J", "J'"}) {
        if (report.find(name) == nullptr) {
          report.add({name, false, std::numeric_limits<double>::quiet_NaN(),
                      std::numeric_limits<double>::quiet_NaN(),
                      std::numeric_limits<double>::quiet_NaN(), err.what()});
        }
      }
    }
  } else {
    const std::string why = fmt("NearSingular: requires Condition E (lambda_min = %.6g)", lmin);
    for (const char* name : {"I", "I_uniform", "I'", "J", "J'"}) {
      report.add({name, false, std::numeric_limits<double>::quiet_NaN(),
                  std::numeric_limits<double>::quiet_NaN(),
                  std::numeric_limits<double>::quiet_NaN(), why});
    }
  }

  report.add(check_F(gp, beta_s));
  report.add(check_F_noisy(gp, beta_s, params.sigma, x.p()));

  const Matrix gram = x.values().transpose() * x.values();
  const double mu = incoherence(0.5 * (gram + gram.transpose()));
  const auto bounds = incoherence_bounds(mu);
  ConditionRecord inc;
  inc.name = "incoherence";
  inc.lhs = static_cast<double>(s.size());
  if (bounds.s_max_lasso) {
    inc.rhs = static_cast<double>(*bounds.s_max_lasso) + 1.0;
    inc.detail = fmt("mu = %.6g; s < (1 + mu)/(2 mu) guarantees lasso recovery (s_max = %.0f)",
                     mu, static_cast<double>(*bounds.s_max_lasso));
    if (bounds.s_max_mr) {
      inc.detail += fmt("; marginal regression bound with c = 0.5 gives s_max = %.0f",
                        static_cast<double>(*bounds.s_max_mr));
    }
  } else {
    inc.rhs = std::numeric_limits<double>::infinity();
    inc.detail = "mu = 0; no restriction on s";
  }
  inc.margin = inc.rhs - inc.lhs;
  inc.satisfied = inc.margin > 0.0;
  report.add(inc);
  return report;
}

}  // namespace margreg
