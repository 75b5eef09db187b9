#include "margreg/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "margreg/errors.hpp"
#include "margreg/io.hpp"
#include "margreg/marginal.hpp"
#include "margreg/phase.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace margreg {

namespace {

using EIdx = Eigen::Index;

Matrix equicorrelated_design(Index n, Index p, double rho, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double a = std::sqrt(1.0 - rho);
  const double b = std::sqrt(rho);
  Matrix x(static_cast<EIdx>(n), static_cast<EIdx>(p));
  for (EIdx i = 0; i < x.rows(); ++i) {
    const double w = normal(rng);
    for (EIdx j = 0; j < x.cols(); ++j) x(i, j) = a * normal(rng) + b * w;
  }
  return x;
}

// Least squares on the listed columns; minimum-norm when rank deficient.
Vector refit_on(const Matrix& x, const Vector& y, const std::vector<Index>& cols) {
  Vector beta = Vector::Zero(x.cols());
  if (cols.empty()) return beta;
  const Matrix xs = gather_columns(x, cols);
  const Vector coef = xs.completeOrthogonalDecomposition().solve(y);
  for (std::size_t k = 0; k < cols.size(); ++k) beta(static_cast<EIdx>(cols[k])) = coef(static_cast<EIdx>(k));
  return beta;
}

std::vector<Index> nonzeros(const Vector& v) {
  std::vector<Index> out;
  for (EIdx j = 0; j < v.size(); ++j) {
    if (v(j) != 0.0) out.push_back(static_cast<Index>(j));
  }
  return out;
}

struct RepRecord {
  // Indexed by position in the k grid.
  std::vector<double> mr_pred, mr_ham, lasso_pred, lasso_ham, lasso_size;
  Index lasso_fits = 0;
  Index lasso_not_converged = 0;
};

RepRecord run_rep(const ExperimentConfig& c, const std::vector<Index>& grid, Index rep,
                  const LassoOptions& lasso) {
  auto x_rng = detail::stream_engine(c.seed, rep, 10);
  auto beta_rng = detail::stream_engine(c.seed, rep, 11);
  auto z_rng = detail::stream_engine(c.seed, rep, 12);
  auto holdout_rng = detail::stream_engine(c.seed, rep, 13);

  const Matrix xv = equicorrelated_design(c.n, c.p, c.equi_rho, x_rng);
  std::vector<Index> perm(c.p);
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), beta_rng);
  Vector beta = Vector::Zero(static_cast<EIdx>(c.p));
  for (Index k = 0; k < c.s; ++k) beta(static_cast<EIdx>(perm[k])) = c.signal_value;

  std::normal_distribution<double> normal(0.0, 1.0);
  Vector y = xv * beta;
  for (EIdx i = 0; i < y.size(); ++i) y(i) += c.sigma * normal(z_rng);

  const Matrix eval_x =
      c.holdout ? equicorrelated_design(c.n, c.p, c.equi_rho, holdout_rng) : xv;
  auto pred_error = [&](const Vector& beta_hat) {
    return (eval_x * (beta_hat - beta)).squaredNorm() / static_cast<double>(c.n);
  };

  RepRecord rec;
  const DesignMatrix x(xv);

  // Marginal path.
  const Vector alpha = xv.transpose() * y;
  const Vector col_norm = xv.colwise().norm().transpose();
  Vector standardized_alpha(alpha.size());
  Vector coef(alpha.size());
  for (EIdx j = 0; j < alpha.size(); ++j) {
    const double nrm = col_norm(j);
    standardized_alpha(j) = nrm > 0.0 ? alpha(j) / nrm : 0.0;
    coef(j) = nrm > 0.0 ? alpha(j) / (nrm * nrm) : 0.0;
  }
  const std::vector<Index> order = rank_order(standardized_alpha);
  for (Index k : grid) {
    std::vector<Index> top(order.begin(), order.begin() + static_cast<long>(k));
    std::sort(top.begin(), top.end());
    Vector bh = Vector::Zero(alpha.size());
    if (c.refit) {
      bh = refit_on(xv, y, top);
    } else {
      for (Index j : top) bh(static_cast<EIdx>(j)) = coef(static_cast<EIdx>(j));
    }
    rec.mr_pred.push_back(pred_error(bh));
    rec.mr_ham.push_back(static_cast<double>(hamming(bh, beta)));
  }

  // Lasso path on a log-spaced grid, matched to k by nearest support size.
  const double lmax = null_lambda(x, y);
  std::vector<double> lambdas(c.lambda_points);
  const double lo = std::log(c.lambda_ratio);
  for (Index m = 0; m < c.lambda_points; ++m) {
    const double frac = c.lambda_points > 1
                            ? static_cast<double>(m) / static_cast<double>(c.lambda_points - 1)
                            : 0.0;
    lambdas[m] = lmax * std::exp(lo * frac);
  }
  const std::vector<LassoFit> path = lasso_path(x, y, lambdas, lasso);
  std::vector<Index> sizes;
  for (const LassoFit& f : path) {
    sizes.push_back(f.support_size());
    ++rec.lasso_fits;
    rec.lasso_not_converged += !f.converged;
  }
  for (Index k : grid) {
    std::size_t best = 0;
    for (std::size_t m = 1; m < sizes.size(); ++m) {
      const auto gap = [&](std::size_t i) {
        return sizes[i] > k ? sizes[i] - k : k - sizes[i];
      };
      if (gap(m) < gap(best)) best = m;
    }
    Vector bh = path[best].beta_hat;
    if (c.refit) bh = refit_on(xv, y, nonzeros(bh));
    rec.lasso_pred.push_back(pred_error(bh));
    rec.lasso_ham.push_back(static_cast<double>(hamming(bh, beta)));
    rec.lasso_size.push_back(static_cast<double>(sizes[best]));
  }
  return rec;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "n must be >= 2");
  if (p < 1) throw Error(ErrorCode::InvalidArgument, "p must be >= 1");
  if (s > p) throw Error(ErrorCode::InvalidArgument, "s must be <= p");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::InvalidArgument, "sigma must be >= 0");
  }
  if (!std::isfinite(signal_value)) throw Error(ErrorCode::InvalidArgument, "signal must be finite");
  if (!(equi_rho >= 0.0 && equi_rho < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "equi_rho must lie in [0, 1)");
  }
  if (reps < 1) throw Error(ErrorCode::InvalidArgument, "reps must be >= 1");
  if (lambda_points < 1) throw Error(ErrorCode::InvalidArgument, "lambda_points must be >= 1");
  if (!(lambda_ratio > 0.0 && lambda_ratio < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "lambda_ratio must lie in (0, 1)");
  }
  for (Index k : k_grid) {
    if (k < 1 || k > p) {
      throw Error(ErrorCode::KOutOfRange,
                  "k = " + std::to_string(k) + " outside [1, " + std::to_string(p) + "]");
    }
  }
}

std::vector<Index> ExperimentConfig::effective_k_grid() const {
  if (!k_grid.empty()) return k_grid;
  std::vector<Index> g(std::min(n, p));
  std::iota(g.begin(), g.end(), Index{1});
  return g;
}

std::vector<ExperimentConfig> default_experiment_configs() {
  std::vector<ExperimentConfig> out;
  for (double signal : {0.5, 5.0}) {
    for (double rho : {0.0, 0.2, 0.5, 0.9}) {
      ExperimentConfig c;
      c.signal_value = signal;
      c.equi_rho = rho;
      out.push_back(c);
    }
  }
  return out;
}

std::vector<ExperimentConfig> experiment_configs_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("experiment config: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::Config, "experiment config must be an object");
  auto list = [&](const char* key, std::vector<double> fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j[key];
    return v.is_array() ? v.get<std::vector<double>>() : std::vector<double>{v.get<double>()};
  };
  auto count = [&](const char* key, Index fallback) -> Index {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer() || j[key].get<long long>() < 0) {
      throw Error(ErrorCode::Config, std::string("'") + key + "' must be a non-negative integer");
    }
    return j[key].get<Index>();
  };

  std::vector<ExperimentConfig> out;
  try {
    ExperimentConfig base;
    base.n = count("n", base.n);
    base.p = count("p", base.p);
    base.s = count("s", base.s);
    base.reps = count("reps", base.reps);
    base.seed = count("seed", base.seed);
    base.lambda_points = count("lambda_points", base.lambda_points);
    base.sigma = j.value("sigma", base.sigma);
    base.lambda_ratio = j.value("lambda_ratio", base.lambda_ratio);
    base.refit = j.value("refit", base.refit);
    base.holdout = j.value("holdout", base.holdout);
    if (j.contains("k_grid")) base.k_grid = j["k_grid"].get<std::vector<Index>>();
    for (double signal : list("signal", {0.5, 5.0})) {
      for (double rho : list("equi_rho", {0.0, 0.2, 0.5, 0.9})) {
        ExperimentConfig c = base;
        c.signal_value = signal;
        c.equi_rho = rho;
        c.validate();
        out.push_back(c);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("experiment config: ") + e.what());
  }
  if (out.empty()) throw Error(ErrorCode::Config, "experiment config expands to no runs");
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads,
                                const LassoOptions& lasso) {
  config.validate();
  const std::vector<Index> grid = config.effective_k_grid();
  std::vector<RepRecord> recs(config.reps);
  detail::parallel_for(config.reps, threads,
                       [&](std::size_t rep) { recs[rep] = run_rep(config, grid, rep, lasso); });

  ExperimentResult res;
  res.config = config;
  const double reps = static_cast<double>(config.reps);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    PathPointSummary mr{grid[g], "mr", 0.0, 0.0, static_cast<double>(grid[g])};
    PathPointSummary la{grid[g], "lasso", 0.0, 0.0, 0.0};
    for (const RepRecord& r : recs) {
      mr.mean_prediction_error += r.mr_pred[g];
      mr.mean_hamming += r.mr_ham[g];
      la.mean_prediction_error += r.lasso_pred[g];
      la.mean_hamming += r.lasso_ham[g];
      la.mean_support_size += r.lasso_size[g];
    }
    mr.mean_prediction_error /= reps;
    mr.mean_hamming /= reps;
    la.mean_prediction_error /= reps;
    la.mean_hamming /= reps;
    la.mean_support_size /= reps;
    res.rows.push_back(mr);
    res.rows.push_back(la);
  }
  for (const RepRecord& r : recs) {
    res.lasso_fits += r.lasso_fits;
    res.lasso_not_converged += r.lasso_not_converged;
  }
  return res;
}

std::string experiment_csv(const std::vector<ExperimentResult>& results) {
  std::ostringstream out;
  out << "signal,equi_rho,k,method,mean_prediction_error,mean_hamming,mean_support_size,"
         "prediction_metric,refit,not_converged\n";
  for (const ExperimentResult& res : results) {
    const ExperimentConfig& c = res.config;
    for (const PathPointSummary& row : res.rows) {
      out << format_double(c.signal_value) << ',' << format_double(c.equi_rho) << ',' << row.k
          << ',' << row.method << ',' << format_double(row.mean_prediction_error) << ','
          << format_double(row.mean_hamming) << ',' << format_double(row.mean_support_size)
          << ',' << (c.holdout ? "holdout" : "in_sample") << ',' << (c.refit ? "true" : "false")
          << ',' << (row.method == "lasso" ? res.lasso_not_converged : 0) << '\n';
    }
  }
  return out.str();
}

}  // namespace margreg
