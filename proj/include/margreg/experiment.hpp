#pragma once

// Benchmark comparing marginal regression and the lasso along their paths on
// an equicorrelated Gaussian design: rows ~ N(0, (1 - rho) I + rho 11^T).

#include <cstdint>
#include <string>
#include <vector>

#include "margreg/lasso.hpp"
#include "margreg/linalg.hpp"

namespace margreg {

struct ExperimentConfig {
  Index n = 40;
  Index p = 500;
  Index s = 100;
  double sigma = 10.0;
  double signal_value = 5.0;
  double equi_rho = 0.0;
  Index reps = 100;
  std::uint64_t seed = 1;
  std::vector<Index> k_grid;  // empty: 1 .. n
  bool refit = false;         // least-squares refit on each selected set
  bool holdout = false;       // prediction error on a fresh design draw
  Index lambda_points = 100;
  double lambda_ratio = 1e-3;

  void validate() const;
  std::vector<Index> effective_k_grid() const;
};

/// Expands {"n","p","s","sigma","signal": x | [..], "equi_rho": x | [..],
/// "reps","seed","k_grid","refit","holdout"} into one config per
/// (signal, equi_rho) pair. Missing keys take the defaults above, except
/// that signal defaults to [0.5, 5] and equi_rho to [0, 0.2, 0.5, 0.9].
std::vector<ExperimentConfig> experiment_configs_from_json(const std::string& text);

/// The default grid: signal in {0.5, 5} x equi_rho in {0, 0.2, 0.5, 0.9}.
std::vector<ExperimentConfig> default_experiment_configs();

struct PathPointSummary {
  Index k = 0;
  std::string method;
  double mean_prediction_error = 0.0;
  double mean_hamming = 0.0;
  double mean_support_size = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<PathPointSummary> rows;  // for each k: mr, then lasso
  Index lasso_fits = 0;
  Index lasso_not_converged = 0;
};

/// One rep draws X, beta (s random coordinates equal to signal_value) and
/// noise; MR ranks columns by |x_j^T Y| / ||x_j|| and uses x_j^T Y / ||x_j||^2
/// as the coefficient; the lasso path is matched to each k by nearest
/// support size.
ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads = 0,
                                const LassoOptions& lasso = {});

/// Header plus one row per (config, k, method).
std::string experiment_csv(const std::vector<ExperimentResult>& results);

}  // namespace margreg
