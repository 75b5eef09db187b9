#pragma once

// Hamming-distance phase diagram under the Gaussian design X_ij ~ N(0, 1/n):
// calibration from (vartheta, theta, r), region labels, and Monte Carlo
// Hamming estimates for thresholded marginal regression and the lasso.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "margreg/lasso.hpp"
#include "margreg/linalg.hpp"

namespace margreg {

enum class Region { ExactRecovery, AlmostFullRecovery, NoRecovery, Boundary };
enum class Method { MR, Lasso };

std::string_view to_string(Region r) noexcept;
std::string_view to_string(Method m) noexcept;
Method parse_method(std::string_view name);

inline constexpr double kBoundaryTolerance = 1e-9;

struct PhasePoint {
  double vartheta = 0.5;
  double theta = 0.75;
  double r = 1.0;
  Index n = 2;
  Index p = 2;

  /// p = round(n^{1/theta}).
  static PhasePoint from_n(double vartheta, double theta, double r, Index n);
  /// n = round(p^theta); p kept exactly.
  static PhasePoint from_p(double vartheta, double theta, double r, Index p);

  void validate() const;
};

struct Calibration {
  Index n = 0;
  Index p = 0;
  double epsilon_n = 0.0;  // p^{-vartheta}
  double tau_n = 0.0;      // sqrt(2 r log p)
  double t_n = 0.0;        // min((vartheta + r) / (2 sqrt r), sqrt r) sqrt(2 log p)
  double lambda_n = 0.0;   // 2 t_n
  double rho = 0.0;        // (1 + sqrt(1 - vartheta))^2
  Region region = Region::Boundary;
  bool optimality_hypothesis = false;  // theta > 2 (1 - vartheta)
  bool upper_bound_hypothesis = false; // theta > 1 - vartheta
};

double rho_boundary(double vartheta);
Region classify_region(double vartheta, double r);
Calibration calibrate(const PhasePoint& pt);

/// Exponent of p in the optimal Hamming rate.
double theoretical_exponent(const PhasePoint& pt);
double theoretical_exponent(double vartheta, double r);

struct RegressionProblem {
  DesignMatrix x;
  Vector beta;
  Vector y;
};

/// Instance for repetition `stream` under `rng_seed`; the RNG is seeded from
/// (rng_seed, stream) so any rep can be regenerated on its own.
RegressionProblem sample_instance(const Calibration& cal, const PhasePoint& pt,
                                  std::uint64_t rng_seed, std::uint64_t stream = 0,
                                  bool standardize = false);

/// Number of coordinates with sgn(beta_hat_j) != sgn(beta_j).
Index hamming(const Vector& beta_hat, const Vector& beta);

/// Hamming distance of a single fit at the tuned threshold / penalty.
struct RepOutcome {
  Index hamming = 0;
  bool converged = true;
};
RepOutcome fit_and_score(const RegressionProblem& prob, const Calibration& cal, Method method,
                         const LassoOptions& lasso = {});

struct McOptions {
  bool standardize = false;
  unsigned threads = 0;  // 0: hardware concurrency
  LassoOptions lasso;
};

struct McResult {
  Index reps = 0;
  double mean_hamming = 0.0;
  double se = 0.0;
  double exact_rate = 0.0;
  double normalized = 0.0;  // mean / (p eps_n)
  Index not_converged = 0;  // lasso reps that hit max_iter; still scored
};

McResult mc_hamming(const PhasePoint& pt, Method method, Index reps, std::uint64_t rng_seed,
                    const McOptions& options = {});

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
};

/// OLS of log(y) on log(x). Throws DegenerateRegression if any y <= 0.
SlopeFit fit_log_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ExponentRegression {
  double fitted_slope = 0.0;
  double theoretical_slope = 0.0;
  double stderr_slope = 0.0;
  std::vector<Index> ps;
  std::vector<McResult> results;
};

/// Runs mc_hamming at each point (same vartheta and r, several p) and
/// regresses log mean Hamming on log p. Needs >= 3 distinct p.
ExponentRegression exponent_regression(const std::vector<PhasePoint>& family, Method method,
                                       Index reps, std::uint64_t rng_seed,
                                       const McOptions& options = {});

struct SweepConfig {
  std::vector<double> varthetas;
  double theta = 0.75;
  std::vector<double> rs;
  std::vector<Index> ns;  // exactly one of ns / ps is nonempty
  std::vector<Index> ps;
  std::vector<Method> methods;
  Index reps = 100;
  std::uint64_t seed = 1;
  bool simulate = true;  // false: calibration and region labels only
  bool standardize = false;

  /// {"vartheta": x | [..], "theta": x, "r": x | [..], "n" | "p": k | [..],
  ///  "method": "mr" | "lasso" | "both" | [..], "reps": k, "seed": k,
  ///  "simulate"?: bool, "standardize"?: bool}
  static SweepConfig from_json(const std::string& text);
  std::vector<PhasePoint> points() const;
};

/// One row per (point, method), header first.
std::string run_sweep_csv(const SweepConfig& config, unsigned threads = 0);

}  // namespace margreg
