#pragma once

// Random-coefficient regime: beta_i ~ (1 - eps) nu_0 + eps pi with pi a
// finite discrete distribution bounded away from zero. Provides the
// exponential-moment bound A_n on faithfulness failure, the F'' check, and
// the weak-dependence / sparse-Gram design diagnostics.

#include <cstdint>
#include <string>
#include <vector>

#include "margreg/linalg.hpp"

namespace margreg {

struct Atom {
  double value = 0.0;
  double prob = 0.0;
};

class CoefficientPrior {
 public:
  /// a_min / b_max default to min / max |value| over the atoms.
  CoefficientPrior(double epsilon, std::vector<Atom> atoms);
  CoefficientPrior(double epsilon, std::vector<Atom> atoms, double a_min, double b_max);

  /// {"epsilon": e, "atoms": [[value, prob], ...], "a_min"?: a, "b_max"?: b}
  static CoefficientPrior from_json(const std::string& text);

  double epsilon() const noexcept { return epsilon_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  double a_min() const noexcept { return a_min_; }
  double b_max() const noexcept { return b_max_; }

  /// E|u| and E u^2 under pi.
  double abs_moment1() const;
  double moment2() const;

 private:
  void validate() const;

  double epsilon_;
  std::vector<Atom> atoms_;
  double a_min_;
  double b_max_;
};

/// i.i.d. draws from the mixture, reproducible from the seed.
Vector sample_beta(const CoefficientPrior& prior, Index p, std::uint64_t rng_seed);

/// gbar_i(t) = sum_{j != i} sum_atoms prob (exp(t value C_ij) - 1). Throws
/// Overflow when some exponent argument exceeds 700 in magnitude.
double g_bar(const DesignMatrix& x, const CoefficientPrior& prior, Index i, double t);

struct FaithfulnessBound {
  double a_n = 0.0;      // may underflow to 0 or overflow to +inf; see log_a_n
  double log_a_n = 0.0;
  double t_star = 0.0;
  double t_lo = 0.0;     // grid range actually used
  double t_hi = 0.0;
  Index overflowed_points = 0;
};

/// 60 log-spaced points on [1e-2/delta, 1e3/delta].
std::vector<double> default_t_grid(double delta);

/// A_n(delta) = min_t exp(-delta t) sum_i [exp(eps gbar_i(t)) + exp(eps gbar_i(-t))],
/// evaluated in log space on the grid and refined by golden-section search
/// between the neighbours of the best grid point.
FaithfulnessBound faithfulness_bound(const DesignMatrix& x, const CoefficientPrior& prior,
                                     double delta, const std::vector<double>& t_grid = {});

/// Same as above on a precomputed Gram matrix (unit diagonal assumed).
FaithfulnessBound faithfulness_bound_gram(const Matrix& gram, const CoefficientPrior& prior,
                                          double delta, const std::vector<double>& t_grid = {});

struct FDoublePrimeReport {
  double a_n = 0.0;
  double failure_bound = 0.0;  // (1 - eps) a_n + eps a_n
  double threshold = 0.05;
  bool plausible = false;      // failure_bound < threshold
  FaithfulnessBound detail;
};

FDoublePrimeReport check_F_doubleprime(const DesignMatrix& x, const CoefficientPrior& prior,
                                       double threshold = 0.05);

struct DesignStats {
  double m_n = 0.0;
  double v_n_sq = 0.0;
  Index n_star = 0;
  double mu_max = 0.0;
};

DesignStats design_stats(const DesignMatrix& x, double epsilon);
DesignStats design_stats_gram(const Matrix& gram, double epsilon);

struct CorollaryOptions {
  double c2 = 0.49;     // must lie in (0, 1/2)
  double v_tol = 0.1;   // finite-n stand-in for "-> 0"
};

struct CorollaryDiagnostic {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
  std::string condition;  // the asymptotic requirement this value proxies
};

struct CorollaryReport {
  // Weak dependence.
  CorollaryDiagnostic coherence_log;  // (b/a) mu_max log p, reported only
  CorollaryDiagnostic mean_term;      // (mu1/a) m_n <= c2
  CorollaryDiagnostic variance_term;  // (mu2/a^2) v_n^2 log p -> 0
  bool weak_dependence_pass = false;
  // Sparse Gram.
  double eps_n_star = 0.0;
  double c3_proxy = 0.0;   // -log(eps N*) / log p
  double c4 = 0.0;         // b_max / a_min
  CorollaryDiagnostic sparse_gram;  // mu_max < c3 / (2 c4)
  bool sparse_pass = false;
};

CorollaryReport check_corollaries(const DesignStats& stats, const CoefficientPrior& prior,
                                  Index p, const CorollaryOptions& options = {});

}  // namespace margreg
