#include "margreg/random_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

#include "margreg/errors.hpp"

namespace margreg {

namespace {

using EIdx = Eigen::Index;

constexpr double kExpLimit = 700.0;
constexpr double kNonzeroEntry = 1e-12;
constexpr int kGoldenIterations = 20;
constexpr double kInf = std::numeric_limits<double>::infinity();

double min_abs_value(const std::vector<Atom>& atoms) {
  double m = kInf;
  for (const Atom& a : atoms) m = std::min(m, std::abs(a.value));
  return m;
}

double max_abs_value(const std::vector<Atom>& atoms) {
  double m = 0.0;
  for (const Atom& a : atoms) m = std::max(m, std::abs(a.value));
  return m;
}

void require_standardized(const DesignMatrix& x, const char* what) {
  if (!x.standardized()) {
    throw Error(ErrorCode::NotStandardized, std::string(what) + " requires a standardized design");
  }
}

// gbar_i(t) for every i; false on overflow.
bool g_bar_all(const Matrix& gram, const std::vector<Atom>& atoms, double t, Vector& out) {
  const EIdx p = gram.rows();
  out.setZero(p);
  for (EIdx i = 0; i < p; ++i) {
    double acc = 0.0;
    for (EIdx j = 0; j < p; ++j) {
      if (j == i) continue;
      const double c = gram(j, i);
      for (const Atom& a : atoms) {
        const double arg = t * a.value * c;
        if (std::abs(arg) > kExpLimit) return false;
        acc += a.prob * std::expm1(arg);
      }
    }
    out(i) = acc;
  }
  return true;
}

// log of exp(-delta t) sum_i [exp(eps gbar_i(t)) + exp(eps gbar_i(-t))];
// +inf when an exponent overflows.
double log_objective(const Matrix& gram, const CoefficientPrior& prior, double delta, double t) {
  Vector plus, minus;
  if (!g_bar_all(gram, prior.atoms(), t, plus) || !g_bar_all(gram, prior.atoms(), -t, minus)) {
    return kInf;
  }
  const double eps = prior.epsilon();
  const Vector a = eps * plus;
  const Vector b = eps * minus;
  const double top = std::max(a.maxCoeff(), b.maxCoeff());
  double sum = 0.0;
  for (EIdx i = 0; i < a.size(); ++i) sum += std::exp(a(i) - top) + std::exp(b(i) - top);
  return top + std::log(sum) - delta * t;
}

}  // namespace

CoefficientPrior::CoefficientPrior(double epsilon, std::vector<Atom> atoms)
    : epsilon_(epsilon),
      atoms_(std::move(atoms)),
      a_min_(min_abs_value(atoms_)),
      b_max_(max_abs_value(atoms_)) {
  validate();
}

CoefficientPrior::CoefficientPrior(double epsilon, std::vector<Atom> atoms, double a_min,
                                   double b_max)
    : epsilon_(epsilon), atoms_(std::move(atoms)), a_min_(a_min), b_max_(b_max) {
  validate();
}

void CoefficientPrior::validate() const {
  if (!(epsilon_ >= 0.0 && epsilon_ <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "epsilon must lie in [0, 1]");
  }
  if (atoms_.empty()) throw Error(ErrorCode::InvalidArgument, "prior needs at least one atom");
  if (!(a_min_ > 0.0) || !std::isfinite(a_min_)) {
    throw Error(ErrorCode::InvalidArgument, "a_min must be positive and finite");
  }
  if (!(b_max_ >= a_min_) || !std::isfinite(b_max_)) {
    throw Error(ErrorCode::InvalidArgument, "b_max must be finite and >= a_min");
  }
  double total = 0.0;
  for (const Atom& a : atoms_) {
    if (!std::isfinite(a.value) || !(a.prob >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "atoms need finite values and probabilities >= 0");
    }
    if (std::abs(a.value) < a_min_ || std::abs(a.value) > b_max_) {
      throw Error(ErrorCode::InvalidArgument,
                  "atom value " + std::to_string(a.value) + " outside [a_min, b_max] in magnitude");
    }
    total += a.prob;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument,
                "atom probabilities sum to " + std::to_string(total) + ", not 1");
  }
}

CoefficientPrior CoefficientPrior::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("prior JSON: ") + e.what());
  }
  try {
    const double eps = j.at("epsilon").get<double>();
    std::vector<Atom> atoms;
    for (const auto& pair : j.at("atoms")) {
      if (!pair.is_array() || pair.size() != 2) {
        throw Error(ErrorCode::Config, "each atom must be a [value, prob] pair");
      }
      atoms.push_back({pair[0].get<double>(), pair[1].get<double>()});
    }
    if (j.contains("a_min") || j.contains("b_max")) {
      const double a = j.value("a_min", min_abs_value(atoms));
      const double b = j.value("b_max", max_abs_value(atoms));
      return CoefficientPrior(eps, std::move(atoms), a, b);
    }
    return CoefficientPrior(eps, std::move(atoms));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("prior JSON: ") + e.what());
  }
}

double CoefficientPrior::abs_moment1() const {
  double m = 0.0;
  for (const Atom& a : atoms_) m += a.prob * std::abs(a.value);
  return m;
}

double CoefficientPrior::moment2() const {
  double m = 0.0;
  for (const Atom& a : atoms_) m += a.prob * a.value * a.value;
  return m;
}

Vector sample_beta(const CoefficientPrior& prior, Index p, std::uint64_t rng_seed) {
  if (p < 1) throw Error(ErrorCode::InvalidArgument, "p must be >= 1");
  std::seed_seq seq{static_cast<std::uint32_t>(rng_seed),
                    static_cast<std::uint32_t>(rng_seed >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const auto& atoms = prior.atoms();
  Vector beta = Vector::Zero(static_cast<EIdx>(p));
  for (Index j = 0; j < p; ++j) {
    if (!(unif(rng) < prior.epsilon())) continue;
    const double u = unif(rng);
    double cum = 0.0;
    double value = atoms.back().value;
    for (const Atom& a : atoms) {
      cum += a.prob;
      if (u < cum) {
        value = a.value;
        break;
      }
    }
    beta(static_cast<EIdx>(j)) = value;
  }
  return beta;
}

double g_bar(const DesignMatrix& x, const CoefficientPrior& prior, Index i, double t) {
  require_standardized(x, "g_bar");
  if (i >= x.p()) throw Error(ErrorCode::IndexOutOfRange, "g_bar: index out of range");
  const Vector c = x.values().transpose() * x.column(i);
  double acc = 0.0;
  for (EIdx j = 0; j < c.size(); ++j) {
    if (static_cast<Index>(j) == i) continue;
    for (const Atom& a : prior.atoms()) {
      const double arg = t * a.value * c(j);
      if (std::abs(arg) > kExpLimit) {
        throw Error(ErrorCode::Overflow,
                    "exponent argument " + std::to_string(arg) + " exceeds 700; shrink t");
      }
      acc += a.prob * std::expm1(arg);
    }
  }
  return acc;
}

std::vector<double> default_t_grid(double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be > 0");
  constexpr int kPoints = 60;
  const double lo = std::log(1e-2 / delta);
  const double hi = std::log(1e3 / delta);
  std::vector<double> grid(kPoints);
  for (int k = 0; k < kPoints; ++k) {
    grid[k] = std::exp(lo + (hi - lo) * k / (kPoints - 1));
  }
  return grid;
}

FaithfulnessBound faithfulness_bound_gram(const Matrix& gram, const CoefficientPrior& prior,
                                          double delta, const std::vector<double>& t_grid) {
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be > 0");
  if (gram.rows() != gram.cols() || gram.rows() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "Gram matrix must be square and nonempty");
  }
  std::vector<double> grid = t_grid.empty() ? default_t_grid(delta) : t_grid;
  for (double t : grid) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw Error(ErrorCode::InvalidArgument, "t grid entries must be positive and finite");
    }
  }
  std::sort(grid.begin(), grid.end());

  FaithfulnessBound out;
  out.t_lo = grid.front();
  out.t_hi = grid.back();
  std::vector<double> values(grid.size());
  std::size_t best = grid.size();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    values[k] = log_objective(gram, prior, delta, grid[k]);
    if (values[k] == kInf) {
      ++out.overflowed_points;
      continue;
    }
    if (best == grid.size() || values[k] < values[best]) best = k;
  }
  if (best == grid.size()) {
    throw Error(ErrorCode::AllOverflow, "every t grid point overflowed");
  }
  out.t_star = grid[best];
  out.log_a_n = values[best];

  if (grid.size() >= 2) {
    double a = grid[best == 0 ? 0 : best - 1];
    double b = grid[std::min(best + 1, grid.size() - 1)];
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - ratio * (b - a);
    double d = a + ratio * (b - a);
    double fc = log_objective(gram, prior, delta, c);
    double fd = log_objective(gram, prior, delta, d);
    for (int it = 0; it < kGoldenIterations; ++it) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - ratio * (b - a);
        fc = log_objective(gram, prior, delta, c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + ratio * (b - a);
        fd = log_objective(gram, prior, delta, d);
      }
    }
    if (fc < out.log_a_n) {
      out.log_a_n = fc;
      out.t_star = c;
    }
    if (fd < out.log_a_n) {
      out.log_a_n = fd;
      out.t_star = d;
    }
  }
  out.a_n = std::exp(out.log_a_n);
  return out;
}

FaithfulnessBound faithfulness_bound(const DesignMatrix& x, const CoefficientPrior& prior,
                                     double delta, const std::vector<double>& t_grid) {
  require_standardized(x, "faithfulness_bound");
  const Matrix gram = x.values().transpose() * x.values();
  return faithfulness_bound_gram(gram, prior, delta, t_grid);
}

FDoublePrimeReport check_F_doubleprime(const DesignMatrix& x, const CoefficientPrior& prior,
                                       double threshold) {
  FDoublePrimeReport r;
  r.threshold = threshold;
  r.detail = faithfulness_bound(x, prior, 0.5 * prior.a_min());
  r.a_n = r.detail.a_n;
  const double eps = prior.epsilon();
  r.failure_bound = (1.0 - eps) * r.a_n + eps * r.a_n;
  r.plausible = r.failure_bound < threshold;
  return r;
}

DesignStats design_stats_gram(const Matrix& gram, double epsilon) {
  if (gram.rows() != gram.cols() || gram.rows() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "Gram matrix must be square and nonempty");
  }
  const EIdx p = gram.rows();
  const double pd = static_cast<double>(p);
  DesignStats st;
  double row_mean = 0.0;
  double row_sq = 0.0;
  for (EIdx i = 0; i < p; ++i) {
    double sum = 0.0;
    double sq = 0.0;
    Index count = 0;
    for (EIdx j = 0; j < p; ++j) {
      if (j == i) continue;
      const double c = gram(j, i);
      sum += c;
      sq += c * c;
      count += std::abs(c) > kNonzeroEntry;
      st.mu_max = std::max(st.mu_max, std::abs(c));
    }
    row_mean = std::max(row_mean, std::abs(sum / pd));
    row_sq = std::max(row_sq, sq / pd);
    st.n_star = std::max(st.n_star, count);
  }
  st.m_n = pd * epsilon * row_mean;
  st.v_n_sq = pd * epsilon * row_sq;
  return st;
}

DesignStats design_stats(const DesignMatrix& x, double epsilon) {
  require_standardized(x, "design_stats");
  return design_stats_gram(x.values().transpose() * x.values(), epsilon);
}

CorollaryReport check_corollaries(const DesignStats& stats, const CoefficientPrior& prior,
                                  Index p, const CorollaryOptions& options) {
  if (p < 2) throw Error(ErrorCode::InvalidArgument, "p must be >= 2");
  if (!(options.c2 > 0.0 && options.c2 < 0.5)) {
    throw Error(ErrorCode::InvalidArgument, "c2 must lie in (0, 1/2)");
  }
  const double a = prior.a_min();
  const double b = prior.b_max();
  const double log_p = std::log(static_cast<double>(p));

  CorollaryReport r;
  r.coherence_log = {"coherence_log_p", (b / a) * stats.mu_max * log_p, kInf, true,
                     "(b/a) max|C_ij| <= c1 / log p for a fixed c1 > 0 (reported only)"};
  const double mean_value = prior.abs_moment1() / a * stats.m_n;
  r.mean_term = {"mean_term", mean_value, options.c2, mean_value <= options.c2,
                 "limsup (mu1/a) m_n <= c2"};
  const double var_value = prior.moment2() / (a * a) * stats.v_n_sq * log_p;
  r.variance_term = {"variance_term", var_value, options.v_tol, var_value <= options.v_tol,
                     "(mu2/a^2) v_n^2 log p -> 0"};
  r.weak_dependence_pass = r.mean_term.pass && r.variance_term.pass;

  r.eps_n_star = prior.epsilon() * static_cast<double>(stats.n_star);
  r.c3_proxy = r.eps_n_star > 0.0 ? -std::log(r.eps_n_star) / log_p : kInf;
  r.c4 = b / a;
  const double bound = r.c3_proxy / (2.0 * r.c4);
  r.sparse_gram = {"sparse_gram", stats.mu_max, bound, r.c3_proxy > 0.0 && stats.mu_max < bound,
                   "max|C_ij| <= delta < c3 / (2 c4) with liminf -log(eps N*)/log p >= c3"};
  r.sparse_pass = r.sparse_gram.pass;
  return r;
}

}  // namespace margreg
