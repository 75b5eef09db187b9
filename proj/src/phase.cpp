#include "margreg/phase.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "margreg/errors.hpp"
#include "margreg/io.hpp"
#include "margreg/marginal.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace margreg {

namespace {

using EIdx = Eigen::Index;

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

using detail::stream_engine;

void check_open_unit(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(name) + " = " + format_double(v) + " must lie in (0, 1)");
  }
}

}  // namespace

std::string_view to_string(Region r) noexcept {
  switch (r) {
    case Region::ExactRecovery: return "exact_recovery";
    case Region::AlmostFullRecovery: return "almost_full_recovery";
    case Region::NoRecovery: return "no_recovery";
    case Region::Boundary: return "boundary";
  }
  return "unknown";
}

std::string_view to_string(Method m) noexcept { return m == Method::MR ? "mr" : "lasso"; }

Method parse_method(std::string_view name) {
  if (name == "mr") return Method::MR;
  if (name == "lasso") return Method::Lasso;
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + std::string(name) + "'");
}

PhasePoint PhasePoint::from_n(double vartheta, double theta, double r, Index n) {
  check_open_unit(theta, "theta");
  PhasePoint pt{vartheta, theta, r, n,
                static_cast<Index>(std::llround(std::pow(static_cast<double>(n), 1.0 / theta)))};
  pt.validate();
  return pt;
}

PhasePoint PhasePoint::from_p(double vartheta, double theta, double r, Index p) {
  check_open_unit(theta, "theta");
  PhasePoint pt{vartheta, theta, r,
                static_cast<Index>(std::llround(std::pow(static_cast<double>(p), theta))), p};
  pt.validate();
  return pt;
}

void PhasePoint::validate() const {
  check_open_unit(vartheta, "vartheta");
  check_open_unit(theta, "theta");
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw Error(ErrorCode::InvalidArgument, "r = " + format_double(r) + " must be > 0");
  }
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "n must be >= 2");
  if (p < n) throw Error(ErrorCode::InvalidArgument, "p must be >= n");
}

double rho_boundary(double vartheta) {
  const double s = 1.0 + std::sqrt(1.0 - vartheta);
  return s * s;
}

Region classify_region(double vartheta, double r) {
  const double rho = rho_boundary(vartheta);
  if (std::abs(r - vartheta) <= kBoundaryTolerance || std::abs(r - rho) <= kBoundaryTolerance) {
    return Region::Boundary;
  }
  if (r > rho) return Region::ExactRecovery;
  if (r > vartheta) return Region::AlmostFullRecovery;
  return Region::NoRecovery;
}

Calibration calibrate(const PhasePoint& pt) {
  pt.validate();
  const double log_p = std::log(static_cast<double>(pt.p));
  const double sr = std::sqrt(pt.r);
  Calibration cal;
  cal.n = pt.n;
  cal.p = pt.p;
  cal.epsilon_n = std::pow(static_cast<double>(pt.p), -pt.vartheta);
  cal.tau_n = std::sqrt(2.0 * pt.r * log_p);
  cal.t_n = std::min((pt.vartheta + pt.r) / (2.0 * sr), sr) * std::sqrt(2.0 * log_p);
  cal.lambda_n = 2.0 * cal.t_n;
  cal.rho = rho_boundary(pt.vartheta);
  cal.region = classify_region(pt.vartheta, pt.r);
  cal.optimality_hypothesis = pt.theta > 2.0 * (1.0 - pt.vartheta);
  cal.upper_bound_hypothesis = pt.theta > 1.0 - pt.vartheta;
  return cal;
}

double theoretical_exponent(double vartheta, double r) {
  if (r >= vartheta) return 1.0 - (vartheta + r) * (vartheta + r) / (4.0 * r);
  return 1.0 - vartheta;
}

double theoretical_exponent(const PhasePoint& pt) {
  pt.validate();
  return theoretical_exponent(pt.vartheta, pt.r);
}

RegressionProblem sample_instance(const Calibration& cal, const PhasePoint& pt,
                                  std::uint64_t rng_seed, std::uint64_t stream,
                                  bool standardize) {
  pt.validate();
  if (cal.n != pt.n || cal.p != pt.p) {
    throw Error(ErrorCode::DimensionMismatch, "calibration does not match the phase point");
  }
  const EIdx n = static_cast<EIdx>(pt.n);
  const EIdx p = static_cast<EIdx>(pt.p);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto x_rng = stream_engine(rng_seed, stream, 0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Matrix xv(n, p);
  double* data = xv.data();
  for (EIdx k = 0; k < n * p; ++k) data[k] = scale * normal(x_rng);

  auto beta_rng = stream_engine(rng_seed, stream, 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector beta = Vector::Zero(p);
  for (EIdx j = 0; j < p; ++j) {
    if (unif(beta_rng) < cal.epsilon_n) beta(j) = cal.tau_n;
  }

  auto z_rng = stream_engine(rng_seed, stream, 2);
  normal.reset();
  Vector z(n);
  for (EIdx i = 0; i < n; ++i) z(i) = normal(z_rng);

  DesignMatrix x(std::move(xv));
  if (standardize) x = standardize_columns(x);
  Vector y = x.values() * beta + z;
  return RegressionProblem{std::move(x), std::move(beta), std::move(y)};
}

Index hamming(const Vector& beta_hat, const Vector& beta) {
  if (beta_hat.size() != beta.size()) {
    throw Error(ErrorCode::DimensionMismatch, "hamming: length mismatch");
  }
  Index d = 0;
  for (EIdx j = 0; j < beta.size(); ++j) d += sgn(beta_hat(j)) != sgn(beta(j));
  return d;
}

RepOutcome fit_and_score(const RegressionProblem& prob, const Calibration& cal, Method method,
                         const LassoOptions& lasso) {
  RepOutcome out;
  if (method == Method::MR) {
    const MarginalFit fit = threshold_select(marginal_coefficients(prob.x, prob.y), cal.t_n);
    out.hamming = hamming(fit.estimate(), prob.beta);
  } else {
    const LassoFit fit = lasso_solve(prob.x, prob.y, cal.lambda_n, lasso);
    out.hamming = hamming(fit.beta_hat, prob.beta);
    out.converged = fit.converged;
  }
  return out;
}

McResult mc_hamming(const PhasePoint& pt, Method method, Index reps, std::uint64_t rng_seed,
                    const McOptions& options) {
  const Calibration cal = calibrate(pt);
  if (!cal.upper_bound_hypothesis) {
    throw Error(ErrorCode::InvalidArgument,
                "theta = " + format_double(pt.theta) + " must exceed 1 - vartheta = " +
                    format_double(1.0 - pt.vartheta));
  }
  if (reps < 1) throw Error(ErrorCode::InvalidArgument, "reps must be >= 1");

  std::vector<RepOutcome> outcomes(reps);
  detail::parallel_for(reps, options.threads, [&](std::size_t rep) {
    const RegressionProblem prob = sample_instance(cal, pt, rng_seed, rep, options.standardize);
    outcomes[rep] = fit_and_score(prob, cal, method, options.lasso);
  });

  McResult res;
  res.reps = reps;
  double sum = 0.0;
  Index exact = 0;
  for (const RepOutcome& o : outcomes) {
    sum += static_cast<double>(o.hamming);
    exact += o.hamming == 0;
    res.not_converged += !o.converged;
  }
  res.mean_hamming = sum / static_cast<double>(reps);
  if (reps > 1) {
    double ss = 0.0;
    for (const RepOutcome& o : outcomes) {
      const double d = static_cast<double>(o.hamming) - res.mean_hamming;
      ss += d * d;
    }
    res.se = std::sqrt(ss / static_cast<double>(reps - 1) / static_cast<double>(reps));
  }
  res.exact_rate = static_cast<double>(exact) / static_cast<double>(reps);
  res.normalized = res.mean_hamming / (static_cast<double>(pt.p) * cal.epsilon_n);
  return res;
}

SlopeFit fit_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "x and y lengths differ");
  if (x.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two points");
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (!(y[k] > 0.0)) {
      throw Error(ErrorCode::DegenerateRegression,
                  "response " + format_double(y[k]) + " at x = " + format_double(x[k]) +
                      " has no logarithm; the exponent is not estimable");
    }
    if (!(x[k] > 0.0)) throw Error(ErrorCode::InvalidArgument, "x values must be > 0");
  }
  const std::size_t m = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    mx += std::log(x[k]);
    my += std::log(y[k]);
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double dx = std::log(x[k]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[k]) - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::DegenerateRegression, "x values are all equal");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (m > 2) {
    double rss = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double e = std::log(y[k]) - fit.intercept - fit.slope * std::log(x[k]);
      rss += e * e;
    }
    fit.stderr_slope = std::sqrt(rss / static_cast<double>(m - 2) / sxx);
  } else {
    fit.stderr_slope = std::numeric_limits<double>::quiet_NaN();
  }
  return fit;
}

ExponentRegression exponent_regression(const std::vector<PhasePoint>& family, Method method,
                                       Index reps, std::uint64_t rng_seed,
                                       const McOptions& options) {
  if (family.empty()) throw Error(ErrorCode::InvalidArgument, "empty point family");
  std::set<Index> distinct;
  for (const PhasePoint& pt : family) {
    pt.validate();
    if (pt.vartheta != family[0].vartheta || pt.r != family[0].r ||
        pt.theta != family[0].theta) {
      throw Error(ErrorCode::InvalidArgument, "family must share vartheta, theta and r");
    }
    distinct.insert(pt.p);
  }
  if (distinct.size() < 3) {
    throw Error(ErrorCode::InvalidArgument, "exponent regression needs >= 3 distinct p");
  }
  ExponentRegression out;
  out.theoretical_slope = theoretical_exponent(family[0]);
  std::vector<double> xs, ys;
  for (const PhasePoint& pt : family) {
    out.ps.push_back(pt.p);
    out.results.push_back(mc_hamming(pt, method, reps, rng_seed, options));
    xs.push_back(static_cast<double>(pt.p));
    ys.push_back(out.results.back().mean_hamming);
  }
  const SlopeFit fit = fit_log_slope(xs, ys);
  out.fitted_slope = fit.slope;
  out.stderr_slope = fit.stderr_slope;
  return out;
}

namespace {

std::vector<double> number_or_list(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_array()) return v.get<std::vector<double>>();
  return {v.get<double>()};
}

std::vector<Index> count_or_list(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  std::vector<Index> out;
  auto take = [&](const nlohmann::json& e) {
    if (!e.is_number_integer() || e.get<long long>() < 0) {
      throw Error(ErrorCode::Config, std::string("'") + key + "' entries must be integers >= 0");
    }
    out.push_back(e.get<Index>());
  };
  if (v.is_array()) {
    for (const auto& e : v) take(e);
  } else {
    take(v);
  }
  return out;
}

}  // namespace

SweepConfig SweepConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("sweep config: ") + e.what());
  }
  SweepConfig c;
  try {
    c.varthetas = number_or_list(j, "vartheta");
    c.theta = j.value("theta", 0.75);
    c.rs = number_or_list(j, "r");
    const bool has_n = j.contains("n");
    const bool has_p = j.contains("p");
    if (has_n == has_p) throw Error(ErrorCode::Config, "give exactly one of 'n' or 'p'");
    if (has_n) c.ns = count_or_list(j, "n");
    if (has_p) c.ps = count_or_list(j, "p");

    const nlohmann::json m = j.value("method", nlohmann::json("both"));
    std::vector<std::string> names;
    if (m.is_array()) {
      names = m.get<std::vector<std::string>>();
    } else if (m.get<std::string>() == "both") {
      names = {"mr", "lasso"};
    } else {
      names = {m.get<std::string>()};
    }
    for (const auto& name : names) c.methods.push_back(parse_method(name));

    if (j.contains("reps")) {
      if (!j["reps"].is_number_integer() || j["reps"].get<long long>() < 1) {
        throw Error(ErrorCode::Config, "'reps' must be an integer >= 1");
      }
      c.reps = j["reps"].get<Index>();
    }
    if (j.contains("seed")) {
      if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0) {
        throw Error(ErrorCode::Config, "'seed' must be a non-negative integer");
      }
      c.seed = j["seed"].get<std::uint64_t>();
    }
    c.simulate = j.value("simulate", true);
    c.standardize = j.value("standardize", false);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("sweep config: ") + e.what());
  }
  if (c.varthetas.empty() || c.rs.empty() || (c.ns.empty() && c.ps.empty()) ||
      c.methods.empty()) {
    throw Error(ErrorCode::Config, "sweep config lists must be nonempty");
  }
  for (const PhasePoint& pt : c.points()) pt.validate();
  return c;
}

std::vector<PhasePoint> SweepConfig::points() const {
  std::vector<PhasePoint> pts;
  for (double vt : varthetas) {
    for (double r : rs) {
      for (Index n : ns) pts.push_back(PhasePoint::from_n(vt, theta, r, n));
      for (Index p : ps) pts.push_back(PhasePoint::from_p(vt, theta, r, p));
    }
  }
  return pts;
}

std::string run_sweep_csv(const SweepConfig& config, unsigned threads) {
  std::ostringstream out;
  out << "vartheta,theta,r,p,method,mean_hamming,se,exact_rate,normalized,region,"
         "theoretical_exponent,not_converged\n";
  McOptions opts;
  opts.threads = threads;
  opts.standardize = config.standardize;
  for (const PhasePoint& pt : config.points()) {
    const Calibration cal = calibrate(pt);
    for (Method m : config.methods) {
      out << format_double(pt.vartheta) << ',' << format_double(pt.theta) << ','
          << format_double(pt.r) << ',' << pt.p << ',' << to_string(m) << ',';
      if (config.simulate) {
        const McResult res = mc_hamming(pt, m, config.reps, config.seed, opts);
        out << format_double(res.mean_hamming) << ',' << format_double(res.se) << ','
            << format_double(res.exact_rate) << ',' << format_double(res.normalized) << ',';
        out << to_string(cal.region) << ',' << format_double(theoretical_exponent(pt)) << ','
            << res.not_converged << '\n';
      } else {
        out << ",,,," << to_string(cal.region) << ','
            << format_double(theoretical_exponent(pt)) << ",\n";
      }
    }
  }
  return out.str();
}

}  // namespace margreg
