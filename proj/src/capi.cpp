#include "margreg/margreg.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include <nlohmann/json.hpp>

#include "margreg/conditions.hpp"
#include "margreg/errors.hpp"
#include "margreg/experiment.hpp"
#include "margreg/io.hpp"
#include "margreg/lasso.hpp"
#include "margreg/marginal.hpp"
#include "margreg/phase.hpp"

using namespace margreg;

struct mrg_design {
  DesignMatrix x;
};

namespace {

thread_local std::string last_error;

// Above this many columns alpha_hat is left out of select output unless asked.
constexpr Index kAlphaOutputLimit = 10000;

mrg_status from_code(ErrorCode code) {
  return static_cast<mrg_status>(static_cast<int>(code) + 1);
}

template <class Fn>
mrg_status guarded(Fn&& fn) {
  last_error.clear();
  try {
    fn();
    return MRG_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return from_code(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return MRG_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return MRG_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

DesignMatrix make_design(Matrix m, int standardize) {
  if (standardize) return standardize_columns(DesignMatrix(std::move(m)));
  return DesignMatrix::detect(std::move(m));
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

std::string select_mr_auto(const DesignMatrix& x, const Vector& y,
                           const mrg_select_params& params) {
  const SupportSizeEstimate est = estimate_support_size(x, y, params.sigma);
  const Vector alpha = marginal_coefficients(x, y);
  const auto mag = [&](Index rank) {
    return std::abs(alpha(static_cast<Eigen::Index>(est.order[rank])));
  };
  nlohmann::json j;
  j["method"] = "mr-auto";
  j["sigma"] = params.sigma;
  j["s_hat"] = est.s_hat;
  j["cutoff"] = est.cutoff;
  j["delta"] = est.delta;
  j["selected"] = est.support.indices();
  nlohmann::json coef = nlohmann::json::array();
  for (Index k : est.support.indices()) coef.push_back({k, alpha(static_cast<Eigen::Index>(k))});
  j["coefficients"] = coef;
  // Any threshold t with lower < t <= upper reproduces the selection.
  j["threshold_interval"] = {est.s_hat < x.p() ? mag(est.s_hat) : 0.0, mag(est.s_hat - 1)};
  if (params.include_alpha || x.p() <= kAlphaOutputLimit) j["alpha_hat"] = to_std(alpha);
  return j.dump(2);
}

}  // namespace

extern "C" {

const char* mrg_status_string(mrg_status status) {
  switch (status) {
    case MRG_OK: return "OK";
    case MRG_ERR_INTERNAL: return "InternalError";
    default: break;
  }
  const int code = static_cast<int>(status) - 1;
  if (code < 0 || code > static_cast<int>(ErrorCode::Io)) return "Unknown";
  static thread_local std::string name;
  name = std::string(to_string(static_cast<ErrorCode>(code)));
  return name.c_str();
}

int mrg_status_exit_code(mrg_status status) {
  if (status == MRG_OK) return 0;
  if (status == MRG_ERR_INTERNAL) return 1;
  const int code = static_cast<int>(status) - 1;
  if (code < 0 || code > static_cast<int>(ErrorCode::Io)) return 1;
  return kind_of(static_cast<ErrorCode>(code)) == ErrorKind::Numerical ? 3 : 2;
}

const char* mrg_last_error(void) { return last_error.c_str(); }

void mrg_string_free(char* s) { std::free(s); }
void mrg_free(void* p) { std::free(p); }

mrg_status mrg_design_create(const double* row_major, size_t n, size_t p, int standardize,
                             mrg_design** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be NULL");
    require(row_major != nullptr, "data must not be NULL");
    Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < p; ++j) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row_major[i * p + j];
      }
    }
    *out = new mrg_design{make_design(std::move(m), standardize)};
  });
}

mrg_status mrg_design_load_csv(const char* path, int standardize, mrg_design** out) {
  return guarded([&] {
    require(out != nullptr && path != nullptr, "path and out must not be NULL");
    *out = new mrg_design{make_design(load_matrix_csv(path), standardize)};
  });
}

void mrg_design_destroy(mrg_design* design) { delete design; }

mrg_status mrg_design_shape(const mrg_design* design, size_t* n, size_t* p) {
  return guarded([&] {
    require(design != nullptr, "design must not be NULL");
    if (n) *n = design->x.n();
    if (p) *p = design->x.p();
  });
}

int mrg_design_standardized(const mrg_design* design) {
  return design != nullptr && design->x.standardized() ? 1 : 0;
}

mrg_status mrg_vector_load_csv(const char* path, double** out, size_t* len) {
  return guarded([&] {
    require(path != nullptr && out != nullptr && len != nullptr, "arguments must not be NULL");
    const Vector v = load_vector_csv(path);
    double* buf = static_cast<double*>(std::malloc(sizeof(double) * std::max<size_t>(v.size(), 1)));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, v.data(), sizeof(double) * static_cast<size_t>(v.size()));
    *out = buf;
    *len = static_cast<size_t>(v.size());
  });
}

void mrg_condition_params_default(mrg_condition_params* params) {
  if (!params) return;
  const ConditionParams d;
  *params = {d.lambda0, d.eta, d.rho_min, d.lambda, d.sigma};
}

mrg_status mrg_check_conditions(const mrg_design* design, const size_t* support, size_t s,
                                const double* beta_s, const mrg_condition_params* params,
                                char** json_out) {
  return guarded([&] {
    require(design != nullptr && json_out != nullptr, "design and json_out must not be NULL");
    require(s == 0 || support != nullptr, "support must not be NULL");
    const SupportSet set =
        SupportSet::from_indices(std::vector<Index>(support, support + s), design->x.p());
    Vector b = Vector::Ones(static_cast<Eigen::Index>(s));
    if (beta_s) {
      for (size_t k = 0; k < s; ++k) b(static_cast<Eigen::Index>(k)) = beta_s[k];
    }
    ConditionParams cp;
    if (params) cp = {params->lambda0, params->eta, params->rho_min, params->lambda, params->sigma};
    cp.validate();
    *json_out = dup_string(check_all(design->x, set, b, cp).to_json());
  });
}

mrg_status mrg_select(const mrg_design* design, const double* y, size_t n,
                      const mrg_select_params* params, char** json_out) {
  return guarded([&] {
    require(design != nullptr && y != nullptr && params != nullptr && json_out != nullptr,
            "arguments must not be NULL");
    const DesignMatrix& x = design->x;
    if (n != x.n()) {
      throw Error(ErrorCode::DimensionMismatch, "response has length " + std::to_string(n) +
                                                    " but design has n = " +
                                                    std::to_string(x.n()));
    }
    const Vector yv = Eigen::Map<const Vector>(y, static_cast<Eigen::Index>(n));
    switch (params->method) {
      case MRG_METHOD_MR: {
        require(params->has_tuning, "method mr needs a threshold (--t)");
        const MarginalFit fit = threshold_select(marginal_coefficients(x, yv), params->tuning);
        *json_out = dup_string(fit.to_json(params->include_alpha || x.p() <= kAlphaOutputLimit));
        return;
      }
      case MRG_METHOD_MR_AUTO:
        require(params->sigma > 0.0, "method mr-auto needs sigma > 0 (--sigma)");
        *json_out = dup_string(select_mr_auto(x, yv, *params));
        return;
      case MRG_METHOD_LASSO: {
        require(params->has_tuning, "method lasso needs a penalty (--lambda)");
        *json_out = dup_string(lasso_solve(x, yv, params->tuning).to_json());
        return;
      }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown method");
  });
}

mrg_status mrg_phase_sweep(const char* config_json, unsigned threads, char** csv_out) {
  return guarded([&] {
    require(config_json != nullptr && csv_out != nullptr, "arguments must not be NULL");
    *csv_out = dup_string(run_sweep_csv(SweepConfig::from_json(config_json), threads));
  });
}

mrg_status mrg_sect5(const char* config_json, const mrg_sect5_overrides* overrides,
                     unsigned threads, char** csv_out) {
  return guarded([&] {
    require(csv_out != nullptr, "csv_out must not be NULL");
    std::vector<ExperimentConfig> configs = config_json
                                                ? experiment_configs_from_json(config_json)
                                                : default_experiment_configs();
    std::vector<ExperimentResult> results;
    for (ExperimentConfig& c : configs) {
      if (overrides) {
        if (overrides->has_reps) c.reps = overrides->reps;
        if (overrides->has_seed) c.seed = overrides->seed;
        if (overrides->has_sigma) c.sigma = overrides->sigma;
        if (overrides->refit) c.refit = true;
        if (overrides->holdout) c.holdout = true;
      }
      results.push_back(run_experiment(c, threads));
    }
    *csv_out = dup_string(experiment_csv(results));
  });
}

}  // extern "C"
