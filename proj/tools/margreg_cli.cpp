// margreg: condition reports, variable selection, phase sweeps and the path
// benchmark from the command line. All output is JSON or CSV.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "margreg/margreg.h"

namespace {

struct Failure {
  mrg_status status;
};

void check(mrg_status st) {
  if (st != MRG_OK) throw Failure{st};
}

struct DesignHandle {
  mrg_design* ptr = nullptr;
  ~DesignHandle() { mrg_design_destroy(ptr); }
};

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { mrg_string_free(ptr); }
};

std::vector<double> load_vector(const std::string& path) {
  double* data = nullptr;
  size_t len = 0;
  check(mrg_vector_load_csv(path.c_str(), &data, &len));
  std::vector<double> v(data, data + len);
  mrg_free(data);
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: IoError: cannot open '" << path << "'\n";
    throw Failure{MRG_ERR_IO};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "error: IoError: cannot write '" << out_path << "'\n";
    throw Failure{MRG_ERR_IO};
  }
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

std::vector<size_t> parse_support(const std::string& spec) {
  std::vector<size_t> out;
  std::string token;
  std::istringstream in(spec);
  while (std::getline(in, token, ',')) {
    if (token.empty()) continue;
    size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(token, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != token.size()) {
      std::cerr << "error: ParseError: bad support index '" << token << "'\n";
      throw Failure{MRG_ERR_PARSE};
    }
    out.push_back(static_cast<size_t>(v));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Marginal regression and lasso: conditions, selection, phase sweeps, benchmarks"};
  app.require_subcommand(1);

  std::string matrix, response, beta_path, support, method = "mr", config, out;
  std::optional<double> t, lambda, sigma;
  std::optional<unsigned long long> seed;
  std::optional<size_t> reps;
  bool no_standardize = false, refit = false, holdout = false, include_alpha = false;
  unsigned threads = 0;
  mrg_condition_params cond;
  mrg_condition_params_default(&cond);

  auto* cmd_check = app.add_subcommand("check", "Evaluate recovery conditions on a design");
  cmd_check->add_option("--matrix", matrix, "Design CSV (rows = observations)")->required();
  cmd_check->add_option("--support", support, "Comma separated 0-based support indices");
  cmd_check->add_option("--beta", beta_path,
                        "Coefficient CSV: length p, or length s when --support is given");
  cmd_check->add_option("--lambda0", cond.lambda0, "Eigenvalue floor for E'");
  cmd_check->add_option("--eta", cond.eta, "Slack for I'");
  cmd_check->add_option("--rho-min", cond.rho_min, "Minimum signal magnitude");
  cmd_check->add_option("--lambda", cond.lambda, "Lasso penalty for J and J'");
  cmd_check->add_option("--sigma", cond.sigma, "Noise level for F'");
  cmd_check->add_flag("--no-standardize", no_standardize, "Use the columns as given");
  cmd_check->add_option("--out", out, "Output file (default stdout)");

  auto* cmd_select = app.add_subcommand("select", "Select variables by mr, mr-auto or lasso");
  cmd_select->add_option("--matrix", matrix, "Design CSV")->required();
  cmd_select->add_option("--response", response, "Response CSV")->required();
  cmd_select->add_option("--method", method, "mr | mr-auto | lasso")
      ->check(CLI::IsMember({"mr", "mr-auto", "lasso"}));
  cmd_select->add_option("--t", t, "Threshold for mr");
  cmd_select->add_option("--lambda", lambda, "Penalty for lasso");
  cmd_select->add_option("--sigma", sigma, "Noise level for mr-auto");
  cmd_select->add_flag("--no-standardize", no_standardize, "Use the columns as given");
  cmd_select->add_flag("--include-alpha", include_alpha, "Always emit X^T Y");
  cmd_select->add_option("--out", out, "Output file (default stdout)");

  auto* cmd_phase = app.add_subcommand("phase", "Phase-diagram sweep from a JSON config");
  cmd_phase->add_option("--config", config, "Sweep config JSON")->required();
  cmd_phase->add_option("--seed", seed, "Override the config seed");
  cmd_phase->add_option("--reps", reps, "Override the config reps");
  cmd_phase->add_option("--threads", threads, "Worker threads (0 = all)");
  cmd_phase->add_option("--out", out, "Output CSV (default stdout)");

  auto* cmd_sect5 = app.add_subcommand("sect5", "MR vs lasso path benchmark");
  cmd_sect5->add_option("--config", config, "Experiment config JSON (default grid if absent)");
  cmd_sect5->add_option("--seed", seed, "Override the seed");
  cmd_sect5->add_option("--reps", reps, "Override the number of replications");
  cmd_sect5->add_option("--sigma", sigma, "Override the noise level");
  cmd_sect5->add_flag("--refit", refit, "Least-squares refit on each selected set");
  cmd_sect5->add_flag("--holdout", holdout, "Prediction error on a fresh design draw");
  cmd_sect5->add_option("--threads", threads, "Worker threads (0 = all)");
  cmd_sect5->add_option("--out", out, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (cmd_check->parsed()) {
      DesignHandle d;
      check(mrg_design_load_csv(matrix.c_str(), no_standardize ? 0 : 1, &d.ptr));
      size_t n = 0, p = 0;
      check(mrg_design_shape(d.ptr, &n, &p));
      std::vector<size_t> s = parse_support(support);
      std::vector<double> beta_s;
      if (!beta_path.empty()) {
        const std::vector<double> beta = load_vector(beta_path);
        if (support.empty()) {
          if (beta.size() != p) {
            std::cerr << "error: DimensionMismatch: --beta has length " << beta.size()
                      << " but the design has p = " << p << "\n";
            return 2;
          }
          for (size_t j = 0; j < p; ++j) {
            if (beta[j] != 0.0) {
              s.push_back(j);
              beta_s.push_back(beta[j]);
            }
          }
        } else if (beta.size() == s.size()) {
          beta_s = beta;
        } else if (beta.size() == p) {
          for (size_t j : s) beta_s.push_back(j < p ? beta[j] : 0.0);
        } else {
          std::cerr << "error: DimensionMismatch: --beta must have length s or p\n";
          return 2;
        }
      } else if (support.empty()) {
        std::cerr << "error: InvalidArgument: give --support, --beta or both\n";
        return 2;
      }
      OwnedString json;
      check(mrg_check_conditions(d.ptr, s.data(), s.size(),
                                 beta_s.empty() ? nullptr : beta_s.data(), &cond, &json.ptr));
      emit(json.ptr, out);
    } else if (cmd_select->parsed()) {
      DesignHandle d;
      check(mrg_design_load_csv(matrix.c_str(), no_standardize ? 0 : 1, &d.ptr));
      const std::vector<double> y = load_vector(response);
      mrg_select_params sp{};
      sp.include_alpha = include_alpha ? 1 : 0;
      if (method == "mr") {
        sp.method = MRG_METHOD_MR;
        sp.has_tuning = t.has_value();
        sp.tuning = t.value_or(0.0);
      } else if (method == "lasso") {
        sp.method = MRG_METHOD_LASSO;
        sp.has_tuning = lambda.has_value();
        sp.tuning = lambda.value_or(0.0);
      } else {
        sp.method = MRG_METHOD_MR_AUTO;
        sp.sigma = sigma.value_or(0.0);
      }
      OwnedString json;
      check(mrg_select(d.ptr, y.data(), y.size(), &sp, &json.ptr));
      emit(json.ptr, out);
    } else if (cmd_phase->parsed()) {
      std::string text = read_file(config);
      if (seed || reps) {
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
          std::cerr << "error: ParseError: " << config << ": " << e.what() << "\n";
          return 2;
        }
        if (seed) j["seed"] = *seed;
        if (reps) j["reps"] = *reps;
        text = j.dump();
      }
      OwnedString csv;
      check(mrg_phase_sweep(text.c_str(), threads, &csv.ptr));
      emit(csv.ptr, out);
    } else if (cmd_sect5->parsed()) {
      std::string text;
      if (!config.empty()) text = read_file(config);
      mrg_sect5_overrides ov{};
      ov.has_reps = reps.has_value();
      ov.reps = reps.value_or(0);
      ov.has_seed = seed.has_value();
      ov.seed = seed.value_or(0);
      ov.has_sigma = sigma.has_value();
      ov.sigma = sigma.value_or(0.0);
      ov.refit = refit;
      ov.holdout = holdout;
      OwnedString csv;
      check(mrg_sect5(config.empty() ? nullptr : text.c_str(), &ov, threads, &csv.ptr));
      emit(csv.ptr, out);
    }
  } catch (const Failure& f) {
    if (*mrg_last_error() != '\0') {
      std::cerr << "error: " << mrg_status_string(f.status) << ": " << mrg_last_error() << "\n";
    }
    return mrg_status_exit_code(f.status);
  }
  return 0;
}
