#pragma once

// Exact-recovery conditions for the lasso (E, E', I, I', J, J') and for
// marginal regression (F, F'), incoherence and its sparsity bounds, and the
// adversarial coefficient construction that defeats Condition F.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "margreg/linalg.hpp"

namespace margreg {

struct ConditionParams {
  double lambda0 = 0.1;  // floor on lambda_min(C_SS) for E'
  double eta = 0.1;      // slack for I'
  double rho_min = 1.0;  // minimum signal magnitude
  double lambda = 0.0;   // lasso tuning
  double sigma = 0.0;    // noise level

  /// Throws InvalidArgument unless eta in (0,1), lambda0 > 0, rho_min > 0,
  /// lambda >= 0 and sigma >= 0.
  void validate() const;
};

struct ConditionRecord {
  std::string name;
  bool satisfied = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs, oriented so that positive is good
  std::string detail;
};

struct ConditionReport {
  std::vector<ConditionRecord> records;

  void add(ConditionRecord r) { records.push_back(std::move(r)); }
  const ConditionRecord* find(const std::string& name) const;
  /// One JSON object per condition: name, satisfied, lhs, rhs, margin, detail.
  std::string to_json(int indent = 2) const;
};

/// (E, E'). lhs = lambda_min(C_SS) in both records.
std::pair<ConditionRecord, ConditionRecord> check_E(const GramPartition& gp,
                                                    const ConditionParams& params);

/// Condition I for one sign pattern: max |C_NS C_SS^-1 sign| <= 1.
ConditionRecord check_I(const GramPartition& gp, const Vector& sign_pattern);

/// (I over all sign patterns, I'). lhs = ||C_NS C_SS^-1||_inf. With
/// `cross_check` and s <= 12 the exhaustive sign maximum is computed as well
/// and stored in the detail text.
std::pair<ConditionRecord, ConditionRecord> check_I_uniform(const GramPartition& gp,
                                                            double eta,
                                                            bool cross_check = false);

/// max over all 2^s sign patterns of max |C_NS C_SS^-1 sign|, by brute force.
/// Requires s <= 25.
double irrepresentable_sign_maximum(const GramPartition& gp);

/// C_NS C_SS^-1, rows following the noise indices.
Matrix irrepresentable_matrix(const GramPartition& gp);

/// (J, J'). J uses beta_s and params.lambda; J' uses params.lambda and
/// params.rho_min.
std::pair<ConditionRecord, ConditionRecord> check_J(const GramPartition& gp,
                                                    const Vector& beta_s,
                                                    const ConditionParams& params);

/// Faithfulness: max |C_NS beta_S| < min |C_SS beta_S|.
ConditionRecord check_F(const GramPartition& gp, const Vector& beta_s);

/// Noisy faithfulness: max |C_NS beta_S| + 2 sigma sqrt(2 log p) < min |C_SS beta_S|.
ConditionRecord check_F_noisy(const GramPartition& gp, const Vector& beta_s,
                              double sigma, Index p);

/// Largest absolute off-diagonal entry of a unit-diagonal Gram matrix.
double incoherence(const Matrix& c);

struct IncoherenceBounds {
  // std::nullopt means the bound imposes no restriction (mu = 0).
  std::optional<long> s_max_lasso;
  std::optional<long> s_max_mr;
};

IncoherenceBounds incoherence_bounds(double mu, double c_mr = 0.5);

/// Builds beta with min |beta| >= rho and (C beta)_i = 0 for a chosen row i.
/// Throws DiagonalMatrix when C has no nonzero off-diagonal entry and
/// NoValidRow when no row is strictly dominated by its diagonal.
Vector construct_unfaithful_beta(const Matrix& c, double rho);

/// Every condition on one (X, S, beta_S): E, E', I, I', J, J', F, F' and
/// incoherence. X must be standardized.
ConditionReport check_all(const DesignMatrix& x, const SupportSet& s,
                          const Vector& beta_s, const ConditionParams& params);

}  // namespace margreg
