#include <cmath>

#include <nlohmann/json.hpp>

#include "margreg/conditions.hpp"
#include "margreg/lasso.hpp"
#include "margreg/marginal.hpp"

namespace margreg {

namespace {

using nlohmann::json;

json number(double v) {
  // Non-finite values become null.
  return std::isfinite(v) ? json(v) : json(nullptr);
}

}  // namespace

std::string ConditionReport::to_json(int indent) const {
  json conditions = json::array();
  for (const ConditionRecord& r : records) {
    conditions.push_back({{"name", r.name},
                          {"satisfied", r.satisfied},
                          {"lhs", number(r.lhs)},
                          {"rhs", number(r.rhs)},
                          {"margin", number(r.margin)},
                          {"detail", r.detail}});
  }
  return json{{"conditions", conditions}}.dump(indent);
}

std::string MarginalFit::to_json(bool include_alpha, int indent) const {
  json j;
  j["method"] = "mr";
  j["threshold"] = number(threshold);
  j["selected"] = selected.indices();
  json coef = json::array();
  for (Index k : selected.indices()) {
    coef.push_back({k, alpha_hat(static_cast<Eigen::Index>(k))});
  }
  j["coefficients"] = coef;
  if (include_alpha) {
    j["alpha_hat"] = std::vector<double>(alpha_hat.data(), alpha_hat.data() + alpha_hat.size());
  }
  return j.dump(indent);
}

std::string LassoFit::to_json(int indent) const {
  json j;
  j["method"] = "lasso";
  j["lambda"] = lambda;
  json coef = json::array();
  std::vector<Index> support;
  for (Eigen::Index k = 0; k < beta_hat.size(); ++k) {
    if (beta_hat(k) != 0.0) {
      coef.push_back({k, beta_hat(k)});
      support.push_back(static_cast<Index>(k));
    }
  }
  j["selected"] = support;
  j["coefficients"] = coef;
  j["iterations"] = iterations;
  j["converged"] = converged;
  j["kkt_violation"] = number(kkt_violation);
  return j.dump(indent);
}

}  // namespace margreg
