#include <doctest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "margreg/conditions.hpp"
#include "margreg/errors.hpp"
#include "support.hpp"

using namespace margreg;
using margreg::test::design_with_gram;
using margreg::test::small_example_gram;

namespace {

GramPartition partition_of(const Matrix& c_ss, const Matrix& c_ns) {
  GramPartition gp;
  gp.c_ss = c_ss;
  gp.c_ns = c_ns;
  const Index s = static_cast<Index>(c_ss.rows());
  const Index p = s + static_cast<Index>(c_ns.rows());
  std::vector<Index> idx(s);
  for (Index k = 0; k < s; ++k) idx[k] = k;
  gp.support = SupportSet::from_indices(idx, p);
  gp.full_diag = Vector::Ones(static_cast<Eigen::Index>(p));
  return gp;
}

Matrix row(std::initializer_list<double> v) {
  Matrix m(1, static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double e : v) m(0, k++) = e;
  return m;
}

// Gram matrix [[C_SS, C_NS^T], [C_NS, I]]: noise rows are mutually
// orthogonal only in the sense needed here (p small, PD checked by caller).
Matrix full_gram(const Matrix& c_ss, const Matrix& c_ns) {
  const Eigen::Index s = c_ss.rows();
  const Eigen::Index m = c_ns.rows();
  Matrix c = Matrix::Identity(s + m, s + m);
  c.topLeftCorner(s, s) = c_ss;
  c.bottomLeftCorner(m, s) = c_ns;
  c.topRightCorner(s, m) = c_ns.transpose();
  return c;
}

// Lasso side of the three-variable example, from the closed-form inverse of
// [[1, -1/2, c], [-1/2, 1, 0], [c, 0, 1]]:
// 4 C^-1 1 = (6 - 4c, 6 - 2c - 4c^2, 3 - 6c) / (3 - 4c^2).
double example_lasso_lhs(double c, double a1, double a2, double a3) {
  return std::abs((6 - 4 * c) * a1 + (6 - 2 * c - 4 * c * c) * a2 + (3 - 6 * c) * a3) /
         (3 - 4 * c * c);
}

}  // namespace

TEST_CASE("ConditionParams validation") {
  ConditionParams p;
  CHECK_NOTHROW(p.validate());
  p.eta = 1.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.lambda0 = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.sigma = -1.0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("check_E on the three-variable example and the identity") {
  ConditionParams params;
  params.lambda0 = 0.1;
  auto [e, ep] = check_E(partition_of(small_example_gram(0.85), Matrix::Zero(1, 3)), params);
  CHECK(e.satisfied);
  CHECK_FALSE(ep.satisfied);
  CHECK(e.lhs == doctest::Approx(1.0 - std::sqrt(0.85 * 0.85 + 0.25)).epsilon(1e-10));
  CHECK(ep.lhs == e.lhs);

  params.lambda0 = 0.5;
  auto [ei, epi] = check_E(partition_of(Matrix::Identity(3, 3), Matrix::Zero(1, 3)), params);
  CHECK(ei.satisfied);
  CHECK(epi.satisfied);

  auto [es, eps] =
      check_E(partition_of(small_example_gram(std::sqrt(3.0) / 2.0), Matrix::Zero(1, 3)), params);
  CHECK_FALSE(es.satisfied);
  CHECK_FALSE(eps.satisfied);
}

TEST_CASE("check_I with an equicorrelated pair reduces to |a1 + a2| <= 1 + rho") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  std::uniform_real_distribution<double> ur(-0.6, 0.6);
  int checked = 0;
  while (checked < 300) {
    const double rho = ur(rng);
    const double a1 = u(rng), a2 = u(rng);
    Matrix c_ss(2, 2);
    c_ss << 1, rho, rho, 1;
    const Matrix c_ns = row({a1, a2});
    if (min_eigenvalue(full_gram(c_ss, c_ns)) < 1e-6) continue;
    const double expected = std::abs(a1 + a2) / (1 + rho);
    if (std::abs(expected - 1.0) < 1e-9) continue;
    const auto gp = gram_partition(design_with_gram(full_gram(c_ss, c_ns)),
                                   SupportSet::from_indices({0, 1}, 3));
    const ConditionRecord r = check_I(gp, Vector::Ones(2));
    CHECK(r.lhs == doctest::Approx(expected).epsilon(1e-9));
    CHECK(r.satisfied == (std::abs(a1 + a2) <= 1 + rho));
    ++checked;
  }
}

TEST_CASE("check_I with C_SS = I is the row sum against the sign pattern") {
  Matrix c_ns(2, 3);
  c_ns << 0.2, -0.3, 0.1, 0.4, 0.4, 0.1;
  Vector sign(3);
  sign << 1, -1, 1;
  const ConditionRecord r = check_I(partition_of(Matrix::Identity(3, 3), c_ns), sign);
  CHECK(r.lhs == doctest::Approx(0.6));
  CHECK(r.satisfied);
}

TEST_CASE("three-variable example: verdicts of both conditions against hand evaluation") {
  const double a1 = 0.0, a2 = 0.2, a3 = 0.2;
  for (double c : {0.55, 0.75, 0.85}) {
    CAPTURE(c);
    const auto gp = gram_partition(design_with_gram(full_gram(small_example_gram(c),
                                                              row({a1, a2, a3}))),
                                   SupportSet::from_indices({0, 1, 2}, 4));
    const ConditionRecord lasso = check_I(gp, Vector::Ones(3));
    const double hand = example_lasso_lhs(c, a1, a2, a3);
    CHECK(lasso.lhs == doctest::Approx(hand).epsilon(1e-9));
    CHECK(lasso.satisfied == (hand <= 1.0));

    const ConditionRecord mr = check_F(gp, Vector::Ones(3));
    // C_SS 1 = (1/2 + c, 1/2, 1 + c), so the right side is 1/2.
    CHECK(mr.rhs == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(mr.lhs == doctest::Approx(std::abs(a1 + a2 + a3)).epsilon(1e-9));
    CHECK(mr.satisfied);
  }
  const auto gp = gram_partition(design_with_gram(full_gram(small_example_gram(0.85),
                                                            row({a1, a2, a3}))),
                                 SupportSet::from_indices({0, 1, 2}, 4));
  CHECK_FALSE(check_I(gp, Vector::Ones(3)).satisfied);
}

TEST_CASE("check_I ties count as satisfied") {
  const ConditionRecord r =
      check_I(partition_of(Matrix::Identity(2, 2), row({0.5, 0.5})), Vector::Ones(2));
  CHECK(r.lhs == 1.0);
  CHECK(r.margin == 0.0);
  CHECK(r.satisfied);
}

TEST_CASE("check_I_uniform row-sum arithmetic") {
  auto [i_all, ip] = check_I_uniform(partition_of(Matrix::Identity(2, 2), row({0.3, -0.4})), 0.2);
  CHECK(i_all.lhs == doctest::Approx(0.7));
  CHECK(i_all.satisfied);
  CHECK(ip.satisfied);
  auto [i2, ip2] = check_I_uniform(partition_of(Matrix::Identity(2, 2), row({0.3, -0.4})), 0.35);
  CHECK(i2.satisfied);
  CHECK_FALSE(ip2.satisfied);

  auto [iz, ipz] = check_I_uniform(partition_of(Matrix::Identity(2, 2), Matrix::Zero(3, 2)), 0.1);
  CHECK(iz.lhs == 0.0);
  CHECK(iz.satisfied);
  CHECK(iz.margin == 1.0);
}

TEST_CASE("irrepresentable norm equals the exhaustive sign maximum") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> sdist(1, 8);
  for (int trial = 0; trial < 200; ++trial) {
    const int s = sdist(rng);
    const DesignMatrix x = margreg::test::random_standardized(40, s + 6, rng);
    std::vector<Index> idx(s);
    for (int k = 0; k < s; ++k) idx[k] = static_cast<Index>(k);
    const auto gp = gram_partition(x, SupportSet::from_indices(idx, s + 6));
    const double norm = inf_operator_norm(irrepresentable_matrix(gp));
    const double brute = irrepresentable_sign_maximum(gp);
    REQUIRE(norm == brute);
    auto [i_all, ip] = check_I_uniform(gp, 0.1, true);
    CHECK(i_all.lhs == norm);
  }
}

TEST_CASE("check_J examples") {
  ConditionParams params;
  SUBCASE("no shrinkage") {
    params.lambda = 0.0;
    Vector b(2);
    b << 0.3, -2.0;
    auto [j, jp] = check_J(partition_of(small_example_gram(0.3).topLeftCorner(2, 2),
                                        Matrix::Zero(1, 2)),
                           b, params);
    CHECK(j.satisfied);
  }
  SUBCASE("identity block, lambda = rho / 2") {
    const double rho = 1.5;
    params.rho_min = rho;
    params.lambda = rho / 2;
    Vector b(2);
    b << rho, -rho;
    auto [j, jp] = check_J(partition_of(Matrix::Identity(2, 2), Matrix::Zero(1, 2)), b, params);
    CHECK(j.satisfied);
    CHECK(j.lhs == doctest::Approx(rho / 2));
    CHECK(jp.satisfied);
    CHECK(jp.lhs == doctest::Approx(rho / 2));
  }
  SUBCASE("inverse with infinity norm 4") {
    Matrix c_ss(2, 2);
    c_ss << 1, 0.75, 0.75, 1;
    CHECK(inf_operator_norm(c_ss.inverse()) == doctest::Approx(4.0));
    params.rho_min = 1.0;
    params.lambda = 0.3;
    auto [j, jp] = check_J(partition_of(c_ss, Matrix::Zero(1, 2)), Vector::Ones(2), params);
    CHECK(jp.lhs == doctest::Approx(1.2));
    CHECK_FALSE(jp.satisfied);
  }
}

TEST_CASE("check_F with a negatively correlated pair") {
  Matrix c_ss(2, 2);
  c_ss << 1, -0.75, -0.75, 1;
  Vector b(2);
  b << 2, 1;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int trial = 0; trial < 200; ++trial) {
    const double a1 = u(rng), a2 = u(rng);
    if (std::abs(std::abs(2 * a1 + a2) - 0.5) < 1e-9) continue;
    const ConditionRecord r = check_F(partition_of(c_ss, row({a1, a2})), b);
    CHECK(r.rhs == doctest::Approx(0.5));
    CHECK(r.satisfied == (std::abs(2 * a1 + a2) < 0.5));
  }
}

TEST_CASE("check_F strictness and orthogonal designs") {
  Vector five(1);
  five << 5.0;
  const ConditionRecord r = check_F(partition_of(Matrix::Identity(1, 1), Matrix::Zero(3, 1)), five);
  CHECK(r.satisfied);
  CHECK(r.margin == 5.0);

  const ConditionRecord tie =
      check_F(partition_of(Matrix::Identity(2, 2), row({0.5, 0.5})), Vector::Ones(2));
  CHECK(tie.margin == 0.0);
  CHECK_FALSE(tie.satisfied);
}

TEST_CASE("check_F_noisy arithmetic") {
  const GramPartition gp = partition_of(Matrix::Identity(1, 1), Matrix::Zero(2, 1));
  Vector b(1);
  b << 5.0;
  const ConditionRecord fail = check_F_noisy(gp, b, 1.0, 100);
  CHECK(fail.lhs == doctest::Approx(2 * std::sqrt(2 * std::log(100.0))));
  CHECK(fail.lhs == doctest::Approx(6.07).epsilon(1e-3));
  CHECK_FALSE(fail.satisfied);
  b << 10.0;
  const ConditionRecord pass = check_F_noisy(gp, b, 1.0, 100);
  CHECK(pass.satisfied);
  CHECK(pass.margin == doctest::Approx(3.93).epsilon(1e-3));
}

TEST_CASE("check_F_noisy is check_F at sigma = 0 and monotone in sigma and p") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const DesignMatrix x = margreg::test::random_standardized(30, 10, rng);
    const auto gp = gram_partition(x, SupportSet::from_indices({0, 1, 2}, 10));
    Vector b(3);
    for (int k = 0; k < 3; ++k) b(k) = 3.0 * normal(rng);
    const ConditionRecord f = check_F(gp, b);
    const ConditionRecord f0 = check_F_noisy(gp, b, 0.0, 10);
    CHECK(f0.satisfied == f.satisfied);
    CHECK(f0.lhs == f.lhs);
    double last = f0.lhs;
    bool failed = !f0.satisfied;
    for (double sigma : {0.01, 0.1, 0.5, 1.0}) {
      for (Index p : {10, 100, 10000}) {
        const ConditionRecord r = check_F_noisy(gp, b, sigma, p);
        CHECK(r.lhs >= last - 1e-15);
        if (failed) CHECK_FALSE(r.satisfied);
        failed = failed || !r.satisfied;
        last = r.lhs;
      }
    }
  }
}

TEST_CASE("incoherence") {
  CHECK(incoherence(Matrix::Identity(4, 4)) == 0.0);
  Matrix eq = Matrix::Constant(5, 5, 0.2);
  eq.diagonal().setOnes();
  CHECK(incoherence(eq) == doctest::Approx(0.2));

  // Spike basis concatenated with a normalized Hadamard basis.
  Matrix h(4, 4);
  h << 1, 1, 1, 1, 1, -1, 1, -1, 1, 1, -1, -1, 1, -1, -1, 1;
  Matrix x(4, 8);
  x << Matrix::Identity(4, 4), h / 2.0;
  const Matrix c = x.transpose() * x;
  double scan = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) scan = std::max(scan, std::abs(x.col(i).dot(x.col(4 + j))));
  }
  CHECK(incoherence(c) == doctest::Approx(scan));
  CHECK(scan == doctest::Approx(0.5));

  try {
    incoherence(2.0 * Matrix::Identity(2, 2));
    FAIL("expected NotUnitDiagonal");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotUnitDiagonal);
  }
}

TEST_CASE("incoherence_bounds") {
  const auto b = incoherence_bounds(0.1, 0.5);
  REQUIRE(b.s_max_lasso);
  REQUIRE(b.s_max_mr);
  CHECK(*b.s_max_lasso == 5);
  CHECK(*b.s_max_mr == 2);
  CHECK(*incoherence_bounds(0.5).s_max_lasso == 1);
  const auto none = incoherence_bounds(0.0);
  CHECK_FALSE(none.s_max_lasso);
  CHECK_FALSE(none.s_max_mr);
  // Integer boundary: (1 + 1/3) / (2/3) = 2 exactly, so s = 2 is excluded.
  CHECK(*incoherence_bounds(1.0 / 3.0).s_max_lasso == 1);
}

TEST_CASE("construct_unfaithful_beta on a 2x2") {
  Matrix c(2, 2);
  c << 1, 0.5, 0.5, 1;
  const Vector b = construct_unfaithful_beta(c, 1.0);
  CHECK(b(0) == doctest::Approx(-1.0));
  CHECK(b(1) == doctest::Approx(2.0));
  CHECK((c * b)(0) == doctest::Approx(0.0));
}

TEST_CASE("construct_unfaithful_beta errors") {
  try {
    construct_unfaithful_beta(Matrix::Identity(3, 3), 1.0);
    FAIL("expected DiagonalMatrix");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DiagonalMatrix);
  }
  Matrix singular(2, 2);
  singular << 1, 1, 1, 1;
  CHECK_THROWS_AS(construct_unfaithful_beta(singular, 1.0), NearSingularError);
}

TEST_CASE("construct_unfaithful_beta picks the row with most nonzeros, lowest index on ties") {
  Matrix c = Matrix::Identity(4, 4);
  c(0, 1) = c(1, 0) = 0.2;
  c(2, 3) = c(3, 2) = 0.1;
  c(2, 1) = c(1, 2) = 0.3;
  // Rows 1 and 2 both have two nonzero off-diagonals; row 1 wins.
  const Vector b = construct_unfaithful_beta(c, 1.0);
  CHECK(b(1) == doctest::Approx(-2.0));
  CHECK(std::abs((c * b)(1)) <= 1e-12);
}

TEST_CASE("constructed coefficients lie in M_rho and defeat faithfulness") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> sdist(2, 10);
  for (int trial = 0; trial < 100; ++trial) {
    const int s = sdist(rng);
    const Matrix c = margreg::test::random_correlation(s, 3 * s, rng);
    for (double rho : {0.5, 1.0, 3.0}) {
      const Vector b = construct_unfaithful_beta(c, rho);
      CHECK(b.cwiseAbs().minCoeff() >= rho);
      CHECK((c * b).cwiseAbs().minCoeff() <= 1e-10 * std::max(1.0, b.cwiseAbs().maxCoeff()));
      const ConditionRecord f = check_F(partition_of(c, Matrix::Constant(1, s, 0.05)), b);
      CHECK_FALSE(f.satisfied);
    }
  }
}

TEST_CASE("with C_SS = I and a flat two-variable signal, I and F agree") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  int agreed = 0;
  for (int trial = 0; trial < 500; ++trial) {
    Matrix c_ns(3, 2);
    for (Eigen::Index k = 0; k < c_ns.size(); ++k) c_ns(k) = u(rng);
    const GramPartition gp = partition_of(Matrix::Identity(2, 2), c_ns);
    const ConditionRecord i = check_I(gp, Vector::Ones(2));
    const ConditionRecord f = check_F(gp, Vector::Ones(2));
    if (i.lhs == 1.0) continue;  // the only place the strictness differs
    CHECK(i.satisfied == f.satisfied);
    ++agreed;
  }
  CHECK(agreed == 500);
}

TEST_CASE("check_all on the three-variable design") {
  const DesignMatrix x = design_with_gram(full_gram(small_example_gram(0.85), row({0, 0.2, 0.2})));
  ConditionParams params;
  const ConditionReport rep = check_all(x, SupportSet::from_indices({0, 1, 2}, 4),
                                        Vector::Ones(3), params);
  for (const char* name : {"E", "E'", "I", "I_uniform", "I'", "J", "J'", "F", "F'",
                           "incoherence"}) {
    CAPTURE(name);
    CHECK(rep.find(name) != nullptr);
  }
  CHECK(rep.find("E")->satisfied);
  CHECK_FALSE(rep.find("E'")->satisfied);
  CHECK_FALSE(rep.find("I")->satisfied);
  CHECK(rep.find("F")->satisfied);

  const auto j = nlohmann::json::parse(rep.to_json());
  REQUIRE(j["conditions"].size() == rep.records.size());
  for (const auto& rec : j["conditions"]) {
    CHECK(rec.contains("name"));
    CHECK(rec.contains("satisfied"));
    CHECK(rec.contains("lhs"));
    CHECK(rec.contains("rhs"));
    CHECK(rec.contains("margin"));
    CHECK(rec.contains("detail"));
  }
}

TEST_CASE("check_all reports lasso conditions as unavailable when C_SS is singular") {
  Matrix x = Matrix::Zero(3, 3);
  x(0, 0) = 1.0;
  x(0, 1) = 1.0;
  x(1, 2) = 1.0;
  const ConditionReport rep = check_all(DesignMatrix(x, true),
                                        SupportSet::from_indices({0, 1}, 3), Vector::Ones(2), {});
  CHECK_FALSE(rep.find("E")->satisfied);
  for (const char* name : {"I", "I_uniform", "I'", "J", "J'"}) {
    CAPTURE(name);
    CHECK_FALSE(rep.find(name)->satisfied);
    CHECK(std::isnan(rep.find(name)->lhs));
    CHECK(rep.find(name)->detail.find("NearSingular") != std::string::npos);
  }
  CHECK(rep.find("F") != nullptr);
}

TEST_CASE("check_all margins agree with verdicts except on ties of non-strict conditions") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    const DesignMatrix x = margreg::test::random_standardized(50, 12, rng);
    Vector b = margreg::test::gaussian_matrix(3, 1, rng).col(0);
    const ConditionReport rep =
        check_all(x, SupportSet::from_indices({2, 5, 9}, 12), b, ConditionParams{});
    for (const ConditionRecord& r : rep.records) {
      CAPTURE(r.name);
      if (r.margin != 0.0 && !std::isnan(r.margin)) CHECK(r.satisfied == (r.margin > 0.0));
    }
  }
}
