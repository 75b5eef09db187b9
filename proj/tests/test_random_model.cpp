#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "margreg/errors.hpp"
#include "margreg/random_model.hpp"
#include "support.hpp"

using namespace margreg;
using margreg::test::design_with_gram;
using margreg::test::random_standardized;

namespace {

Matrix equicorrelated(Eigen::Index p, double rho) {
  Matrix c = Matrix::Constant(p, p, rho);
  c.diagonal().setOnes();
  return c;
}

CoefficientPrior point_mass(double eps, double value) { return {eps, {{value, 1.0}}}; }

CoefficientPrior symmetric_unit(double eps) { return {eps, {{-1.0, 0.5}, {1.0, 0.5}}}; }

}  // namespace

TEST_CASE("prior validation") {
  CHECK_NOTHROW(CoefficientPrior(0.1, {{1.0, 0.5}, {-2.0, 0.5}}));
  CHECK_THROWS_AS(CoefficientPrior(1.5, {{1.0, 1.0}}), Error);
  CHECK_THROWS_AS(CoefficientPrior(0.1, {}), Error);
  CHECK_THROWS_AS(CoefficientPrior(0.1, {{1.0, 0.5}}), Error);
  CHECK_THROWS_AS(CoefficientPrior(0.1, {{0.5, 1.0}}, 1.0, 2.0), Error);
  CHECK_THROWS_AS(CoefficientPrior(0.1, {{3.0, 1.0}}, 1.0, 2.0), Error);
  CHECK_THROWS_AS(CoefficientPrior(0.1, {{INFINITY, 1.0}}), Error);

  const CoefficientPrior p(0.2, {{1.0, 0.25}, {-3.0, 0.75}});
  CHECK(p.a_min() == 1.0);
  CHECK(p.b_max() == 3.0);
  CHECK(p.abs_moment1() == doctest::Approx(0.25 + 2.25));
  CHECK(p.moment2() == doctest::Approx(0.25 + 6.75));
}

TEST_CASE("prior from JSON") {
  const CoefficientPrior p =
      CoefficientPrior::from_json(R"({"epsilon": 0.1, "atoms": [[2, 0.5], [-2, 0.5]]})");
  CHECK(p.epsilon() == 0.1);
  CHECK(p.atoms().size() == 2);
  CHECK(p.a_min() == 2.0);
  const CoefficientPrior q = CoefficientPrior::from_json(
      R"({"epsilon": 0.1, "atoms": [[2, 1]], "a_min": 1.5, "b_max": 4})");
  CHECK(q.a_min() == 1.5);
  CHECK(q.b_max() == 4.0);
  CHECK_THROWS_AS(CoefficientPrior::from_json("{"), Error);
  CHECK_THROWS_AS(CoefficientPrior::from_json(R"({"epsilon": 0.1, "atoms": [[2]]})"), Error);
  CHECK_THROWS_AS(CoefficientPrior::from_json(R"({"atoms": [[2, 1]]})"), Error);
}

TEST_CASE("sample_beta") {
  CHECK(sample_beta(point_mass(0.0, 1.0), 100, 1).isZero());
  CHECK((sample_beta(point_mass(1.0, 2.5), 100, 1).array() == 2.5).all());
  CHECK(sample_beta(symmetric_unit(0.3), 500, 42) == sample_beta(symmetric_unit(0.3), 500, 42));
  CHECK(sample_beta(symmetric_unit(0.3), 500, 42) != sample_beta(symmetric_unit(0.3), 500, 43));
  CHECK_THROWS_AS(sample_beta(symmetric_unit(0.3), 0, 1), Error);
}

TEST_CASE("sample_beta nonzero counts concentrate like a binomial") {
  const Index p = 10000;
  const double eps = 0.1;
  const double band = 4.0 * std::sqrt(p * eps * (1 - eps));
  int inside = 0;
  const int seeds = 200;
  for (int seed = 0; seed < seeds; ++seed) {
    const Vector b = sample_beta(symmetric_unit(eps), p, static_cast<std::uint64_t>(seed));
    const double count = static_cast<double>((b.array() != 0.0).count());
    if (std::abs(count - p * eps) <= band) ++inside;
  }
  CHECK(inside >= 0.99 * seeds);
}

TEST_CASE("g_bar closed forms") {
  const CoefficientPrior prior = symmetric_unit(0.2);
  const DesignMatrix id(Matrix::Identity(5, 5), true);
  for (double t : {-3.0, 0.0, 0.5, 10.0}) CHECK(g_bar(id, prior, 2, t) == 0.0);

  const double rho = 0.4;
  const DesignMatrix pair = design_with_gram(equicorrelated(2, rho));
  const CoefficientPrior single = point_mass(0.2, 1.5);
  for (double t : {-2.0, 0.3, 4.0}) {
    CHECK(g_bar(pair, single, 0, t) == doctest::Approx(std::expm1(t * 1.5 * rho)).epsilon(1e-12));
  }
  // Tiny arguments keep full relative precision.
  CHECK(g_bar(pair, single, 0, 1e-12) == doctest::Approx(1e-12 * 1.5 * rho).epsilon(1e-9));
}

TEST_CASE("g_bar at t = 0 is exactly zero") {
  std::mt19937_64 rng(3);
  const DesignMatrix x = random_standardized(20, 15, rng);
  const CoefficientPrior prior(0.3, {{1.0, 0.3}, {-2.0, 0.7}});
  for (Index i = 0; i < 15; ++i) CHECK(g_bar(x, prior, i, 0.0) == 0.0);
}

TEST_CASE("g_bar errors") {
  const DesignMatrix pair = design_with_gram(equicorrelated(2, 0.5));
  CHECK_THROWS_AS(g_bar(pair, point_mass(0.1, 1.0), 5, 1.0), Error);
  try {
    g_bar(pair, point_mass(0.1, 1.0), 0, 2000.0);
    FAIL("expected Overflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Overflow);
  }
  CHECK_THROWS_AS(g_bar(DesignMatrix(2.0 * Matrix::Identity(2, 2)), point_mass(0.1, 1.0), 0, 1.0),
                  Error);
}

TEST_CASE("g_bar matches a Monte Carlo expectation") {
  std::mt19937_64 rng(17);
  const DesignMatrix x = random_standardized(12, 6, rng);
  const CoefficientPrior prior(0.5, {{1.0, 0.3}, {-2.0, 0.7}});
  const Matrix c = x.values().transpose() * x.values();
  const Index i = 2;
  const double t = 1.3;
  std::bernoulli_distribution pick_first(0.3);
  const int draws = 1000000;
  double sum = 0.0, sum_sq = 0.0;
  for (int d = 0; d < draws; ++d) {
    double v = 0.0;
    for (Eigen::Index j = 0; j < 6; ++j) {
      if (j == static_cast<Eigen::Index>(i)) continue;
      const double u = pick_first(rng) ? 1.0 : -2.0;
      v += std::expm1(t * u * c(static_cast<Eigen::Index>(i), j));
    }
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sum_sq / draws - mean * mean) / draws);
  CHECK(std::abs(g_bar(x, prior, i, t) - mean) <= 3.0 * se);
}

TEST_CASE("faithfulness_bound on an orthogonal design") {
  const Index p = 20;
  const DesignMatrix id(Matrix::Identity(p, p), true);
  const double delta = 0.5;
  const FaithfulnessBound b = faithfulness_bound(id, symmetric_unit(0.1), delta);
  const std::vector<double> grid = default_t_grid(delta);
  REQUIRE(grid.size() == 60);
  CHECK(grid.front() == doctest::Approx(1e-2 / delta));
  CHECK(grid.back() == doctest::Approx(1e3 / delta));
  CHECK(b.t_star == doctest::Approx(grid.back()));
  CHECK(b.log_a_n == doctest::Approx(std::log(2.0 * p) - delta * grid.back()).epsilon(1e-12));
  CHECK(b.overflowed_points == 0);

  const std::vector<double> custom{1.0, 2.0, 4.0};
  const FaithfulnessBound c = faithfulness_bound(id, symmetric_unit(0.1), delta, custom);
  CHECK(c.a_n == doctest::Approx(2.0 * p * std::exp(-2.0)));
  CHECK(c.t_hi == 4.0);
}

TEST_CASE("faithfulness_bound errors") {
  const DesignMatrix id(Matrix::Identity(3, 3), true);
  CHECK_THROWS_AS(faithfulness_bound(id, symmetric_unit(0.1), 0.0), Error);
  CHECK_THROWS_AS(faithfulness_bound(id, symmetric_unit(0.1), 1.0, {1.0, -1.0}), Error);
  const DesignMatrix pair = design_with_gram(equicorrelated(2, 0.9));
  try {
    faithfulness_bound(pair, point_mass(0.1, 1.0), 1.0, {5000.0, 10000.0});
    FAIL("expected AllOverflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AllOverflow);
  }
}

TEST_CASE("faithfulness_bound is invariant to permuting columns") {
  std::mt19937_64 rng(23);
  const Matrix c = margreg::test::random_correlation(15, 60, rng);
  std::vector<int> perm(15);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix pc(15, 15);
  for (int i = 0; i < 15; ++i) {
    for (int j = 0; j < 15; ++j) pc(i, j) = c(perm[i], perm[j]);
  }
  const CoefficientPrior prior(0.2, {{1.0, 0.6}, {-1.5, 0.4}});
  const FaithfulnessBound a = faithfulness_bound_gram(c, prior, 0.5);
  const FaithfulnessBound b = faithfulness_bound_gram(pc, prior, 0.5);
  CHECK(a.log_a_n == doctest::Approx(b.log_a_n).epsilon(1e-10));
}

TEST_CASE("faithfulness_bound grows as the Gram matrix moves away from the identity") {
  std::mt19937_64 rng(29);
  const Matrix c = margreg::test::random_correlation(30, 50, rng);
  const Matrix id = Matrix::Identity(30, 30);
  const CoefficientPrior prior = symmetric_unit(0.1);
  double prev = -INFINITY;
  for (double theta = 0.0; theta <= 1.0 + 1e-12; theta += 0.1) {
    const FaithfulnessBound b = faithfulness_bound_gram((1 - theta) * id + theta * c, prior, 0.5);
    CHECK(b.log_a_n >= prev - 1e-9 * std::abs(prev));
    prev = b.log_a_n;
  }
}

TEST_CASE("A_n dominates faithfulness failures on random designs") {
  std::mt19937_64 rng(31);
  const Index n = 100, p = 50;
  const double delta = 0.75;
  const CoefficientPrior prior = symmetric_unit(0.03);
  const double eps = prior.epsilon();
  const int draws = 2000;
  int informative = 0;
  for (int inst = 0; inst < 50; ++inst) {
    const DesignMatrix x = random_standardized(n, p, rng);
    const Matrix c = x.values().transpose() * x.values();
    const double a_n = faithfulness_bound(x, prior, delta).a_n;
    int noise_hits = 0, signal_hits = 0;
    for (int d = 0; d < draws; ++d) {
      const Vector beta = sample_beta(prior, p, static_cast<std::uint64_t>(inst) * 100003u + d);
      const Vector off = c * beta - beta;  // (C - I) beta, diagonal excluded
      double worst_noise = 0.0, worst_signal = 0.0;
      for (Index i = 0; i < p; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        if (beta(k) == 0.0) {
          worst_noise = std::max(worst_noise, std::abs(off(k)));
        } else {
          worst_signal = std::max(worst_signal, std::abs(off(k)));
        }
      }
      if (worst_noise >= delta) ++noise_hits;
      if (worst_signal >= delta) ++signal_hits;
    }
    for (const auto& [hits, bound] : {std::pair{noise_hits, (1 - eps) * a_n},
                                      std::pair{signal_hits, eps * a_n}}) {
      const double b = std::min(bound, 1.0);
      const double se = std::sqrt(b * (1 - b) / draws);
      CHECK(static_cast<double>(hits) / draws <= b + 3.0 * se + 1e-12);
    }
    if ((1 - eps) * a_n < 1.0) ++informative;
  }
  // The check only means something where the bound is below 1.
  CHECK(informative >= 25);
}

TEST_CASE("check_F_doubleprime") {
  const DesignMatrix id(Matrix::Identity(100, 100), true);
  const FDoublePrimeReport good = check_F_doubleprime(id, point_mass(0.1, 1.0));
  CHECK(good.failure_bound < 1e-10);
  CHECK(good.plausible);
  CHECK(good.threshold == 0.05);

  const DesignMatrix eq = design_with_gram(equicorrelated(50, 0.3));
  const FDoublePrimeReport bad = check_F_doubleprime(eq, point_mass(0.3, 1.0));
  CHECK(bad.failure_bound > 1.0);
  CHECK_FALSE(bad.plausible);
  CHECK(bad.failure_bound == doctest::Approx(bad.a_n));
}

TEST_CASE("design_stats") {
  const DesignStats o = design_stats(DesignMatrix(Matrix::Identity(6, 6), true), 0.1);
  CHECK(o.m_n == 0.0);
  CHECK(o.v_n_sq == 0.0);
  CHECK(o.n_star == 0);
  CHECK(o.mu_max == 0.0);

  const Index p = 40;
  const double rho = 0.25, eps = 0.1;
  const DesignStats e = design_stats(design_with_gram(equicorrelated(p, rho)), eps);
  CHECK(e.m_n == doctest::Approx(p * eps * rho * (p - 1) / p).epsilon(1e-10));
  CHECK(e.v_n_sq == doctest::Approx(p * eps * rho * rho * (p - 1) / p).epsilon(1e-10));
  CHECK(e.n_star == p - 1);
  CHECK(e.mu_max == doctest::Approx(rho));

  Matrix one = Matrix::Identity(5, 5);
  one(1, 3) = one(3, 1) = 0.6;
  CHECK(design_stats(design_with_gram(one), eps).n_star == 1);
}

TEST_CASE("corollary checks pass trivially on an orthogonal design") {
  const DesignStats s = design_stats_gram(Matrix::Identity(50, 50), 0.1);
  const CorollaryReport r = check_corollaries(s, point_mass(0.1, 1.0), 50);
  CHECK(r.weak_dependence_pass);
  CHECK(r.sparse_pass);
  CHECK(std::isinf(r.c3_proxy));
  CHECK(r.eps_n_star == 0.0);
}

TEST_CASE("banded Gram with sparse rows passes the sparse-Gram check") {
  // eps = p^-vartheta with vartheta = 1/2, point mass at 1 (c4 = 1) and
  // |C_ij| = 0.05; N* <= p^(vartheta - 2 c4 delta) = p^0.4 ~ 15.8 allows a
  // band of two neighbours each side.
  const Index p = 1000;
  const double vartheta = 0.5, mu = 0.05;
  Matrix c = Matrix::Identity(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index d = 1; d <= 2; ++d) {
      if (i + d < p) {
        c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + d)) = mu;
        c(static_cast<Eigen::Index>(i + d), static_cast<Eigen::Index>(i)) = mu;
      }
    }
  }
  const double eps = std::pow(static_cast<double>(p), -vartheta);
  const DesignStats s = design_stats_gram(c, eps);
  CHECK(s.n_star == 4);
  CHECK(static_cast<double>(s.n_star) <= std::pow(static_cast<double>(p), vartheta - 2 * mu));
  const CorollaryReport r = check_corollaries(s, point_mass(eps, 1.0), p);
  CHECK(r.c4 == 1.0);
  CHECK(r.c3_proxy == doctest::Approx(-std::log(eps * 4) / std::log(1000.0)));
  CHECK(r.sparse_pass);
}

TEST_CASE("dense equicorrelation makes the variance term grow with p") {
  const double rho = 0.5, eps = 0.1;
  const CoefficientPrior prior = point_mass(eps, 1.0);
  double prev = 0.0;
  for (Index p : {100, 400, 1600}) {
    const DesignStats s = design_stats_gram(equicorrelated(static_cast<Eigen::Index>(p), rho), eps);
    const CorollaryReport r = check_corollaries(s, prior, p);
    const double closed = eps * rho * rho * (p - 1) * std::log(static_cast<double>(p));
    CHECK(r.variance_term.value == doctest::Approx(closed).epsilon(1e-9));
    CHECK(r.variance_term.value > prev);
    CHECK_FALSE(r.variance_term.pass);
    CHECK_FALSE(r.weak_dependence_pass);
    prev = r.variance_term.value;
  }
}

TEST_CASE("check_corollaries argument checks") {
  const DesignStats s;
  CHECK_THROWS_AS(check_corollaries(s, point_mass(0.1, 1.0), 1), Error);
  CorollaryOptions bad;
  bad.c2 = 0.5;
  CHECK_THROWS_AS(check_corollaries(s, point_mass(0.1, 1.0), 10, bad), Error);
}
