#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "mc2/polytope.hpp"
#include "mc2/stats.hpp"
#include "mc2/truncexp_mv.hpp"
#include "oracles.hpp"

using namespace mc2;

namespace {

constexpr int kN = 100000;
constexpr double kAlpha = 0.01;

Polytope triangle() {
  Eigen::MatrixXd A(2, 2);
  A << 1, 2, 3, 1;
  return Polytope(A, Eigen::Vector2d(2, 3), {true, true});
}

// 2-D integral of g over the triangle {x >= 0, x1 + x2 <= c}.
double simplex_integral(const std::function<double(double, double)>& g, double c = 1.0) {
  return oracle::integrate(
      [&](double x1) { return oracle::integrate([&](double x2) { return g(x1, x2); }, 0.0, c - x1); }, 0.0, c);
}

}  // namespace

TEST_CASE("gibbs_conditional_bounds on a single constraint") {
  Eigen::MatrixXd A(1, 2);
  A << 1, 1;
  const Polytope P(A, Eigen::VectorXd::Ones(1), {true, true});
  const Interval iv = gibbs_conditional_bounds(P, Eigen::Vector2d(0.3, 0.4), 0);
  CHECK(iv.lo == 0.0);
  CHECK(iv.hi == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("gibbs_conditional_bounds on the farmer rows") {
  Eigen::MatrixXd A(3, 2);
  A << 1, 1, 110, 30, 120, 210;
  const Polytope P(A, Eigen::Vector3d(75, 4000, 15000), {true, true});
  const Interval iv = gibbs_conditional_bounds(P, Eigen::Vector2d(10, 10), 0);
  CHECK(iv.lo == 0.0);
  // min(65, 3700/110, 12900/120)
  CHECK(iv.hi == doctest::Approx(33.636363636363636).epsilon(1e-14));
}

TEST_CASE("rows with a zero coefficient contribute no bound") {
  Eigen::MatrixXd A(2, 2);
  A << 0, 1, 1, 0;
  const Polytope P(A, Eigen::Vector2d(1, 5), {false, false});
  const Interval iv = gibbs_conditional_bounds(P, Eigen::Vector2d(0, 0), 0);
  CHECK(iv.lo == -kInf);
  CHECK(iv.hi == 5.0);
  Eigen::MatrixXd A2(1, 2);
  A2 << 1e-13, 1;
  const Interval iv2 = gibbs_conditional_bounds(Polytope(A2, Eigen::VectorXd::Ones(1), {false, false}),
                                                Eigen::Vector2d(0, 0), 0);
  CHECK(iv2.lo == -kInf);
  CHECK(iv2.hi == kInf);
}

TEST_CASE("gibbs_conditional_bounds rejects an infeasible point") {
  Eigen::MatrixXd A(2, 1);
  A << 1, -1;
  const Polytope P(A, Eigen::Vector2d(1, -2), {false});
  CHECK_THROWS_AS(gibbs_conditional_bounds(P, Eigen::VectorXd::Zero(1), 0), Error);
}

TEST_CASE("gibbs_conditional_bounds is exact on random instances") {
  std::mt19937_64 eng(17);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  int checked = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int K = 2 + rep % 3, m = 3 + rep % 4;
    Eigen::MatrixXd A(m, K);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < K; ++j) A(i, j) = U(eng);
    Eigen::VectorXd x(K);
    for (int j = 0; j < K; ++j) x(j) = 1.0 + U(eng);
    const Eigen::VectorXd b = A * x + (Eigen::VectorXd::Random(m).array().abs() + 0.01).matrix();
    std::vector<bool> nn(K);
    for (int j = 0; j < K; ++j) nn[j] = (rep + j) % 2 == 0;
    const Polytope P(A, b, nn);
    const int k = rep % K;
    const Interval iv = gibbs_conditional_bounds(P, x, k);
    REQUIRE(iv.contains(x(k)));
    for (double end : {iv.lo, iv.hi}) {
      if (!std::isfinite(end)) continue;
      const double eps = 1e-8 * (1.0 + std::abs(end));
      Eigen::VectorXd y = x;
      y(k) = end;
      CHECK(P.max_violation(y) <= 1e-12 * (1.0 + b.cwiseAbs().maxCoeff()));
      y(k) = end == iv.lo ? end - eps : end + eps;
      CHECK(P.max_violation(y) > 0.0);
      ++checked;
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("gibbs sweep on the unit box with unit rates") {
  const Polytope box = Polytope::box(Eigen::Vector2d::Zero(), Eigen::Vector2d::Ones());
  RngStream rng(1);
  Eigen::VectorXd x = Eigen::Vector2d(0.5, 0.5);
  std::vector<double> a, b;
  for (int s = 0; s < kN + 100; ++s) {
    x = gibbs_sweep_truncexp(box, Eigen::Vector2d(1, 1), x, rng);
    REQUIRE(box.contains(x));
    if (s >= 100) {
      a.push_back(x(0));
      b.push_back(x(1));
    }
  }
  // 1 - 1/(e - 1)
  const double oracle_mean = 0.41802329313067;
  CHECK(std::abs(mean(a) - oracle_mean) < 3.0 * batch_means_se(a));
  CHECK(std::abs(mean(b) - oracle_mean) < 3.0 * batch_means_se(b));
  const auto cdf = [](double t) { return oracle::trunc_exp_cdf(-1.0, 0.0, 1.0, t); };
  CHECK(oracle::ks_one_sample(a, cdf).p > kAlpha);
  CHECK(oracle::ks_one_sample(b, cdf).p > kAlpha);
}

TEST_CASE("gibbs sweep on a triangle matches the rejection oracle") {
  const Polytope P = triangle();
  const Eigen::Vector2d rates(0.5, -1.0);
  RngStream rng(2);
  Eigen::VectorXd x = Eigen::Vector2d(0.1, 0.1);
  const int thin = 5;
  std::vector<Eigen::VectorXd> draws;
  for (int s = 0; s < thin * kN + 500; ++s) {
    x = gibbs_sweep_truncexp(P, rates, x, rng);
    REQUIRE(P.contains(x));
    if (s >= 500 && s % thin == 0) draws.push_back(x);
  }
  std::mt19937_64 eng(2);
  Eigen::MatrixXd A(2, 2);
  A << 1, 2, 3, 1;
  const auto ref = oracle::polytope_exp_rejection(A, Eigen::Vector2d(2, 3), -rates, Eigen::Vector2d::Zero(),
                                                  Eigen::Vector2d(1, 1), kN, eng);
  CHECK(oracle::ks_two_sample(oracle::column(draws, 0), oracle::column(ref, 0)).p > kAlpha);
  CHECK(oracle::ks_two_sample(oracle::column(draws, 1), oracle::column(ref, 1)).p > kAlpha);
  CHECK(oracle::ks_two_sample(oracle::row_sums(draws), oracle::row_sums(ref)).p > kAlpha);
}

TEST_CASE("zero rates give the uniform law on the polytope") {
  const Polytope P = triangle();
  RngStream rng(3);
  Eigen::VectorXd x = Eigen::Vector2d(0.1, 0.1);
  std::vector<Eigen::VectorXd> draws;
  for (int s = 0; s < 5 * kN; ++s) {
    x = gibbs_sweep_truncexp(P, Eigen::Vector2d::Zero(), x, rng);
    if (s % 5 == 0) draws.push_back(x);
  }
  std::mt19937_64 eng(3);
  Eigen::MatrixXd A(2, 2);
  A << 1, 2, 3, 1;
  const auto ref = oracle::polytope_exp_rejection(A, Eigen::Vector2d(2, 3), Eigen::Vector2d::Zero(),
                                                  Eigen::Vector2d::Zero(), Eigen::Vector2d(1, 1), kN, eng);
  for (int k = 0; k < 2; ++k) {
    const auto c = oracle::column(draws, k), r = oracle::column(ref, k);
    const double se = std::sqrt(batch_means_se(c) * batch_means_se(c) + variance(r) / r.size());
    CHECK(std::abs(mean(c) - mean(r)) < 3.0 * se);
  }
}

TEST_CASE("random scan sweep keeps the same law") {
  const Polytope box = Polytope::box(Eigen::Vector2d::Zero(), Eigen::Vector2d::Ones());
  RngStream rng(4);
  GibbsOptions opts;
  opts.random_scan = true;
  Eigen::VectorXd x = Eigen::Vector2d(0.5, 0.5);
  std::vector<double> a;
  for (int s = 0; s < 4 * kN; ++s) {
    x = gibbs_sweep_truncexp(box, Eigen::Vector2d(2, 2), x, rng, opts);
    if (s % 4 == 0) a.push_back(x(0));
  }
  CHECK(oracle::ks_one_sample(a, [](double t) { return oracle::trunc_exp_cdf(-2.0, 0.0, 1.0, t); }).p > kAlpha);
}

TEST_CASE("simplex_uniform") {
  RngStream rng(5);
  for (int i = 0; i < 1000; ++i) {
    const auto r = simplex_uniform(1, rng);
    CHECK(r(0) >= 0.0);
    CHECK(r(0) < 1.0);
  }
  std::vector<Eigen::VectorXd> d;
  for (int i = 0; i < kN; ++i) {
    d.push_back(simplex_uniform(3, rng));
    REQUIRE(d.back().minCoeff() >= 0.0);
    REQUIRE(d.back().sum() <= 1.0);
  }
  // Dirichlet(1,1,1,1) coordinates: mean 1/4, variance 3/80.
  const double se = std::sqrt(3.0 / 80.0 / kN);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(mean(oracle::column(d, k)) - 0.25) < 3.0 * se);
  // sum of the three gaps is the largest of three uniforms
  CHECK(oracle::ks_one_sample(oracle::row_sums(d), [](double t) { return t * t * t; }).p > kAlpha);
}

TEST_CASE("kent equal-rate sampler, one dimension") {
  const auto T = make_simplex_target(Eigen::VectorXd::Constant(1, 2.0));
  REQUIRE(T.equal);
  RngStream rng(6);
  std::vector<double> x(kN);
  for (auto& v : x) v = kent_equal_lambda_sample(T, rng).x(0);
  CHECK(oracle::ks_one_sample(x, [](double t) { return oracle::trunc_exp_cdf(-2.0, 0.0, 1.0, t); }).p > kAlpha);
}

TEST_CASE("kent equal-rate sampler, two dimensions, lambda 3") {
  const auto T = make_simplex_target(Eigen::Vector2d(3, 3));
  RngStream rng(7);
  double hit = 0.0;
  std::vector<double> s(kN);
  for (auto& v : s) {
    const auto d = kent_equal_lambda_sample(T, rng);
    REQUIRE(d.x.minCoeff() >= 0.0);
    REQUIRE(d.x.sum() <= 1.0 + 1e-15);
    v = d.x.sum();
    hit += v < 0.5;
  }
  const auto g = [](double a, double b) { return std::exp(-3.0 * (a + b)); };
  const double p_ref = simplex_integral(g, 0.5) / simplex_integral(g, 1.0);
  CHECK(std::abs(hit / kN - p_ref) < 0.01);
  CHECK(oracle::ks_one_sample(s, [](double t) { return oracle::trunc_gamma_cdf(2.0, 3.0, 1.0, t); }).p > kAlpha);
}

TEST_CASE("kent equal-rate sampler at lambda 0 matches simplex_uniform") {
  const auto T = make_simplex_target(Eigen::Vector3d::Zero());
  RngStream rng(8), rng2(9);
  std::vector<Eigen::VectorXd> a, b;
  for (int i = 0; i < kN; ++i) {
    a.push_back(kent_equal_lambda_sample(T, rng).x);
    b.push_back(simplex_uniform(3, rng2));
  }
  const double se = std::sqrt(2.0 * 3.0 / 80.0 / kN);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(mean(oracle::column(a, k)) - mean(oracle::column(b, k))) < 3.0 * se);
}

TEST_CASE("kent unequal sampler with equal rates agrees with the equal-rate route") {
  const auto T = make_simplex_target(Eigen::Vector2d(1, 1));
  RngStream rng(10), rng2(11);
  std::vector<Eigen::VectorXd> a, b;
  for (int i = 0; i < kN; ++i) {
    a.push_back(kent_unequal_lambda_sample(T, rng).x);
    b.push_back(kent_equal_lambda_sample(T, rng2).x);
  }
  CHECK(oracle::ks_two_sample(oracle::column(a, 0), oracle::column(b, 0)).p > kAlpha);
  CHECK(oracle::ks_two_sample(oracle::row_sums(a), oracle::row_sums(b)).p > kAlpha);
}

TEST_CASE("kent unequal sampler with rates (1,2)") {
  const auto T = make_simplex_target(Eigen::Vector2d(1, 2));
  REQUIRE_FALSE(T.equal);
  RngStream rng(12);
  std::vector<double> x1(kN);
  std::size_t trials = 0;
  for (auto& v : x1) {
    const auto d = kent_unequal_lambda_sample(T, rng);
    trials += d.trials;
    v = d.x(0);
  }
  const auto g = [](double a, double b) { return std::exp(-a - 2.0 * b); };
  const double m_ref = simplex_integral([&](double a, double b) { return a * g(a, b); }) / simplex_integral(g);
  CHECK(std::abs(mean(x1) - m_ref) < 0.005);
  // acceptance rate = P(sum < 1) under the cube proposal
  const double cube = (1 - std::exp(-1.0)) * (1 - std::exp(-2.0)) / 2.0;
  const double acc_ref = simplex_integral(g) / cube;
  CHECK(static_cast<double>(kN) / trials == doctest::Approx(acc_ref).epsilon(0.02));
}

TEST_CASE("simplex samplers match the rejection oracle in three dimensions") {
  const Eigen::Vector3d rates(0.5, 2.0, 1.0);
  const auto T = make_simplex_target(rates);
  std::mt19937_64 eng(13);
  const auto ref = oracle::simplex_exp_rejection(rates, kN, eng);
  RngStream rng(13);
  std::vector<Eigen::VectorXd> cube, gamma;
  for (int i = 0; i < kN; ++i) {
    cube.push_back(kent_unequal_lambda_sample(T, rng).x);
    gamma.push_back(kent_gamma_route_sample(T, rng).x);
  }
  for (int k = 0; k < 3; ++k) {
    CHECK(oracle::ks_two_sample(oracle::column(cube, k), oracle::column(ref, k)).p > kAlpha);
    CHECK(oracle::ks_two_sample(oracle::column(gamma, k), oracle::column(ref, k)).p > kAlpha);
  }
  CHECK(oracle::ks_two_sample(oracle::row_sums(gamma), oracle::row_sums(ref)).p > kAlpha);
}

TEST_CASE("one-dimensional cube sampler always accepts") {
  const auto T = make_simplex_target(Eigen::VectorXd::Constant(1, 4.0));
  RngStream rng(14);
  for (int i = 0; i < 1000; ++i) CHECK(kent_unequal_lambda_sample(T, rng).trials == 1);
}

TEST_CASE("method selection by mean rate") {
  RngStream rng(15);
  CHECK(sample_simplex_exp(make_simplex_target(Eigen::Vector2d(0.1, 0.3)), rng).method == "cube");
  CHECK(sample_simplex_exp(make_simplex_target(Eigen::Vector2d(2, 2)), rng).method == "equal");
  CHECK(sample_simplex_exp(make_simplex_target(Eigen::Vector2d(1, 3)), rng).method == "gamma");
  CHECK(sample_simplex_exp(make_simplex_target(Eigen::Vector2d(6, 9)), rng).method == "cube");
  SimplexMethodThresholds thr;
  thr.high = 20.0;
  CHECK(sample_simplex_exp(make_simplex_target(Eigen::Vector2d(6, 9)), rng, thr).method == "gamma");
}

TEST_CASE("simplex_prob") {
  CHECK(simplex_prob(make_simplex_target(Eigen::VectorXd::Constant(1, 1.3))) ==
        doctest::Approx(1.0 - std::exp(-1.3)).epsilon(1e-14));
  CHECK(simplex_prob(make_simplex_target(Eigen::Vector2d(1, 2))) == doctest::Approx(0.39957640089372).epsilon(1e-12));
  // P(Poisson(2) >= 3) = 1 - 5 e^{-2}
  CHECK(simplex_prob(make_simplex_target(Eigen::Vector3d(2, 2, 2))) ==
        doctest::Approx(0.32332358381693654).epsilon(1e-13));
  // mixed equal and distinct rates vs direct Monte Carlo
  std::mt19937_64 eng(16);
  const auto s = oracle::exp_sum_draws({1.0, 1.0, 3.0}, 1000000, eng);
  double hit = 0.0;
  for (double v : s) hit += v < 1.0;
  const double p = hit / s.size();
  CHECK(std::abs(simplex_prob(make_simplex_target(Eigen::Vector3d(1, 1, 3))) - p) <
        3.0 * std::sqrt(p * (1 - p) / s.size()));
}

TEST_CASE("simplex_prob is continuous as rates coalesce") {
  for (double lam : {0.3, 1.0, 2.0, 7.0}) {
    const double equal = simplex_prob(make_simplex_target(Eigen::Vector2d(lam, lam)));
    const auto near = make_simplex_target(Eigen::Vector2d(lam, lam * (1 + 1e-4)));
    REQUIRE_FALSE(near.equal);
    CHECK(std::abs(simplex_prob(near) - equal) < 1e-3);
  }
}

TEST_CASE("normalizer identity d = p / prod(rates)") {
  for (const Eigen::Vector2d r : {Eigen::Vector2d(1, 2), Eigen::Vector2d(3, 3), Eigen::Vector2d(0.2, 5)}) {
    const auto T = make_simplex_target(r);
    const double d_quad = simplex_integral([&](double a, double b) { return std::exp(-r(0) * a - r(1) * b); });
    CHECK(std::exp(simplex_log_normalizer(T)) == doctest::Approx(d_quad).epsilon(1e-9));
    CHECK(simplex_prob(T) == doctest::Approx(d_quad * r.prod()).epsilon(1e-9));
    const double mass = simplex_integral([&](double a, double b) {
      return std::exp(simplex_exp_log_density(T, Eigen::Vector2d(a, b)));
    });
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
  }
}
