#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "mc2/stats.hpp"
#include "mc2/truncnorm_mv.hpp"
#include "oracles.hpp"

using namespace mc2;

namespace {

constexpr int kN = 100000;
constexpr double kAlpha = 0.01;

TruncNormalTarget box_target(const Eigen::VectorXd& mu, const Eigen::MatrixXd& S, double lo, double hi) {
  const int K = static_cast<int>(mu.size());
  return {mu, S, Polytope::box(Eigen::VectorXd::Constant(K, lo), Eigen::VectorXd::Constant(K, hi))};
}

// |mean(a) - mean(b)| within 3 combined standard errors; a is a chain, b iid.
bool means_agree(const std::vector<double>& a, const std::vector<double>& b) {
  const double sa = batch_means_se(a);
  const double se = std::sqrt(sa * sa + variance(b) / b.size());
  return std::abs(mean(a) - mean(b)) < 3.0 * se;
}

std::vector<double> products(const std::vector<Eigen::VectorXd>& v, int i, int j) {
  std::vector<double> out;
  for (const auto& x : v) out.push_back(x(i) * x(j));
  return out;
}

}  // namespace

TEST_CASE("decorrelate with identity covariance") {
  Eigen::MatrixXd A(1, 2);
  A << 1, -2;
  const TruncNormalTarget t{Eigen::Vector2d(0.5, -1), Eigen::Matrix2d::Identity(), Polytope(A, Eigen::VectorXd::Ones(1))};
  const auto sys = decorrelate(t);
  CHECK(sys.Q.isApprox(Eigen::Matrix2d::Identity()));
  CHECK(sys.D.isApprox(A));
  CHECK(sys.alpha.isApprox(t.mu));
}

TEST_CASE("decorrelate with correlation 0.9") {
  Eigen::Matrix2d S;
  S << 1, 0.9, 0.9, 1;
  const auto sys = decorrelate(box_target(Eigen::Vector2d::Zero(), S, 0, 1));
  CHECK((sys.Q * S * sys.Q.transpose() - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((sys.Q * sys.Qinv - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("decorrelate rejects singular or asymmetric covariance") {
  Eigen::Matrix2d S;
  S << 1, 1, 1, 1;
  CHECK_THROWS_AS(decorrelate(box_target(Eigen::Vector2d::Zero(), S, 0, 1)), Error);
  S << 1, 0.5, 0.4, 1;
  CHECK_THROWS_AS(decorrelate(box_target(Eigen::Vector2d::Zero(), S, 0, 1)), Error);
  S << 1, 0, 0, -1;
  CHECK_THROWS_AS(decorrelate(box_target(Eigen::Vector2d::Zero(), S, 0, 1)), Error);
}

TEST_CASE("constraint equivalence under the transform") {
  std::mt19937_64 eng(3);
  std::normal_distribution<double> Z;
  Eigen::Matrix3d B;
  for (int i = 0; i < 9; ++i) B.data()[i] = Z(eng);
  const Eigen::Matrix3d S = B * B.transpose() + 0.1 * Eigen::Matrix3d::Identity();
  Eigen::MatrixXd A(4, 3);
  for (int i = 0; i < 12; ++i) A.data()[i] = Z(eng);
  const TruncNormalTarget t{Eigen::Vector3d(1, 2, 3), S, Polytope(A, Eigen::VectorXd::Ones(4))};
  const auto sys = decorrelate(t);
  for (int rep = 0; rep < 1000; ++rep) {
    Eigen::Vector3d phi(Z(eng), Z(eng), Z(eng));
    CHECK((A * sys.to_theta(phi) - sys.D * phi).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(sys.to_phi(sys.to_theta(phi)).isApprox(phi, 1e-10));
  }
  CHECK(sys.alpha.isApprox(sys.Q * t.mu));
}

TEST_CASE("unconstrained sweep has law N(alpha, I) and no lag-1 correlation") {
  Eigen::Matrix2d S;
  S << 2, 1.2, 1.2, 1;
  const TruncNormalTarget t{Eigen::Vector2d(1, -1), S, Polytope(Eigen::MatrixXd(0, 2), Eigen::VectorXd(0))};
  const auto sys = decorrelate(t);
  RngStream rng(1);
  Eigen::VectorXd phi = Eigen::Vector2d::Zero();
  std::vector<Eigen::VectorXd> d;
  for (int s = 0; s < kN; ++s) {
    phi = gibbs_sweep_truncnorm(sys, phi, rng);
    d.push_back(phi);
  }
  for (int k = 0; k < 2; ++k) {
    const auto c = oracle::column(d, k);
    const double m = mean(c);
    CHECK(std::abs(m - sys.alpha(k)) < 3.0 / std::sqrt(kN));
    CHECK(std::abs(variance(c) - 1.0) < 3.0 * std::sqrt(2.0 / kN));
    double lag = 0.0;
    for (std::size_t i = 1; i < c.size(); ++i) lag += (c[i] - m) * (c[i - 1] - m);
    lag /= (c.size() - 1) * variance(c);
    CHECK(std::abs(lag) < 3.0 / std::sqrt(kN));
    CHECK(oracle::ks_one_sample(c, [&](double x) { return oracle::trunc_normal_cdf(sys.alpha(k), 1.0, -kInf, kInf, x); })
              .p > kAlpha);
  }
  const auto cross = products(d, 0, 1);
  CHECK(std::abs(mean(cross) - sys.alpha(0) * sys.alpha(1)) < 3.0 * batch_means_se(cross));
}

TEST_CASE("identity covariance on the unit box") {
  RngStream rng(2);
  const auto draws = sample_truncnorm(box_target(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity(), 0, 1), kN + 100,
                                      100, rng);
  REQUIRE(draws.size() == static_cast<std::size_t>(kN));
  for (int k = 0; k < 2; ++k) {
    const auto c = oracle::column(draws, k);
    // (phi(0) - phi(1)) / (Phi(1) - Phi(0))
    CHECK(std::abs(mean(c) - 0.45986) < 0.005);
    CHECK(oracle::ks_one_sample(c, [](double x) { return oracle::trunc_normal_cdf(0, 1, 0, 1, x); }).p > kAlpha);
  }
}

TEST_CASE("correlated box case matches the rejection oracle") {
  Eigen::Matrix2d S;
  S << 1, 0.9, 0.9, 1;
  const auto t = box_target(Eigen::Vector2d::Zero(), S, 0, 1);
  RngStream rng(3);
  const auto draws = sample_truncnorm(t, kN + 1000, 1000, rng);
  std::mt19937_64 eng(3);
  const auto ref = oracle::truncnorm_rejection(t.mu, S, t.constraints.explicit_rows().A, t.constraints.explicit_rows().b,
                                               kN, eng);
  for (int k = 0; k < 2; ++k) {
    CHECK(means_agree(oracle::column(draws, k), oracle::column(ref, k)));
    CHECK(means_agree(products(draws, k, k), products(ref, k, k)));
  }
  CHECK(means_agree(products(draws, 0, 1), products(ref, 0, 1)));
}

TEST_CASE("five random instances match the rejection oracle") {
  std::mt19937_64 eng(44);
  std::normal_distribution<double> Z;
  for (int inst = 0; inst < 5; ++inst) {
    const int K = inst < 3 ? 2 : 3;
    Eigen::MatrixXd B(K, K);
    for (int i = 0; i < K * K; ++i) B.data()[i] = Z(eng);
    const Eigen::MatrixXd S = B * B.transpose() / K + 0.3 * Eigen::MatrixXd::Identity(K, K);
    Eigen::VectorXd mu(K);
    for (int k = 0; k < K; ++k) mu(k) = 0.5 * Z(eng);
    Polytope P;
    if (inst % 2 == 0) {
      P = Polytope::box(Eigen::VectorXd::Constant(K, -0.5), Eigen::VectorXd::Constant(K, 1.0));
    } else {
      Eigen::MatrixXd A(2, K);
      for (int i = 0; i < 2 * K; ++i) A.data()[i] = Z(eng);
      // the mean sits inside, so rejection stays cheap
      P = Polytope(A, A * mu + Eigen::VectorXd::Constant(2, 0.3));
    }
    const TruncNormalTarget t{mu, S, P};
    RngStream rng(100 + inst);
    const auto draws = sample_truncnorm(t, 2 * kN + 1000, 1000, rng);
    std::vector<Eigen::VectorXd> thinned;
    for (std::size_t i = 0; i < draws.size(); i += 2) thinned.push_back(draws[i]);
    const Polytope E = P.explicit_rows();
    for (const auto& x : draws) REQUIRE(E.contains(x, 1e-7));
    const auto ref = oracle::truncnorm_rejection(mu, S, E.A, E.b, kN, eng);
    for (int i = 0; i < K; ++i) {
      CHECK(means_agree(oracle::column(thinned, i), oracle::column(ref, i)));
      for (int j = i; j < K; ++j) CHECK(means_agree(products(thinned, i, j), products(ref, i, j)));
    }
  }
}

TEST_CASE("sample_truncnorm argument checks") {
  RngStream rng(5);
  const auto t = box_target(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity(), 0, 1);
  CHECK_THROWS_AS(sample_truncnorm(t, 10, 10, rng), Error);
  CHECK_THROWS_AS(sample_truncnorm(t, 10, -1, rng), Error);
}

TEST_CASE("sweeps stay feasible far from the mean") {
  Eigen::Matrix2d S;
  S << 1, -0.95, -0.95, 1;
  const auto t = box_target(Eigen::Vector2d(-20, 20), S, 0, 1);
  RngStream rng(6);
  const auto draws = sample_truncnorm(t, 2000, 100, rng);
  for (const auto& x : draws) CHECK(t.constraints.contains(x, 1e-7));
}
