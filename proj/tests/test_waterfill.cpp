#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "mc2/error.hpp"
#include "mc2/stats.hpp"
#include "mc2/waterfill.hpp"

using namespace mc2;

namespace {

constexpr int kReps = 100000;

double root_residual(const std::vector<double>& q, std::size_t N, double alpha) {
  double s = 0.0;
  for (double w : q) s += std::min(alpha * w, 1.0);
  return s - static_cast<double>(N);
}

struct Replicated {
  std::vector<double> mean_Q;
  std::vector<double> se_Q;
  double mse = 0.0;
  double mse_se = 0.0;
};

template <class Collapse>
Replicated replicate(const std::vector<double>& q, Collapse&& fn) {
  const std::size_t M = q.size();
  std::vector<std::vector<double>> Q(M);
  std::vector<double> sq;
  for (int r = 0; r < kReps; ++r) {
    const std::vector<double> d = fn().dense(M);
    double s = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      Q[j].push_back(d[j]);
      s += (d[j] - q[j]) * (d[j] - q[j]);
    }
    sq.push_back(s);
  }
  Replicated out;
  for (std::size_t j = 0; j < M; ++j) {
    out.mean_Q.push_back(mean(Q[j]));
    out.se_Q.push_back(std::sqrt(variance(Q[j]) / kReps));
  }
  out.mse = mean(sq);
  out.mse_se = std::sqrt(variance(sq) / kReps);
  return out;
}

}  // namespace

TEST_CASE("solve_alpha on the three-particle example") {
  const std::vector<double> q = {0.7, 0.2, 0.1};
  // 1 + 0.3 alpha = 2
  CHECK(solve_alpha(q, 2) == doctest::Approx(10.0 / 3.0).epsilon(1e-14));
  CHECK(std::abs(root_residual(q, 2, solve_alpha(q, 2))) < 1e-12);
}

TEST_CASE("solve_alpha with N = M keeps every particle") {
  const std::vector<double> q = {0.5, 0.3, 0.15, 0.05};
  const double a = solve_alpha(q, 4);
  CHECK(a * 0.05 >= 1.0 - 1e-12);
  RngStream rng(1);
  const auto cs = collapse(ParticleSet{q}, 4, rng);
  REQUIRE(cs.indices.size() == 4);
  for (std::size_t j = 0; j < 4; ++j) CHECK(cs.weights[j] == q[j]);
}

TEST_CASE("two particles collapsed to one reduce to Barker") {
  const std::vector<double> q = {0.35, 0.65};
  CHECK(1.0 / solve_alpha(q, 1) == doctest::Approx(1.0).epsilon(1e-14));
  RngStream rng(2);
  double first = 0.0;
  for (int r = 0; r < kReps; ++r) {
    const auto cs = collapse(ParticleSet{q}, 1, rng);
    REQUIRE(cs.indices.size() == 1);
    CHECK(cs.weights[0] == doctest::Approx(1.0));
    first += cs.indices[0] == 0;
  }
  // survivor chosen with probability q_j
  CHECK(std::abs(first / kReps - 0.35) < 3.0 * std::sqrt(0.35 * 0.65 / kReps));
}

TEST_CASE("uniform weights give alpha = N") {
  const std::vector<double> q(100, 0.01);
  CHECK(solve_alpha(q, 10) == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("solve_alpha is exact on random weights for every N") {
  std::mt19937_64 eng(3);
  std::exponential_distribution<double> E(1.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> q(3 + rep);
    for (auto& w : q) w = std::pow(E(eng), 3.0);
    const double s = std::accumulate(q.begin(), q.end(), 0.0);
    for (auto& w : q) w /= s;
    for (std::size_t N = 1; N <= q.size(); ++N) CHECK(std::abs(root_residual(q, N, solve_alpha(q, N))) < 1e-10);
  }
}

TEST_CASE("solve_alpha drops zero weights and checks N") {
  const std::vector<double> q = {0.5, 0.0, 0.5, 0.0};
  CHECK(solve_alpha(q, 2) >= 2.0);
  CHECK_THROWS_AS(solve_alpha(q, 3), Error);
  CHECK_THROWS_AS(solve_alpha(q, 0), Error);
  RngStream rng(4);
  CHECK_THROWS_AS(collapse(ParticleSet{{0.5, 0.6}}, 1, rng), Error);
  CHECK_THROWS_AS(collapse(ParticleSet{{1.5, -0.5}}, 1, rng), Error);
}

TEST_CASE("collapse of (0.7, 0.2, 0.1) to two particles") {
  const std::vector<double> q = {0.7, 0.2, 0.1};
  RngStream rng(5);
  double keep2 = 0.0;
  const auto rep = replicate(q, [&] {
    const auto cs = collapse(ParticleSet{q}, 2, rng);
    REQUIRE(cs.indices.size() == 2);
    CHECK(cs.indices[0] == 0);
    CHECK(cs.weights[0] == 0.7);
    CHECK(cs.weights[1] == doctest::Approx(0.3).epsilon(1e-14));
    keep2 += cs.indices[1] == 1;
    return cs;
  });
  CHECK(std::abs(keep2 / kReps - 2.0 / 3.0) < 3.0 * std::sqrt(2.0 / 9.0 / kReps));
  for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(rep.mean_Q[j] - q[j]) <= 3.0 * rep.se_Q[j] + 1e-10);
  // 0.2^2 (3/2 - 1) + 0.1^2 (3 - 1)
  const double closed = 0.04;
  CHECK(waterfill_mse(q, 2) == doctest::Approx(closed).epsilon(1e-12));
  CHECK(std::abs(rep.mse - closed) < 3.0 * rep.mse_se);

  RngStream rng2(6);
  const auto multi = replicate(q, [&] { return multinomial_resample(ParticleSet{q}, 2, rng2); });
  // sum q_j (1 - q_j) / N
  CHECK(std::abs(multi.mse - 0.23) < 3.0 * multi.mse_se);
  CHECK(rep.mse <= multi.mse);
}

TEST_CASE("estimate_functional") {
  const std::vector<double> q = {0.7, 0.2, 0.1};
  RngStream rng(7);
  std::vector<double> ones;
  for (int r = 0; r < 10000; ++r) {
    const auto cs = collapse(ParticleSet{q}, 2, rng);
    CHECK(estimate_functional(cs, {1.0, 0.0, 0.0}) == 0.7);
    ones.push_back(estimate_functional(cs, {1.0, 1.0, 1.0}));
  }
  CHECK(mean(ones) == doctest::Approx(1.0).epsilon(0.01));
  const auto cs = collapse(ParticleSet{q}, 2, rng);
  CHECK_THROWS_AS(estimate_functional(cs, {1.0}), Error);
}

TEST_CASE("unbiased functional estimate on ten particles") {
  std::mt19937_64 eng(8);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> q(10), f(10);
  for (auto& w : q) w = U(eng) * U(eng);
  const double s = std::accumulate(q.begin(), q.end(), 0.0);
  for (auto& w : q) w /= s;
  for (auto& v : f) v = 10.0 * U(eng) - 3.0;
  double exact = 0.0;
  for (int j = 0; j < 10; ++j) exact += f[j] * q[j];
  RngStream rng(8);
  std::vector<double> est;
  const double alpha = solve_alpha(q, 4);
  const auto rep = replicate(q, [&] {
    const auto cs = collapse(ParticleSet{q}, 4, rng);
    REQUIRE(cs.indices.size() <= 4);
    for (std::size_t i = 0; i < cs.indices.size(); ++i) {
      if (alpha * q[cs.indices[i]] >= 1.0) CHECK(cs.weights[i] == q[cs.indices[i]]);
    }
    est.push_back(estimate_functional(cs, f));
    return cs;
  });
  CHECK(std::abs(mean(est) - exact) < 3.0 * std::sqrt(variance(est) / est.size()));
  for (std::size_t j = 0; j < 10; ++j) CHECK(std::abs(rep.mean_Q[j] - q[j]) <= 3.0 * rep.se_Q[j] + 1e-10);
  CHECK(std::abs(rep.mse - waterfill_mse(q, 4)) < 3.0 * rep.mse_se);
}

TEST_CASE("winners always survive on random sets") {
  std::mt19937_64 eng(9);
  std::exponential_distribution<double> E(1.0);
  RngStream rng(9);
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<double> q(20);
    for (auto& w : q) w = std::pow(E(eng), 4.0);
    const double s = std::accumulate(q.begin(), q.end(), 0.0);
    for (auto& w : q) w /= s;
    const std::size_t N = 1 + rep % 15;
    const double alpha = solve_alpha(q, N);
    const auto d = collapse(ParticleSet{q}, N, rng).dense(q.size());
    std::size_t alive = 0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      alive += d[j] > 0.0;
      if (alpha * q[j] >= 1.0) CHECK(d[j] == q[j]);
      else CHECK((d[j] == 0.0 || std::abs(d[j] - 1.0 / alpha) < 1e-12));
    }
    CHECK(alive == N);
  }
}

TEST_CASE("collapse_generations keeps at most N normalized particles") {
  RngStream rng(10);
  const auto q = collapse_generations(
      ParticleSet{{0.25, 0.25, 0.25, 0.25}}, 4, 6,
      [](std::size_t, RngStream& r) { return GenerationStep{{r.uniform(), r.uniform(), r.uniform()}}; }, rng);
  CHECK(q.size() <= 4);
  CHECK(std::accumulate(q.begin(), q.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}
