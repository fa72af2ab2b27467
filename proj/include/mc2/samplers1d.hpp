#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "mc2/error.hpp"
#include "mc2/rng.hpp"

namespace mc2 {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
  double lo = -kInf;
  double hi = kInf;

  bool contains(double x) const { return x >= lo && x <= hi; }
  double width() const { return hi - lo; }
  bool bounded() const { return lo > -kInf && hi < kInf; }
  std::string str() const;
};

// Truncated exponential. Density is proportional to exp(m x) on (a, t);
// m is the coefficient of x in the log-density, so m < 0 is a decaying rate.
double trunc_exp_inverse_cdf(double m, const Interval& iv, double u);
double trunc_exp_sample(double m, const Interval& iv, RngStream& rng);
// log of the integral of exp(m x) over the interval.
double trunc_exp_log_normalizer(double m, const Interval& iv);
// log-density of the normalized truncated exponential; -inf outside.
double trunc_exp_log_density(double m, const Interval& iv, double x);

// Truncated normal. Inverse cdf when the interval mass is at least
// kTruncNormalInverseMass, exponential-envelope rejection in the far tails.
inline constexpr double kTruncNormalInverseMass = 1e-12;
inline constexpr double kTruncNormalMinLogMass = -690.0;  // about 1e-300
double trunc_normal_sample(double mean, double sd, const Interval& iv, RngStream& rng);
// log P(lo < Z < hi) for standard normal Z, accurate in the tails.
double std_normal_log_mass(double lo, double hi);

// Gamma(shape, rate) restricted to [0, upper] by the ratio-of-uniforms method
// with the location shift x - min(shape, rate * upper).
double trunc_gamma_ratio_uniforms(double shape, double rate, double upper, RngStream& rng);

inline constexpr std::size_t kRejectionBudget = 1000000;

struct VaduvaDraw {
  double value;
  std::size_t trials;
};

// Draws X ~ f and Y ~ F until X >= Y; the accepted X has density
// proportional to f(x) F(x). F_sampler may return -inf (F == 1).
template <class FSampler, class CdfSampler>
VaduvaDraw vaduva_sample(FSampler&& f_sampler, CdfSampler&& F_sampler, RngStream& rng,
                         std::size_t budget = kRejectionBudget) {
  for (std::size_t trial = 1; trial <= budget; ++trial) {
    const double x = f_sampler(rng);
    const double y = F_sampler(rng);
    if (x >= y) return {x, trial};
  }
  solver_error("vaduva_sample: no acceptance in " + std::to_string(budget) +
               " trials (observed acceptance rate < " + std::to_string(1.0 / budget) + ")");
}

// p(z) proportional to exp(-z) (1 - exp(-q (b - z))) on (0, b), via Vaduva on
// the reflected variable w = b - z: f = exp(w) on (0, b), F = Exp(q) cdf.
VaduvaDraw cdf_tilted_exp_sample(double q, double b, RngStream& rng);

// Sum of independent Exp(rate_j) with distinct rates:
// F(y) = sum_j a_j (1 - exp(-rate_j y)), a_j = prod_{i != j} rate_i / (rate_i - rate_j).
struct ExpMixture {
  std::vector<double> weights;
  std::vector<double> rates;

  std::size_t size() const { return rates.size(); }
  double cdf(double y) const;
};

inline constexpr double kDistinctRateTol = 1e-6;

ExpMixture expmix_from_rates(const std::vector<double>& rates);
double expmix_simplex_prob(const ExpMixture& mix);
double expmix_sample(const ExpMixture& mix, RngStream& rng);
double expmix_quantile(const ExpMixture& mix, double u);

}  // namespace mc2
