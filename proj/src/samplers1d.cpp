#include "mc2/samplers1d.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

namespace mc2 {

namespace {

const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// log P(Z > z).
double log_upper_tail(double z) {
  if (z == kInf) return -kInf;
  if (z < 30.0) return std::log(0.5 * std::erfc(z / std::sqrt(2.0)));
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -0.5 * z2 - std::log(z * std::sqrt(2.0 * M_PI)) + std::log(series);
}

double upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double upper_tail_inverse(double p) {
  return boost::math::quantile(boost::math::complement(kStdNormal, p));
}

// Standard normal restricted to [a, b] with a < b.
double std_trunc_normal(double a, double b, RngStream& rng) {
  if (b <= 0.0) return -std_trunc_normal(-b, -a, rng);
  const double log_mass = std_normal_log_mass(a, b);
  if (log_mass < kTruncNormalMinLogMass) {
    solver_error("trunc_normal_sample: interval [" + num(a) + ", " + num(b) +
                 "] (standardized) has log-mass " + num(log_mass) + " below the bound " +
                 num(kTruncNormalMinLogMass));
  }
  if (log_mass >= std::log(kTruncNormalInverseMass)) {
    const double u = rng.uniform();
    double z;
    if (a >= 0.0) {
      const double qa = upper_tail(a), qb = upper_tail(b);
      z = upper_tail_inverse(qa - u * (qa - qb));
    } else {
      const double pa = boost::math::cdf(kStdNormal, a), pb = boost::math::cdf(kStdNormal, b);
      z = boost::math::quantile(kStdNormal, pa + u * (pb - pa));
    }
    return std::clamp(z, a, b);
  }
  if (a < 0.0) {
    // Tiny interval straddling zero.
    for (std::size_t i = 0; i < kRejectionBudget; ++i) {
      const double z = rng.uniform(a, b);
      if (rng.uniform() <= std::exp(-0.5 * z * z)) return z;
    }
  } else {
    const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
    const bool exp_proposal = (b - a) * lambda > 1.0;
    for (std::size_t i = 0; i < kRejectionBudget; ++i) {
      if (exp_proposal) {
        const double z = a + rng.exponential(lambda);
        if (z > b) continue;
        if (rng.uniform() <= std::exp(-0.5 * (z - lambda) * (z - lambda))) return z;
      } else {
        const double z = rng.uniform(a, b);
        if (rng.uniform() <= std::exp(0.5 * (a * a - z * z))) return z;
      }
    }
  }
  solver_error("trunc_normal_sample: rejection budget exhausted on [" + num(a) + ", " + num(b) +
               "] (standardized)");
}

}  // namespace

std::string Interval::str() const { return "[" + num(lo) + ", " + num(hi) + "]"; }

double trunc_exp_inverse_cdf(double m, const Interval& iv, double u) {
  if (!(u >= 0.0 && u <= 1.0)) config_error("trunc_exp_inverse_cdf: u = " + num(u) + " outside [0, 1]");
  if (!(iv.lo < iv.hi)) config_error("trunc_exp_inverse_cdf: empty interval " + iv.str());
  if (m == 0.0) {
    if (!iv.bounded()) config_error("trunc_exp_inverse_cdf: m = 0 needs a bounded interval, got " + iv.str());
    return std::clamp(iv.lo + u * (iv.hi - iv.lo), iv.lo, iv.hi);
  }
  if (m < 0.0) return -trunc_exp_inverse_cdf(-m, Interval{-iv.hi, -iv.lo}, 1.0 - u);
  if (iv.hi == kInf) {
    config_error("trunc_exp_inverse_cdf: density exp(" + num(m) + " x) is not normalizable on " + iv.str());
  }
  if (iv.lo == -kInf) return u == 0.0 ? -kInf : iv.hi + std::log(u) / m;
  const double d = m * (iv.lo - iv.hi);
  double x;
  if (d >= -30.0) {
    x = iv.hi + std::log1p((1.0 - u) * std::expm1(d)) / m;
  } else {
    const double lu = u > 0.0 ? std::log(u) : -kInf;
    const double lv = u < 1.0 ? std::log1p(-u) + d : -kInf;
    x = iv.hi + log_add(lu, lv) / m;
  }
  return std::clamp(x, iv.lo, iv.hi);
}

double trunc_exp_sample(double m, const Interval& iv, RngStream& rng) {
  return trunc_exp_inverse_cdf(m, iv, rng.uniform());
}

double trunc_exp_log_normalizer(double m, const Interval& iv) {
  if (!(iv.lo < iv.hi)) config_error("trunc_exp_log_normalizer: empty interval " + iv.str());
  if (m == 0.0) {
    if (!iv.bounded()) config_error("trunc_exp_log_normalizer: m = 0 on unbounded " + iv.str());
    return std::log(iv.hi - iv.lo);
  }
  if (m < 0.0) return trunc_exp_log_normalizer(-m, Interval{-iv.hi, -iv.lo});
  if (iv.hi == kInf) {
    config_error("trunc_exp_log_normalizer: exp(" + num(m) + " x) not normalizable on " + iv.str());
  }
  if (iv.lo == -kInf) return m * iv.hi - std::log(m);
  return m * iv.hi + std::log(-std::expm1(m * (iv.lo - iv.hi))) - std::log(m);
}

double trunc_exp_log_density(double m, const Interval& iv, double x) {
  if (!iv.contains(x)) return -kInf;
  return m * x - trunc_exp_log_normalizer(m, iv);
}

double std_normal_log_mass(double lo, double hi) {
  if (!(lo < hi)) return -kInf;
  if (hi <= 0.0) return std_normal_log_mass(-hi, -lo);
  if (lo >= 0.0) {
    const double la = log_upper_tail(lo), lb = log_upper_tail(hi);
    if (lb == -kInf) return la;
    return la + std::log1p(-std::exp(lb - la));
  }
  return std::log1p(-(upper_tail(hi) + upper_tail(-lo)));
}

double trunc_normal_sample(double mean, double sd, const Interval& iv, RngStream& rng) {
  if (!(sd > 0.0) || !std::isfinite(sd)) config_error("trunc_normal_sample: sd = " + num(sd) + " must be positive");
  if (!(iv.lo < iv.hi)) config_error("trunc_normal_sample: degenerate interval " + iv.str());
  const double a = (iv.lo - mean) / sd;
  const double b = (iv.hi - mean) / sd;
  if (!(a < b)) config_error("trunc_normal_sample: degenerate interval " + iv.str());
  const double z = std_trunc_normal(a, b, rng);
  return std::clamp(mean + sd * z, iv.lo, iv.hi);
}

double trunc_gamma_ratio_uniforms(double shape, double rate, double upper, RngStream& rng) {
  if (!(shape >= 1.0)) config_error("trunc_gamma_ratio_uniforms: shape = " + num(shape) + " < 1");
  if (!(rate > 0.0) || !std::isfinite(rate)) config_error("trunc_gamma_ratio_uniforms: rate must be positive");
  if (!(upper > 0.0)) config_error("trunc_gamma_ratio_uniforms: upper must be positive");
  if (!std::isfinite(upper)) config_error("trunc_gamma_ratio_uniforms: upper must be finite");

  // Work with x = rate * y on [0, L], density g(x) = x^(a-1) exp(-x).
  const double L = rate * upper;
  const double a = shape;
  const double s = std::min(a, L);
  auto log_g = [a](double x) {
    if (x <= 0.0) return a == 1.0 ? 0.0 : -kInf;
    return (a - 1.0) * std::log(x) - x;
  };
  const double mode = std::min(a - 1.0, L);
  const double log_gmax = log_g(mode);

  // Extremes of (x - s) sqrt(g(x)) solve x^2 - (1 + a + s) x + (a - 1) s = 0.
  const double p = 1.0 + a + s;
  const double disc = std::sqrt(std::max(0.0, p * p - 4.0 * (a - 1.0) * s));
  const double r1 = 0.5 * (p - disc);
  const double r2 = 0.5 * (p + disc);
  auto vfun = [&](double x) { return (x - s) * std::exp(0.5 * (log_g(x) - log_gmax)); };
  double v_minus = std::min(vfun(0.0), 0.0);
  if (r1 > 0.0 && r1 < s) v_minus = std::min(v_minus, vfun(r1));
  double v_plus = std::max(vfun(L), 0.0);
  if (r2 > s && r2 < L) v_plus = std::max(v_plus, vfun(r2));
  if (!(v_plus > v_minus)) solver_error("trunc_gamma_ratio_uniforms: degenerate envelope");

  for (std::size_t i = 0; i < kRejectionBudget; ++i) {
    const double u = rng.uniform_open();
    const double v = v_minus + (v_plus - v_minus) * rng.uniform();
    const double x = v / u + s;
    if (x < 0.0 || x > L) continue;
    if (2.0 * std::log(u) <= log_g(x) - log_gmax) return std::min(x / rate, upper);
  }
  solver_error("trunc_gamma_ratio_uniforms: rejection budget exhausted (shape " + num(shape) + ", rate " +
               num(rate) + ", upper " + num(upper) + ")");
}

VaduvaDraw cdf_tilted_exp_sample(double q, double b, RngStream& rng) {
  if (!(q > 0.0) || !(b > 0.0) || !std::isfinite(b)) config_error("cdf_tilted_exp_sample: need q > 0 and finite b > 0");
  const Interval iv{0.0, b};
  auto d = vaduva_sample([&](RngStream& r) { return trunc_exp_sample(1.0, iv, r); },
                         [&](RngStream& r) { return r.exponential(q); }, rng);
  return {b - d.value, d.trials};
}

double ExpMixture::cdf(double y) const {
  if (!(y > 0.0)) return 0.0;
  if (y == kInf) return 1.0;
  double f = 0.0;
  for (std::size_t j = 0; j < rates.size(); ++j) f += weights[j] * -std::expm1(-rates[j] * y);
  return std::clamp(f, 0.0, 1.0);
}

ExpMixture expmix_from_rates(const std::vector<double>& rates) {
  if (rates.empty()) config_error("expmix_from_rates: no rates");
  for (double r : rates) {
    if (!(r > 0.0) || !std::isfinite(r)) config_error("expmix_from_rates: rate " + num(r) + " is not positive");
  }
  for (std::size_t i = 0; i < rates.size(); ++i) {
    for (std::size_t j = i + 1; j < rates.size(); ++j) {
      if (std::abs(rates[i] - rates[j]) / std::max(rates[i], rates[j]) < kDistinctRateTol) {
        config_error("expmix_from_rates: rates " + num(rates[i]) + " and " + num(rates[j]) +
                     " are not distinct; use the equal-rate route");
      }
    }
  }
  ExpMixture mix;
  mix.rates = rates;
  mix.weights.resize(rates.size());
  double sum = 0.0, abs_sum = 0.0;
  for (std::size_t j = 0; j < rates.size(); ++j) {
    double a = 1.0;
    for (std::size_t i = 0; i < rates.size(); ++i) {
      if (i != j) a *= rates[i] / (rates[i] - rates[j]);
    }
    mix.weights[j] = a;
    sum += a;
    abs_sum += std::abs(a);
  }
  if (std::abs(sum - 1.0) > 1e-9 * std::max(1.0, abs_sum)) {
    solver_error("expmix_from_rates: partial-fraction weights sum to " + num(sum));
  }
  return mix;
}

double expmix_simplex_prob(const ExpMixture& mix) { return mix.cdf(1.0); }

double expmix_quantile(const ExpMixture& mix, double u) {
  if (!(u >= 0.0 && u <= 1.0)) config_error("expmix_quantile: u outside [0, 1]");
  if (u == 0.0) return 0.0;
  if (u == 1.0) return kInf;
  double lo = 0.0;
  double hi = 1.0 / *std::min_element(mix.rates.begin(), mix.rates.end());
  int doublings = 0;
  while (mix.cdf(hi) < u) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 1100) solver_error("expmix_quantile: could not bracket u = " + num(u));
  }
  for (int it = 0; it < 400 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (mix.cdf(mid) < u ? lo : hi) = mid;
  }
  if (hi - lo > 1e-12 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi) {
    solver_error("expmix_quantile: bisection did not converge");
  }
  return 0.5 * (lo + hi);
}

double expmix_sample(const ExpMixture& mix, RngStream& rng) { return expmix_quantile(mix, rng.uniform()); }

}  // namespace mc2
