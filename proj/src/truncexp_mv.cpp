#include "mc2/truncexp_mv.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "mc2/error.hpp"
#include "mc2/samplers1d.hpp"

namespace mc2 {

void gibbs_sweep_logexp(const Polytope& poly, const Eigen::VectorXd& m, Eigen::VectorXd& x, RngStream& rng,
                        const GibbsOptions& opts) {
  const int K = poly.dim();
  if (x.size() != K || m.size() != K) config_error("gibbs sweep: dimension mismatch");
  const bool has_rows = poly.rows() > 0;
  Eigen::VectorXd Ax = has_rows ? Eigen::VectorXd(poly.A * x) : Eigen::VectorXd();
  Eigen::VectorXd rest;
  for (int step = 0; step < K; ++step) {
    const int k = opts.random_scan ? static_cast<int>(rng.index(K)) : step;
    Interval iv{poly.nonneg[k] ? 0.0 : -kInf, kInf};
    if (has_rows) {
      rest = poly.b - Ax + poly.A.col(k) * x(k);
      iv = conditional_interval(poly.A.col(k), rest, poly.b, poly.nonneg[k]);
    }
    const double xn = iv.lo < iv.hi ? trunc_exp_sample(m(k), iv, rng) : iv.lo;
    if (has_rows) Ax += poly.A.col(k) * (xn - x(k));
    x(k) = xn;
  }
  if (!poly.contains(x, opts.feasibility_tol)) {
    solver_error("gibbs sweep left the polytope (violation " + std::to_string(poly.max_violation(x)) + ")");
  }
}

Eigen::VectorXd gibbs_sweep_truncexp(const Polytope& poly, const Eigen::VectorXd& rates, Eigen::VectorXd x,
                                     RngStream& rng, const GibbsOptions& opts) {
  gibbs_sweep_logexp(poly, -rates, x, rng, opts);
  return x;
}

void SimplexExpTarget::validate() const {
  if (rates.size() < 1) config_error("simplex target: need at least one rate");
  for (Eigen::Index j = 0; j < rates.size(); ++j) {
    if (!(rates(j) >= 0.0) || !std::isfinite(rates(j))) config_error("simplex target: rates must be nonnegative");
  }
}

SimplexExpTarget make_simplex_target(const Eigen::VectorXd& rates, double equal_tol) {
  SimplexExpTarget t{rates, false};
  t.validate();
  const double hi = rates.maxCoeff(), lo = rates.minCoeff();
  t.equal = hi == lo || (hi - lo) / hi < equal_tol;
  return t;
}

Eigen::VectorXd simplex_uniform(int d, RngStream& rng) {
  if (d < 1) config_error("simplex_uniform: dimension must be at least 1");
  std::vector<double> u(d);
  for (auto& v : u) v = rng.uniform();
  std::sort(u.begin(), u.end());
  Eigen::VectorXd r(d);
  double prev = 0.0;
  for (int j = 0; j < d; ++j) {
    r(j) = u[j] - prev;
    prev = u[j];
  }
  return r;
}

Eigen::VectorXd simplex_face_uniform(int d, RngStream& rng) {
  if (d < 1) config_error("simplex_face_uniform: dimension must be at least 1");
  Eigen::VectorXd r(d);
  if (d == 1) {
    r(0) = 1.0;
    return r;
  }
  r.head(d - 1) = simplex_uniform(d - 1, rng);
  r(d - 1) = std::max(0.0, 1.0 - r.head(d - 1).sum());
  return r;
}

namespace {

SimplexDraw equal_draw(double lambda, int d, RngStream& rng) {
  double y;
  if (lambda == 0.0) {
    y = std::pow(rng.uniform(), 1.0 / d);
  } else {
    y = trunc_gamma_ratio_uniforms(static_cast<double>(d), lambda, 1.0, rng);
  }
  return {y * simplex_face_uniform(d, rng), 1, "equal"};
}

}  // namespace

SimplexDraw kent_equal_lambda_sample(const SimplexExpTarget& target, RngStream& rng) {
  target.validate();
  if (!target.equal) config_error("kent_equal_lambda_sample: rates are not equal");
  return equal_draw(target.rates.mean(), target.dim(), rng);
}

SimplexDraw kent_unequal_lambda_sample(const SimplexExpTarget& target, RngStream& rng, std::size_t budget) {
  target.validate();
  const int d = target.dim();
  const Interval unit{0.0, 1.0};
  Eigen::VectorXd x(d);
  for (std::size_t trial = 1; trial <= budget; ++trial) {
    for (int j = 0; j < d; ++j) x(j) = trunc_exp_sample(-target.rates(j), unit, rng);
    if (x.sum() <= 1.0) return {x, trial, "cube"};
  }
  solver_error("kent_unequal_lambda_sample: no acceptance in " + std::to_string(budget) + " trials");
}

SimplexDraw kent_gamma_route_sample(const SimplexExpTarget& target, RngStream& rng, std::size_t budget) {
  target.validate();
  const double lmin = target.rates.minCoeff();
  const Eigen::VectorXd excess = target.rates.array() - lmin;
  for (std::size_t trial = 1; trial <= budget; ++trial) {
    SimplexDraw d = equal_draw(lmin, target.dim(), rng);
    if (rng.uniform() <= std::exp(-excess.dot(d.x))) {
      d.trials = trial;
      d.method = "gamma";
      return d;
    }
  }
  solver_error("kent_gamma_route_sample: no acceptance in " + std::to_string(budget) + " trials");
}

SimplexDraw sample_simplex_exp(const SimplexExpTarget& target, RngStream& rng, const SimplexMethodThresholds& thr) {
  const double mean = target.rates.mean();
  if (mean < thr.low) return kent_unequal_lambda_sample(target, rng);
  if (target.equal) return kent_equal_lambda_sample(target, rng);
  if (mean > thr.high) return kent_unequal_lambda_sample(target, rng);
  return kent_gamma_route_sample(target, rng);
}

double simplex_prob(const SimplexExpTarget& target) {
  target.validate();
  const int d = target.dim();
  if (target.rates.minCoeff() <= 0.0) config_error("simplex_prob: rates must be positive");
  if (target.equal) return boost::math::gamma_p(static_cast<double>(d), target.rates.mean());
  bool distinct = true;
  for (int i = 0; i < d && distinct; ++i) {
    for (int j = i + 1; j < d; ++j) {
      const double a = target.rates(i), b = target.rates(j);
      if (std::abs(a - b) / std::max(a, b) < kDistinctRateTol) {
        distinct = false;
        break;
      }
    }
  }
  if (distinct) {
    std::vector<double> r(target.rates.data(), target.rates.data() + d);
    return expmix_simplex_prob(expmix_from_rates(r));
  }
  // Mixed equal and distinct rates: hypoexponential cdf from the phase-type generator.
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    S(i, i) = -target.rates(i);
    if (i + 1 < d) S(i, i + 1) = target.rates(i);
  }
  const Eigen::MatrixXd E = S.exp();
  return std::clamp(1.0 - E.row(0).sum(), 0.0, 1.0);
}

double simplex_log_normalizer(const SimplexExpTarget& target) {
  target.validate();
  const int d = target.dim();
  if (target.rates.maxCoeff() == 0.0) return -std::lgamma(d + 1.0);
  return std::log(simplex_prob(target)) - target.rates.array().log().sum();
}

double simplex_exp_log_density(const SimplexExpTarget& target, const Eigen::VectorXd& x) {
  if (x.size() != target.dim()) config_error("simplex_exp_log_density: dimension mismatch");
  if (x.minCoeff() < 0.0 || x.sum() > 1.0) return -kInf;
  return -target.rates.dot(x) - simplex_log_normalizer(target);
}

}  // namespace mc2
