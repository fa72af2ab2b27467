#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "mc2/polytope.hpp"
#include "mc2/rng.hpp"

namespace mc2 {

struct GibbsOptions {
  bool random_scan = false;
  // Feasibility is asserted after every sweep.
  double feasibility_tol = 1e-7;
};

// One sweep for the density proportional to exp(-rates'x) on the polytope.
Eigen::VectorXd gibbs_sweep_truncexp(const Polytope& poly, const Eigen::VectorXd& rates, Eigen::VectorXd x,
                                     RngStream& rng, const GibbsOptions& opts = {});

// Same, with the log-density written as exp(m'x). Updates x in place.
void gibbs_sweep_logexp(const Polytope& poly, const Eigen::VectorXd& m, Eigen::VectorXd& x, RngStream& rng,
                        const GibbsOptions& opts = {});

// exp(-sum rates_j x_j) on {x >= 0, sum x <= 1}.
struct SimplexExpTarget {
  Eigen::VectorXd rates;
  bool equal = false;

  int dim() const { return static_cast<int>(rates.size()); }
  void validate() const;
};

SimplexExpTarget make_simplex_target(const Eigen::VectorXd& rates, double equal_tol = kDistinctRateTol);

// Uniform on the solid simplex {r >= 0, sum r <= 1} of dimension d: the first
// d gaps of d sorted uniforms.
Eigen::VectorXd simplex_uniform(int d, RngStream& rng);
// Uniform on the face {r >= 0, sum r = 1} in d coordinates.
Eigen::VectorXd simplex_face_uniform(int d, RngStream& rng);

struct SimplexDraw {
  Eigen::VectorXd x;
  std::size_t trials = 1;
  std::string method;
};

// x = y r with y ~ Gamma(d, rate) on [0, 1] and r uniform on the face.
SimplexDraw kent_equal_lambda_sample(const SimplexExpTarget& target, RngStream& rng);
// Truncated-exponential proposal on the unit cube, accepted when sum x <= 1.
SimplexDraw kent_unequal_lambda_sample(const SimplexExpTarget& target, RngStream& rng,
                                       std::size_t budget = kRejectionBudget);
// Equal-rate proposal at min(rates), thinned by exp(-sum (rate_j - min) x_j).
SimplexDraw kent_gamma_route_sample(const SimplexExpTarget& target, RngStream& rng,
                                    std::size_t budget = kRejectionBudget);

struct SimplexMethodThresholds {
  double low = 0.5;
  double high = 5.0;
};

// Chooses a route by the mean rate.
SimplexDraw sample_simplex_exp(const SimplexExpTarget& target, RngStream& rng,
                               const SimplexMethodThresholds& thr = {});

// P(sum X_j < 1) for independent X_j ~ Exp(rate_j).
double simplex_prob(const SimplexExpTarget& target);
// log of d(rates) = p / prod(rates), the normalizer of exp(-rates'x) on the simplex.
double simplex_log_normalizer(const SimplexExpTarget& target);
double simplex_exp_log_density(const SimplexExpTarget& target, const Eigen::VectorXd& x);

}  // namespace mc2
