#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mc2/polytope.hpp"
#include "mc2/rng.hpp"

namespace mc2 {

// N(mu, Sigma) restricted to {theta : A theta <= b}.
struct TruncNormalTarget {
  Eigen::VectorXd mu;
  Eigen::MatrixXd Sigma;
  Polytope constraints;

  int dim() const { return static_cast<int>(mu.size()); }
};

// phi = Q theta with Q Sigma Q' = I. Q = L^{-1} for Sigma = L L'.
// Constraints become D phi <= b with D = A L; the target is N(alpha, I).
struct DecorrelatedSystem {
  Eigen::MatrixXd Q;
  Eigen::MatrixXd Qinv;
  Eigen::MatrixXd D;
  Eigen::VectorXd b;
  Eigen::VectorXd alpha;

  int dim() const { return static_cast<int>(alpha.size()); }
  Eigen::VectorXd to_theta(const Eigen::VectorXd& phi) const { return Qinv * phi; }
  Eigen::VectorXd to_phi(const Eigen::VectorXd& theta) const { return Q * theta; }
};

DecorrelatedSystem decorrelate(const TruncNormalTarget& target);
// Same, reusing a Cholesky factor of Sigma (lower triangular).
DecorrelatedSystem decorrelate_with_factor(const Eigen::VectorXd& mu, const Eigen::MatrixXd& L,
                                           const Polytope& constraints);

void gibbs_sweep_truncnorm_inplace(const DecorrelatedSystem& sys, Eigen::VectorXd& phi, RngStream& rng);
Eigen::VectorXd gibbs_sweep_truncnorm(const DecorrelatedSystem& sys, Eigen::VectorXd phi, RngStream& rng);

// Returns sweeps - burnin theta draws. The start defaults to an interior point.
std::vector<Eigen::VectorXd> sample_truncnorm(const TruncNormalTarget& target, int sweeps, int burnin,
                                              RngStream& rng,
                                              const std::optional<Eigen::VectorXd>& start = std::nullopt);

}  // namespace mc2
