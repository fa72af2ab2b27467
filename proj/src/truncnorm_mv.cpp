#include "mc2/truncnorm_mv.hpp"

#include <cmath>
#include <sstream>

#include "mc2/error.hpp"
#include "mc2/samplers1d.hpp"

namespace mc2 {

DecorrelatedSystem decorrelate_with_factor(const Eigen::VectorXd& mu, const Eigen::MatrixXd& L,
                                           const Polytope& constraints) {
  const int K = static_cast<int>(mu.size());
  if (L.rows() != K || L.cols() != K) config_error("decorrelate: factor has wrong size");
  if (constraints.dim() != K && constraints.rows() > 0) config_error("decorrelate: constraint columns do not match mu");
  DecorrelatedSystem sys;
  sys.Qinv = L;
  sys.Q = L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(K, K));
  sys.alpha = sys.Q * mu;
  if (constraints.dim() == K) {
    const Polytope P = constraints.explicit_rows();
    sys.D = P.A * L;
    sys.b = P.b;
  } else {
    sys.D = Eigen::MatrixXd::Zero(0, K);
    sys.b = Eigen::VectorXd::Zero(0);
  }
  return sys;
}

DecorrelatedSystem decorrelate(const TruncNormalTarget& target) {
  const int K = target.dim();
  if (K < 1) config_error("decorrelate: empty mean");
  const Eigen::MatrixXd& S = target.Sigma;
  if (S.rows() != K || S.cols() != K) config_error("decorrelate: Sigma must be " + std::to_string(K) + "x" + std::to_string(K));
  if (!S.allFinite()) config_error("decorrelate: Sigma has non-finite entries");
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + S.cwiseAbs().maxCoeff())) {
    config_error("decorrelate: Sigma is not symmetric");
  }
  const double bound = 1e-10 * S.trace() / K;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (!(min_eig > bound)) {
    std::ostringstream os;
    os << "decorrelate: Sigma is not positive definite (min eigenvalue " << min_eig << " <= " << bound << ")";
    config_error(os.str());
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) config_error("decorrelate: Cholesky factorization failed");
  DecorrelatedSystem sys = decorrelate_with_factor(target.mu, llt.matrixL(), target.constraints);
  const Eigen::MatrixXd check = sys.Q * S * sys.Q.transpose() - Eigen::MatrixXd::Identity(K, K);
  if (check.cwiseAbs().maxCoeff() >= 1e-8) solver_error("decorrelate: Q Sigma Q' deviates from identity");
  return sys;
}

void gibbs_sweep_truncnorm_inplace(const DecorrelatedSystem& sys, Eigen::VectorXd& phi, RngStream& rng) {
  const int K = sys.dim();
  if (phi.size() != K) config_error("gibbs_sweep_truncnorm: dimension mismatch");
  const bool has_rows = sys.D.rows() > 0;
  Eigen::VectorXd Dphi = has_rows ? Eigen::VectorXd(sys.D * phi) : Eigen::VectorXd();
  Eigen::VectorXd rest;
  for (int k = 0; k < K; ++k) {
    Interval iv;
    if (has_rows) {
      rest = sys.b - Dphi + sys.D.col(k) * phi(k);
      iv = conditional_interval(sys.D.col(k), rest, sys.b, false);
    }
    const double v = iv.lo < iv.hi ? trunc_normal_sample(sys.alpha(k), 1.0, iv, rng) : iv.lo;
    if (has_rows) Dphi += sys.D.col(k) * (v - phi(k));
    phi(k) = v;
  }
  if (has_rows) {
    const Eigen::VectorXd r = sys.D * phi - sys.b;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      if (r(i) > 1e-7 * (1.0 + std::abs(sys.b(i)))) solver_error("gibbs_sweep_truncnorm: sweep left the region");
    }
  }
}

Eigen::VectorXd gibbs_sweep_truncnorm(const DecorrelatedSystem& sys, Eigen::VectorXd phi, RngStream& rng) {
  gibbs_sweep_truncnorm_inplace(sys, phi, rng);
  return phi;
}

std::vector<Eigen::VectorXd> sample_truncnorm(const TruncNormalTarget& target, int sweeps, int burnin,
                                              RngStream& rng, const std::optional<Eigen::VectorXd>& start) {
  if (!(sweeps > burnin) || burnin < 0) config_error("sample_truncnorm: need sweeps > burnin >= 0");
  const DecorrelatedSystem sys = decorrelate(target);
  Eigen::VectorXd theta;
  if (target.constraints.rows() > 0 || target.constraints.dim() == target.dim()) {
    const auto hint = start ? start : target.constraints.feasible_point;
    if (hint && target.constraints.contains(*hint)) {
      theta = *hint;
    } else {
      theta = find_interior_point(target.constraints, hint ? hint : std::optional<Eigen::VectorXd>(target.mu));
    }
  } else {
    theta = start ? *start : target.mu;
  }
  Eigen::VectorXd phi = sys.to_phi(theta);
  std::vector<Eigen::VectorXd> out;
  out.reserve(sweeps - burnin);
  for (int s = 0; s < sweeps; ++s) {
    gibbs_sweep_truncnorm_inplace(sys, phi, rng);
    if (s >= burnin) out.push_back(sys.to_theta(phi));
  }
  return out;
}

}  // namespace mc2
