#include <algorithm>
#include <cmath>
#include <string>

#include "mc2/error.hpp"
#include "mc2/samplers1d.hpp"
#include "mc2/slice.hpp"
#include "mc2/stochprog.hpp"
#include "mc2/truncexp_mv.hpp"
#include "mc2/truncnorm_mv.hpp"

namespace mc2 {

namespace {

constexpr int kCopyInitBudget = 10000;

std::vector<std::string> x_names(int n) {
  std::vector<std::string> names;
  for (int k = 0; k < n; ++k) names.push_back("x" + std::to_string(k + 1));
  return names;
}

double sd_of(const std::vector<double>& v) { return v.size() > 1 ? std::sqrt(variance(v)) : 0.0; }

}  // namespace

OneStageResult one_stage_mcmc(const OneStageProblem& prob, const OneStageOptions& opts, RngStream& rng,
                              const std::optional<Eigen::VectorXd>& start) {
  if (!prob.payoff || !prob.scenario) config_error("one_stage: payoff and scenario sampler are required");
  prob.domain.validate();
  if (!is_bounded(prob.domain)) config_error("one_stage: decision domain must be bounded");
  if (prob.J_ladder.empty()) config_error("one_stage: empty J ladder");
  for (std::size_t l = 0; l < prob.J_ladder.size(); ++l) {
    if (prob.J_ladder[l] < 1 || (l > 0 && prob.J_ladder[l] <= prob.J_ladder[l - 1])) {
      config_error("one_stage: J ladder must be positive and increasing");
    }
  }
  if (opts.sweeps < 1 || opts.burnin_fraction < 0.0 || opts.burnin_fraction >= 1.0) {
    config_error("one_stage: need sweeps >= 1 and burnin_fraction in [0, 1)");
  }

  const int n = prob.domain.dim();
  Eigen::VectorXd x = find_interior_point(prob.domain, start);
  std::vector<Eigen::VectorXd> omega;
  std::vector<double> logG;
  auto log_payoff = [&](const Eigen::VectorXd& w, const Eigen::VectorXd& xx) {
    const double g = prob.payoff(w, xx);
    return g > 0.0 ? std::log(g) : -kInf;
  };

  OneStageResult res;
  res.trace.names = x_names(n);
  res.trace.sense = Sense::Maximize;
  res.trace.seed = rng.seed();
  res.trace.stream = rng.stream();
  long proposals = 0, accepted = 0;

  for (int lvl = 0; lvl < static_cast<int>(prob.J_ladder.size()); ++lvl) {
    const int J = prob.J_ladder[lvl];
    while (static_cast<int>(omega.size()) < J) {
      int tries = 0;
      Eigen::VectorXd w;
      double lg = -kInf;
      while (!std::isfinite(lg)) {
        if (++tries > kCopyInitBudget) infeasible_error("one_stage: payoff is not positive at the start point");
        w = prob.scenario(rng);
        lg = log_payoff(w, x);
      }
      omega.push_back(w);
      logG.push_back(lg);
    }
    const int burn = static_cast<int>(opts.burnin_fraction * opts.sweeps);
    std::vector<double> kept_x1;
    long lvl_prop = 0, lvl_acc = 0;
    for (int it = 0; it < opts.sweeps; ++it) {
      for (int j = 0; j < J; ++j) {
        const Eigen::VectorXd cand = prob.scenario(rng);
        const double lc = log_payoff(cand, x);
        ++lvl_prop;
        if (std::isfinite(lc) && std::log(rng.uniform_open()) < lc - logG[j]) {
          omega[j] = cand;
          logG[j] = lc;
          ++lvl_acc;
        }
      }
      // Slice on sum_j log G(omega_j, x).
      double total = 0.0;
      for (int j = 0; j < J; ++j) total += logG[j];
      const double level = total - rng.exponential(1.0);
      for (int k = 0; k < n; ++k) {
        const Interval iv = gibbs_conditional_bounds(prob.domain, x, k);
        Eigen::VectorXd y = x;
        auto inside = [&](double t) {
          y(k) = t;
          double s = 0.0;
          for (int j = 0; j < J; ++j) {
            s += log_payoff(omega[j], y);
            if (!std::isfinite(s)) return false;
          }
          return s >= level;
        };
        x(k) = slice_shrink_sample(inside, x(k), iv, rng);
      }
      double value = 0.0;
      for (int j = 0; j < J; ++j) {
        logG[j] = log_payoff(omega[j], x);
        value += std::exp(logG[j]);
      }
      const bool is_burn = it < burn;
      res.trace.push(x, value / J, J, lvl, is_burn);
      if (!is_burn) kept_x1.push_back(x(0));
    }
    proposals += lvl_prop;
    accepted += lvl_acc;
    res.trace.close_level(lvl, J, lvl_prop ? static_cast<double>(lvl_acc) / lvl_prop : 1.0);
    res.x_sd.push_back(sd_of(kept_x1));
  }
  res.x_hat = mode_estimate(res.trace, ModeMethod::ErgodicMean);
  res.omega_acceptance = proposals ? static_cast<double>(accepted) / proposals : 1.0;
  return res;
}

void PortfolioInstance::validate() const {
  const int d = n();
  if (d < 1) config_error("portfolio: mu must be nonempty");
  if (d > max_assets) config_error("portfolio: n = " + std::to_string(d) + " exceeds the cap " + std::to_string(max_assets));
  if (Sigma.rows() != d || Sigma.cols() != d) config_error("portfolio: Sigma must be n x n");
  if (lo.size() != d || hi.size() != d) config_error("portfolio: box bounds must have length n");
  if (!(gamma > 0.0)) config_error("portfolio: gamma must be positive");
  if (!(K > 0.0)) config_error("portfolio: K must be positive");
  if (J < 1) config_error("portfolio: J must be at least 1");
  for (int k = 0; k < d; ++k) {
    if (!(lo(k) < hi(k))) config_error("portfolio: box needs lo < hi");
  }
  if (!Sigma.isApprox(Sigma.transpose(), 1e-12)) config_error("portfolio: Sigma must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(Sigma);
  if (llt.info() != Eigen::Success) config_error("portfolio: Sigma must be positive definite");
}

Eigen::VectorXd PortfolioInstance::analytic_optimum() const { return Sigma.llt().solve(mu) / gamma; }

double PortfolioInstance::payoff(const Eigen::VectorXd& r, const Eigen::VectorXd& x) const {
  return K - std::exp(-gamma * (r.dot(x) + rf));
}

PortfolioResult portfolio_mcmc(const PortfolioInstance& inst, int sweeps, RngStream& rng, double burnin_fraction) {
  inst.validate();
  if (sweeps < 1 || burnin_fraction < 0.0 || burnin_fraction >= 1.0) {
    config_error("portfolio: need sweeps >= 1 and burnin_fraction in [0, 1)");
  }
  const int n = inst.n(), J = inst.J;
  const double w_lo = -std::log(inst.K) / inst.gamma;

  Eigen::VectorXd x(n);
  for (int k = 0; k < n; ++k) x(k) = std::clamp(0.0, inst.lo(k), inst.hi(k));
  if (!(inst.payoff(inst.mu, x) > 0.0)) {
    infeasible_error("portfolio: G(mu, x0) <= 0; increase K");
  }

  const Eigen::MatrixXd L = inst.Sigma.llt().matrixL();
  DecorrelatedSystem sys;
  sys.Qinv = L;
  sys.Q = L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
  sys.alpha = sys.Q * inst.mu;
  sys.D.resize(1, n);
  sys.b.resize(1);

  std::vector<Eigen::VectorXd> r(J, inst.mu);
  std::vector<double> w(J, 0.0);

  // Box rows are fixed; the J half-space rows are refreshed every sweep.
  Polytope xpoly;
  xpoly.A = Eigen::MatrixXd::Zero(J + 2 * n, n);
  xpoly.b = Eigen::VectorXd::Zero(J + 2 * n);
  xpoly.nonneg.assign(n, false);
  for (int k = 0; k < n; ++k) {
    xpoly.A(J + k, k) = 1.0;
    xpoly.b(J + k) = inst.hi(k);
    xpoly.A(J + n + k, k) = -1.0;
    xpoly.b(J + n + k) = -inst.lo(k);
  }

  PortfolioResult res;
  res.trace.names = x_names(n);
  res.trace.sense = Sense::Maximize;
  res.trace.seed = rng.seed();
  res.trace.stream = rng.stream();
  const int burn = static_cast<int>(burnin_fraction * sweeps);
  const Eigen::VectorXd zero_m = Eigen::VectorXd::Zero(n);

  for (int it = 0; it < sweeps; ++it) {
    for (int j = 0; j < J; ++j) {
      const double top = r[j].dot(x) + inst.rf;
      if (!(top > w_lo)) solver_error("portfolio: w interval is empty; increase K");
      w[j] = trunc_exp_sample(-inst.gamma, Interval{w_lo, top}, rng);
      // r_j ~ N(mu, Sigma) restricted to -x'r <= rf - w_j.
      sys.D = -(x.transpose() * L);
      sys.b(0) = inst.rf - w[j];
      Eigen::VectorXd phi = sys.Q * r[j];
      gibbs_sweep_truncnorm_inplace(sys, phi, rng);
      r[j] = sys.to_theta(phi);
    }
    for (int j = 0; j < J; ++j) {
      xpoly.A.row(j) = -r[j].transpose();
      xpoly.b(j) = inst.rf - w[j];
    }
    gibbs_sweep_logexp(xpoly, zero_m, x, rng);
    double value = 0.0;
    for (int j = 0; j < J; ++j) value += inst.payoff(r[j], x);
    res.trace.push(x, value / J, 1.0, 0, it < burn);
  }
  res.trace.close_level(0, 1.0);
  res.x_hat = mode_estimate(res.trace, ModeMethod::ErgodicMean);
  res.x_median.resize(n);
  const auto idx = res.trace.final_indices();
  for (int k = 0; k < n; ++k) {
    std::vector<double> col;
    col.reserve(idx.size());
    for (auto i : idx) col.push_back(res.trace.draws[i](k));
    std::sort(col.begin(), col.end());
    res.x_median(k) = quantile_sorted(col, 0.5);
  }
  return res;
}

SaaResult saa_maximize(const std::function<double(const Eigen::VectorXd&)>& objective, const Eigen::VectorXd& lo,
                       const Eigen::VectorXd& hi, Eigen::VectorXd x0, const SaaOptions& opts) {
  const int n = static_cast<int>(x0.size());
  if (lo.size() != n || hi.size() != n) config_error("saa: bound dimensions do not match the start");
  auto project = [&](Eigen::VectorXd v) { return Eigen::VectorXd(v.cwiseMax(lo).cwiseMin(hi)); };
  Eigen::VectorXd x = project(std::move(x0));
  double f = objective(x);
  SaaResult res;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    Eigen::VectorXd g(n);
    for (int k = 0; k < n; ++k) {
      const double h = opts.fd_step * std::max(1.0, std::abs(x(k)));
      Eigen::VectorXd xp = x, xm = x;
      xp(k) = std::min(x(k) + h, hi(k));
      xm(k) = std::max(x(k) - h, lo(k));
      g(k) = xp(k) > xm(k) ? (objective(xp) - objective(xm)) / (xp(k) - xm(k)) : 0.0;
    }
    const Eigen::VectorXd pg = project(x + g) - x;
    if (pg.norm() <= opts.grad_tol * (1.0 + std::abs(f))) {
      res.x = x;
      res.value = f;
      res.iterations = iter;
      return res;
    }
    double t = 1.0;
    bool moved = false;
    while (t > 1e-16) {
      const Eigen::VectorXd xn = project(x + t * g);
      const double fn = objective(xn);
      if (fn >= f + 1e-4 * g.dot(xn - x)) {
        moved = (xn - x).norm() > 0.0;
        x = xn;
        f = fn;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      solver_error("saa: line search failed at iteration " + std::to_string(iter) + ", last iterate value " +
                   std::to_string(f));
    }
  }
  res.x = x;
  res.value = f;
  res.iterations = opts.max_iter;
  return res;
}

SaaResult saa_baseline(const OneStageProblem& prob, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int N,
                       RngStream& rng, const std::optional<Eigen::VectorXd>& x0, const SaaOptions& opts) {
  if (N < 1) config_error("saa: N must be at least 1");
  if (!prob.payoff || !prob.scenario) config_error("saa: payoff and scenario sampler are required");
  std::vector<Eigen::VectorXd> omega(N);
  for (auto& w : omega) w = prob.scenario(rng);
  auto obj = [&](const Eigen::VectorXd& x) {
    double s = 0.0;
    for (const auto& w : omega) s += prob.payoff(w, x);
    return s / N;
  };
  return saa_maximize(obj, lo, hi, x0 ? *x0 : Eigen::VectorXd(0.5 * (lo + hi)), opts);
}

SaaResult saa_baseline(const PortfolioInstance& inst, int N, RngStream& rng, const SaaOptions& opts) {
  inst.validate();
  if (N < 1) config_error("saa: N must be at least 1");
  const int n = inst.n();
  const Eigen::MatrixXd L = inst.Sigma.llt().matrixL();
  Eigen::MatrixXd R(n, N);
  for (int i = 0; i < N; ++i) {
    Eigen::VectorXd z(n);
    for (int k = 0; k < n; ++k) z(k) = rng.normal();
    R.col(i) = inst.mu + L * z;
  }
  auto obj = [&](const Eigen::VectorXd& x) {
    const Eigen::ArrayXd ret = (R.transpose() * x).array() + inst.rf;
    return inst.K - (-inst.gamma * ret).exp().mean();
  };
  Eigen::VectorXd x0(n);
  for (int k = 0; k < n; ++k) x0(k) = std::clamp(0.0, inst.lo(k), inst.hi(k));
  return saa_maximize(obj, inst.lo, inst.hi, x0, opts);
}

}  // namespace mc2
