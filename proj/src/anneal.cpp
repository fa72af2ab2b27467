#include "mc2/anneal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mc2/error.hpp"
#include "mc2/samplers1d.hpp"
#include "mc2/slice.hpp"
#include "mc2/stats.hpp"
#include "mc2/truncexp_mv.hpp"

namespace mc2 {

void Schedule::validate() const {
  if (kappas.empty()) config_error("schedule: no kappa levels");
  for (std::size_t i = 0; i < kappas.size(); ++i) {
    if (!(kappas[i] >= 0.0) || !std::isfinite(kappas[i])) config_error("schedule: kappa values must be finite and >= 0");
    if (i > 0 && !(kappas[i] > kappas[i - 1])) config_error("schedule: kappa values must be strictly increasing");
  }
  if (sweeps_per_level < 1 || final_sweeps < 1) config_error("schedule: sweep counts must be positive");
  if (!(burnin_fraction >= 0.0 && burnin_fraction < 1.0)) config_error("schedule: burn-in fraction must be in [0, 1)");
  if (burnin_at(levels() - 1) >= final_sweeps) config_error("schedule: no post-burn-in draws at the final level");
}

int Schedule::burnin_at(int level) const {
  return static_cast<int>(std::floor(burnin_fraction * sweeps_at(level)));
}

Schedule default_schedule() { return geometric_schedule(1.0, 5.0, 5, 2000, 10000); }

Schedule single_level(double kappa, int sweeps, double burnin_fraction) {
  Schedule s;
  s.kappas = {kappa};
  s.sweeps_per_level = sweeps;
  s.final_sweeps = sweeps;
  s.burnin_fraction = burnin_fraction;
  return s;
}

Schedule geometric_schedule(double first, double ratio, int levels, int sweeps_per_level, int final_sweeps) {
  Schedule s;
  double k = first;
  for (int i = 0; i < levels; ++i, k *= ratio) s.kappas.push_back(k);
  s.sweeps_per_level = sweeps_per_level;
  s.final_sweeps = final_sweeps;
  return s;
}

void Trace::push(const Eigen::VectorXd& x, double value, double k, int lvl, bool is_burnin) {
  draws.push_back(x);
  values.push_back(value);
  kappa.push_back(k);
  level.push_back(lvl);
  burnin.push_back(is_burnin ? 1 : 0);
}

std::vector<std::size_t> Trace::final_indices() const {
  std::vector<std::size_t> idx;
  if (draws.empty()) return idx;
  const int last = *std::max_element(level.begin(), level.end());
  for (std::size_t i = 0; i < draws.size(); ++i) {
    if (level[i] == last && !burnin[i]) idx.push_back(i);
  }
  return idx;
}

std::vector<double> Trace::final_values() const {
  std::vector<double> v;
  for (std::size_t i : final_indices()) v.push_back(values[i]);
  return v;
}

void Trace::close_level(int lvl, double k, double acceptance) {
  LevelStats st;
  st.kappa = k;
  st.acceptance = acceptance;
  std::vector<double> kept;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    if (level[i] != lvl) continue;
    ++st.sweeps;
    if (!burnin[i]) kept.push_back(values[i]);
  }
  st.kept = static_cast<int>(kept.size());
  if (!kept.empty()) {
    st.mean_value = mean(kept);
    st.se_value = batch_means_se(kept);
  }
  levels.push_back(st);
}

namespace {

std::vector<std::string> default_names(int K, const char* prefix) {
  std::vector<std::string> n;
  for (int k = 0; k < K; ++k) n.push_back(std::string(prefix) + std::to_string(k + 1));
  return n;
}

void check_target(const BoltzmannTarget& target, const Schedule& schedule) {
  target.feasible.validate();
  const int K = target.feasible.dim();
  if (target.linear()) {
    if (target.c.size() != K) config_error("anneal: objective has " + std::to_string(target.c.size()) +
                                           " entries for a " + std::to_string(K) + "-dimensional polytope");
    if (schedule.kappas.back() > 0.0) {
      const Normalizability n = check_exp_normalizable(target.feasible, target.sign() * target.c);
      if (!n.ok) infeasible_error("annealed target is not normalizable: " + n.reason);
    }
  } else if (!target.f) {
    config_error("anneal: target has neither a linear objective nor a callable");
  }
  if (schedule.kappas.front() == 0.0 || !target.linear()) {
    if (!is_bounded(target.feasible)) {
      config_error("anneal: uniform or non-linear targets need a bounded polytope");
    }
  }
}

}  // namespace

Trace anneal_run(const BoltzmannTarget& target, Kernel kernel, const Schedule& schedule, RngStream& rng,
                 const std::optional<Eigen::VectorXd>& start) {
  schedule.validate();
  check_target(target, schedule);
  if (kernel == Kernel::GibbsExponential && !target.linear()) {
    config_error("anneal: the exponential Gibbs kernel needs a linear objective");
  }
  const Polytope& poly = target.feasible;
  const int K = poly.dim();
  Eigen::VectorXd x;
  const auto hint = start ? start : poly.feasible_point;
  if (hint && hint->size() == K && poly.contains(*hint)) {
    x = *hint;
  } else {
    x = find_interior_point(poly, hint);
  }

  Trace trace;
  trace.names = default_names(K, "x");
  trace.sense = target.sense;
  trace.seed = rng.seed();
  trace.stream = rng.stream();
  const double s = target.sign();
  const Eigen::VectorXd g = target.linear() ? Eigen::VectorXd(s * target.c) : Eigen::VectorXd();

  for (int lvl = 0; lvl < schedule.levels(); ++lvl) {
    const double kappa = schedule.kappas[lvl];
    const int sweeps = schedule.sweeps_at(lvl);
    const int burn = schedule.burnin_at(lvl);
    for (int sw = 0; sw < sweeps; ++sw) {
      if (kappa == 0.0 || kernel == Kernel::GibbsExponential) {
        const Eigen::VectorXd m = target.linear() ? Eigen::VectorXd(kappa * g) : Eigen::VectorXd::Zero(K);
        gibbs_sweep_logexp(poly, m, x, rng);
      } else if (target.linear()) {
        const double u = exp_slice_level(g.dot(x), kappa, rng);
        for (int k = 0; k < K; ++k) {
          Interval iv = gibbs_conditional_bounds(poly, x, k);
          const double rest = g.dot(x) - g(k) * x(k);
          if (g(k) > kZeroCoef) iv.lo = std::max(iv.lo, (u - rest) / g(k));
          if (g(k) < -kZeroCoef) iv.hi = std::min(iv.hi, (u - rest) / g(k));
          if (iv.lo > iv.hi) iv.lo = iv.hi = x(k);
          if (!iv.bounded()) solver_error("slice kernel: unbounded conditional slice at coordinate " + std::to_string(k));
          x(k) = iv.lo < iv.hi ? rng.uniform(iv.lo, iv.hi) : iv.lo;
        }
      } else {
        const double u = exp_slice_level(s * target.f(x), kappa, rng);
        for (int k = 0; k < K; ++k) {
          const Interval iv = gibbs_conditional_bounds(poly, x, k);
          Eigen::VectorXd y = x;
          x(k) = slice_shrink_sample(
              [&](double t) {
                y(k) = t;
                return s * target.f(y) >= u;
              },
              x(k), iv, rng);
        }
      }
      trace.push(x, target.objective(x), kappa, lvl, sw < burn);
    }
    trace.close_level(lvl, kappa);
  }
  return trace;
}

Eigen::VectorXd mode_estimate(const Trace& trace, ModeMethod method) {
  const auto idx = trace.final_indices();
  if (idx.empty()) solver_error("mode_estimate: no post-burn-in draws");
  if (method == ModeMethod::ErgodicMean) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(trace.draws[idx[0]].size());
    for (std::size_t i : idx) m += trace.draws[i];
    return m / static_cast<double>(idx.size());
  }
  const double s = trace.sense == Sense::Maximize ? 1.0 : -1.0;
  std::size_t best = idx[0];
  for (std::size_t i : idx) {
    if (s * trace.values[i] > s * trace.values[best]) best = i;
  }
  return trace.draws[best];
}

std::vector<std::pair<Eigen::VectorXd, double>> top_distinct_draws(const Trace& trace, int n, double tol) {
  auto idx = trace.final_indices();
  const double s = trace.sense == Sense::Maximize ? 1.0 : -1.0;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return s * trace.values[a] > s * trace.values[b]; });
  std::vector<std::pair<Eigen::VectorXd, double>> out;
  for (std::size_t i : idx) {
    if (static_cast<int>(out.size()) >= n) break;
    bool dup = false;
    for (const auto& o : out) {
      if ((o.first - trace.draws[i]).cwiseAbs().maxCoeff() <= tol) {
        dup = true;
        break;
      }
    }
    if (!dup) out.emplace_back(trace.draws[i], trace.values[i]);
  }
  return out;
}

LpDualResult solve_lp_dual(const Eigen::VectorXd& z, const Eigen::MatrixXd& W, const Eigen::VectorXd& q,
                           const std::vector<bool>& nonneg, const Schedule& schedule, RngStream& rng,
                           const std::optional<Eigen::VectorXd>& start) {
  const int K = static_cast<int>(z.size());
  if (W.rows() != K) config_error("solve_lp_dual: W has " + std::to_string(W.rows()) + " rows, z has " + std::to_string(K));
  if (q.size() != W.cols()) config_error("solve_lp_dual: q has " + std::to_string(q.size()) + " entries, W has " +
                                         std::to_string(W.cols()) + " columns");
  std::vector<bool> nn = nonneg.empty() ? std::vector<bool>(K, false) : nonneg;
  if (static_cast<int>(nn.size()) != K) config_error("solve_lp_dual: nonneg flags have the wrong length");
  schedule.validate();
  Polytope poly(W.transpose(), q, nn);
  poly.validate();

  LpDualResult res;
  if (z.cwiseAbs().maxCoeff() == 0.0) {
    res.pi_hat = find_interior_point(poly, start);
    res.trace.names = default_names(K, "pi");
    res.trace.sense = Sense::Maximize;
    res.trace.push(res.pi_hat, 0.0, schedule.kappas.back(), 0, false);
    res.trace.close_level(0, schedule.kappas.back());
    return res;
  }
  const Normalizability n = check_exp_normalizable(poly, z);
  if (!n.ok) infeasible_error("annealed dual is not normalizable (unbounded dual, primal infeasible): " + n.reason);

  BoltzmannTarget target;
  target.c = z;
  target.sense = Sense::Maximize;
  target.feasible = poly;
  res.trace = anneal_run(target, Kernel::GibbsExponential, schedule, rng, start);
  res.trace.names = default_names(K, "pi");
  res.pi_hat = mode_estimate(res.trace, ModeMethod::ErgodicMean);
  const auto v = res.trace.final_values();
  res.G_hat = mean(v);
  res.G_se = batch_means_se(v);
  return res;
}

void PincusParams::validate() const {
  if (!(t > 0.0) || !(b > 0.0) || !(box > 0.0)) config_error("pincus: t, b and box must be positive");
  if (!std::isfinite(c1) || !std::isfinite(c2)) config_error("pincus: c must be finite");
}

bool PincusParams::dual_feasible(const Eigen::VectorXd& pi, double tol) const {
  return pi.size() == 3 && pi.minCoeff() >= -tol && pi(0) + pi(1) >= c1 - tol && b * pi(0) + pi(2) >= c2 - tol;
}

Eigen::VectorXd pincus_gibbs_step(Eigen::VectorXd pi, double kappa, const PincusParams& p, RngStream& rng) {
  p.validate();
  if (!(kappa > 0.0)) config_error("pincus_gibbs_step: kappa must be positive");
  if (!p.dual_feasible(pi)) config_error("pincus_gibbs_step: starting point is not dual feasible");
  pi(0) = trunc_exp_sample(-kappa * p.t, {std::max({0.0, p.c1 - pi(1), (p.c2 - pi(2)) / p.b}), kInf}, rng);
  pi(1) = trunc_exp_sample(-kappa * p.box, {std::max(0.0, p.c1 - pi(0)), kInf}, rng);
  pi(2) = trunc_exp_sample(-kappa * p.box, {std::max(0.0, p.c2 - p.b * pi(0)), kInf}, rng);
  return pi;
}

Trace pincus_run(const PincusParams& p, const Schedule& schedule, RngStream& rng) {
  p.validate();
  schedule.validate();
  if (!(schedule.kappas.front() > 0.0)) config_error("pincus_run: kappa levels must be positive");
  Eigen::VectorXd pi(3);
  pi << std::max({0.0, p.c1, p.c2 / p.b}) + 1.0, 1.0, 1.0;
  Trace trace;
  trace.names = default_names(3, "pi");
  trace.sense = Sense::Minimize;
  trace.seed = rng.seed();
  trace.stream = rng.stream();
  for (int lvl = 0; lvl < schedule.levels(); ++lvl) {
    const double kappa = schedule.kappas[lvl];
    const int burn = schedule.burnin_at(lvl);
    for (int sw = 0; sw < schedule.sweeps_at(lvl); ++sw) {
      pi = pincus_gibbs_step(pi, kappa, p, rng);
      trace.push(pi, p.dual_value(pi), kappa, lvl, sw < burn);
    }
    trace.close_level(lvl, kappa);
  }
  return trace;
}

void pincus_dual_form(const PincusParams& p, Eigen::VectorXd& z, Eigen::MatrixXd& W, Eigen::VectorXd& q,
                      std::vector<bool>& nonneg) {
  p.validate();
  z.resize(3);
  z << -p.t, -p.box, -p.box;
  W.resize(3, 2);
  W << -1.0, -p.b, -1.0, 0.0, 0.0, -1.0;
  q.resize(2);
  q << -p.c1, -p.c2;
  nonneg.assign(3, true);
}

}  // namespace mc2
