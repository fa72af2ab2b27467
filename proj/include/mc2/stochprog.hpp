#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mc2/anneal.hpp"
#include "mc2/polytope.hpp"
#include "mc2/rng.hpp"
#include "mc2/stats.hpp"

namespace mc2 {

// ---------------------------------------------------------------- one stage

// Maximize E_omega G(omega, x) over a bounded domain through the J-copy
// target prod_j G(omega_j, x) p(omega_j).
struct OneStageProblem {
  std::function<double(const Eigen::VectorXd& omega, const Eigen::VectorXd& x)> payoff;
  std::function<Eigen::VectorXd(RngStream&)> scenario;  // prior sampler
  Polytope domain;
  std::vector<int> J_ladder = {4, 16, 64};
};

struct OneStageOptions {
  int sweeps = 5000;  // per J level
  double burnin_fraction = 0.5;
};

struct OneStageResult {
  Eigen::VectorXd x_hat;
  Trace trace;  // level l holds J_ladder[l]; the kappa column stores J
  std::vector<double> x_sd;  // post-burn-in sd of x_1 at each J
  double omega_acceptance = 0.0;
};

OneStageResult one_stage_mcmc(const OneStageProblem& prob, const OneStageOptions& opts, RngStream& rng,
                              const std::optional<Eigen::VectorXd>& start = std::nullopt);

// ---------------------------------------------------------------- portfolio

// G(r, x) = K - exp(-gamma (r'x + rf)) with r ~ N(mu, Sigma), x in a box.
struct PortfolioInstance {
  Eigen::VectorXd mu;
  Eigen::MatrixXd Sigma;
  double gamma = 2.0;
  double rf = 0.0;
  double K = 1.0;
  int J = 20;
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  int max_assets = 50;

  int n() const { return static_cast<int>(mu.size()); }
  void validate() const;
  Eigen::VectorXd analytic_optimum() const;  // Sigma^{-1} mu / gamma
  double payoff(const Eigen::VectorXd& r, const Eigen::VectorXd& x) const;
};

struct PortfolioResult {
  Eigen::VectorXd x_hat;      // ergodic mean
  Eigen::VectorXd x_median;   // coordinate-wise posterior median, diagnostic
  Trace trace;
};

// Gibbs over (w_j, r_j, x): truncated exponential, truncated normal, uniform.
PortfolioResult portfolio_mcmc(const PortfolioInstance& inst, int sweeps, RngStream& rng,
                               double burnin_fraction = 0.5);

// ---------------------------------------------------------------- SAA

struct SaaOptions {
  double grad_tol = 1e-8;
  double fd_step = 1e-6;
  int max_iter = 10000;
};

struct SaaResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
};

// Deterministic projected ascent on the sample-average objective over a box.
SaaResult saa_maximize(const std::function<double(const Eigen::VectorXd&)>& objective, const Eigen::VectorXd& lo,
                       const Eigen::VectorXd& hi, Eigen::VectorXd x0, const SaaOptions& opts = {});
SaaResult saa_baseline(const OneStageProblem& prob, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int N,
                       RngStream& rng, const std::optional<Eigen::VectorXd>& x0 = std::nullopt,
                       const SaaOptions& opts = {});
SaaResult saa_baseline(const PortfolioInstance& inst, int N, RngStream& rng, const SaaOptions& opts = {});

// ---------------------------------------------------------------- farmer

// Second stage: maximize p1 y1 + p2 y2 subject to y1 + y2 <= x,
// 110 y1 + 30 y2 <= omega1, 120 y1 + 210 y2 <= omega2, y >= 0.
struct FarmerInstance {
  double k = 10.0;
  double x_lo = 0.0;
  double x_hi = 100.0;
  double w1_lo = 3000.0;
  double w1_hi = 5000.0;
  double w2_lo = 10000.0;
  double w2_hi = 20000.0;
  double p1 = 143.0;
  double p2 = 60.0;

  void validate() const;
  bool degenerate() const { return w1_lo == w1_hi && w2_lo == w2_hi; }
  Polytope inner_polytope(double x, const Eigen::Vector2d& omega) const;
  double inner_value(const Eigen::Vector2d& y) const { return p1 * y(0) + p2 * y(1); }
  // Largest feasible y2 and the profile value with y1 at its upper bound.
  double y2_max(double x, const Eigen::Vector2d& omega) const;
  double profile_value(double y2, double x, const Eigen::Vector2d& omega) const;
};

struct FarmerInnerOptions {
  std::vector<double> ladder;  // warm-up kappas below the target; empty = default
  int warmup_sweeps = 2000;
  double burnin_fraction = 0.5;
  std::optional<Eigen::Vector2d> start;
};

// kappa / 5^l for l >= 1 while it stays >= 0.01, in increasing order.
std::vector<double> farmer_default_ladder(double kappa);

struct FarmerInnerResult {
  Eigen::Vector2d y_hat;
  double value = 0.0;     // p'y_hat
  double value_rb = 0.0;  // average of p'y over draws
  double value_se = 0.0;
  Trace trace;
};

FarmerInnerResult farmer_inner_gibbs(const FarmerInstance& inst, double x, const Eigen::Vector2d& omega, double kappa,
                                     bool use_slice, int sweeps, RngStream& rng, const FarmerInnerOptions& opts = {});

// Density proportional to exp(intercept_i + slope_i y) on [breaks_i, breaks_{i+1}].
struct PiecewiseExp {
  std::vector<double> breaks;
  std::vector<double> intercept;
  std::vector<double> slope;

  double log_normalizer() const;
  double sample(RngStream& rng) const;
  double log_density(double y) const;
};

// exp(kappa V(y2)) on (0, y2_max) with V the profile value.
PiecewiseExp farmer_y2_marginal(const FarmerInstance& inst, double x, const Eigen::Vector2d& omega, double kappa);
double farmer_log_Z(const FarmerInstance& inst, double x, const Eigen::Vector2d& omega, double kappa);

struct FarmerOuterResult {
  double x_hat = 0.0;
  Trace trace;
  Histogram histogram;  // x over the final level
  Interval modal_interval;
};

// Joint chain over (x, y2_j, u_j, omega_j), j = 1..J. The final schedule level
// is the reported segment; earlier levels are warm-up.
FarmerOuterResult farmer_outer_mcmc(const FarmerInstance& inst, int J, const Schedule& schedule, RngStream& rng,
                                    int bins = 50);
// Warm-up levels kappa/125, kappa/25, kappa/5 sharing the first half, then kappa.
Schedule farmer_outer_schedule(double kappa, int iterations);

// ---------------------------------------------------------------- two stage

struct TwoStageScenario {
  double prob = 1.0;
  Eigen::VectorXd q;
  Eigen::VectorXd h;
  Eigen::MatrixXd T;
};

// min_x c'x + E Q(x, omega), Q(x, omega) = max {xi'(h - T x) : W'xi <= q}.
// Each copy carries the payoff exp(-kappa_outer (c'x + Q)), with Q handled
// through the annealed dual at temperature kappa > kappa_outer.
struct TwoStageProblem {
  Eigen::VectorXd c;
  Polytope S;                          // continuous first-stage set
  std::vector<Eigen::VectorXd> x_points;  // discrete first-stage set, used when nonempty
  Eigen::MatrixXd W;
  std::vector<TwoStageScenario> scenarios;
  double kappa = 50.0;
  double kappa_outer = 1.0;
  int J = 1;

  void validate() const;
  int dim_x() const { return static_cast<int>(c.size()); }
  int dim_xi() const { return static_cast<int>(W.rows()); }
  bool discrete() const { return !x_points.empty(); }
  Eigen::VectorXd rhs(int s, const Eigen::VectorXd& x) const { return scenarios[s].h - scenarios[s].T * x; }
  Polytope dual_polytope(int s) const;
};

// log of prod_j p_kappa(xi_j | xi_-j, cand) / p_kappa(xi_j | xi_-j, curr);
// -inf when xi is infeasible under the candidate.
double ch_log_ratio(const Eigen::VectorXd& xi, int cand_s, const Eigen::VectorXd& cand_x, int curr_s,
                    const Eigen::VectorXd& curr_x, const TwoStageProblem& prob, double kappa);
double ch_metropolis_ratio(const Eigen::VectorXd& xi, int cand_s, const Eigen::VectorXd& cand_x, int curr_s,
                           const Eigen::VectorXd& curr_x, const TwoStageProblem& prob, double kappa);

// Normalizer used in the omega and x moves. Exact divides by the full dual
// normalizer Z_kappa(a) and makes (x, omega) follow
// p(omega) exp(-kappa_outer c'x) Z_{kappa - kappa_outer}(a) / Z_kappa(a).
// Coordinate uses the product of one-dimensional conditional normalizers
// (the ch_log_ratio form); the two agree when the dual is one-dimensional.
enum class DualNormalizer { Exact, Coordinate };

struct TwoStageOptions {
  int sweeps = 5000;
  double burnin_fraction = 0.5;
  int xi_sweeps = 1;
  DualNormalizer normalizer = DualNormalizer::Exact;
};

struct TwoStageResult {
  Eigen::VectorXd x_hat;
  Trace trace;  // x draws; extra columns hold the scenario index of each copy
  std::vector<int> x_index;  // discrete case: index into x_points per iteration
  std::vector<int> omega0;   // scenario of copy 1 per iteration
  double value_hat = 0.0;
  double value_se = 0.0;
  double omega_acceptance = 0.0;
  double x_acceptance = 0.0;
};

TwoStageResult two_stage_mcmc(const TwoStageProblem& prob, const TwoStageOptions& opts, RngStream& rng);

// Vertex-cone decomposition of a pointed dual polyhedron {W'xi <= q}, for
// log of the integral of exp(m'xi) over it. Right-hand sides get a tiny
// deterministic perturbation so every vertex is simple.
class DualNormalizerTable {
 public:
  explicit DualNormalizerTable(const Polytope& dual, long max_bases = 200000);
  bool available() const { return ok_; }
  // Throws Config when exp(m'xi) is not integrable.
  double log_normalizer(const Eigen::VectorXd& m) const;
  std::size_t vertices() const { return v_.size(); }

 private:
  double evaluate(const Eigen::VectorXd& m, bool* singular) const;
  bool ok_ = false;
  std::vector<Eigen::VectorXd> v_;
  std::vector<Eigen::MatrixXd> G_;  // edge directions as columns
  std::vector<double> log_det_;
  std::vector<Eigen::VectorXd> rays_;
};

struct DualValue {
  double mean = 0.0;
  double se = 0.0;
  Eigen::VectorXd xi_hat;
};

// E(xi'(h - T x)) under exp(kappa xi'(h - T x)) on the scenario's dual polytope.
DualValue dual_value_estimate(const TwoStageProblem& prob, int s, const Eigen::VectorXd& x, double kappa, int sweeps,
                              RngStream& rng);

}  // namespace mc2
