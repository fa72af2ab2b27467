#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mc2/polytope.hpp"
#include "mc2/rng.hpp"

namespace mc2 {

enum class Sense { Minimize, Maximize };

// exp(-kappa f) for minimization, exp(kappa f) for maximization.
struct BoltzmannTarget {
  Eigen::VectorXd c;  // linear objective c'x; leave empty to use f
  std::function<double(const Eigen::VectorXd&)> f;
  Sense sense = Sense::Minimize;
  Polytope feasible;

  bool linear() const { return c.size() > 0; }
  double objective(const Eigen::VectorXd& x) const { return linear() ? c.dot(x) : f(x); }
  // +1 for maximize, -1 for minimize.
  double sign() const { return sense == Sense::Maximize ? 1.0 : -1.0; }
};

struct Schedule {
  std::vector<double> kappas;
  int sweeps_per_level = 2000;
  int final_sweeps = 10000;
  double burnin_fraction = 0.5;

  void validate() const;
  int levels() const { return static_cast<int>(kappas.size()); }
  int sweeps_at(int level) const { return level + 1 == levels() ? final_sweeps : sweeps_per_level; }
  int burnin_at(int level) const;
};

// kappa_{l+1} = 5 kappa_l from 1, five levels.
Schedule default_schedule();
Schedule single_level(double kappa, int sweeps, double burnin_fraction = 0.5);
Schedule geometric_schedule(double first, double ratio, int levels, int sweeps_per_level, int final_sweeps);

struct LevelStats {
  double kappa = 0.0;
  int sweeps = 0;
  int kept = 0;
  double mean_value = 0.0;
  double se_value = 0.0;
  double acceptance = 1.0;
};

struct Trace {
  std::vector<std::string> names;  // one per coordinate
  std::vector<Eigen::VectorXd> draws;
  std::vector<double> values;
  std::vector<double> kappa;
  std::vector<int> level;
  std::vector<char> burnin;
  std::vector<LevelStats> levels;
  // Optional per-draw auxiliary columns, one row per draw when names are set.
  std::vector<std::string> extra_names;
  std::vector<Eigen::VectorXd> extra;
  Sense sense = Sense::Minimize;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  int dim() const { return draws.empty() ? static_cast<int>(names.size()) : static_cast<int>(draws.front().size()); }
  std::size_t size() const { return draws.size(); }
  void push(const Eigen::VectorXd& x, double value, double k, int lvl, bool is_burnin);
  // Post-burn-in draws at the final level.
  std::vector<std::size_t> final_indices() const;
  std::vector<double> final_values() const;
  // Fills the LevelStats entry for a finished level.
  void close_level(int lvl, double k, double acceptance = 1.0);
};

enum class Kernel { GibbsExponential, SliceWithinGibbs };

Trace anneal_run(const BoltzmannTarget& target, Kernel kernel, const Schedule& schedule, RngStream& rng,
                 const std::optional<Eigen::VectorXd>& start = std::nullopt);

enum class ModeMethod { ErgodicMean, MaxObjectiveDraw };

Eigen::VectorXd mode_estimate(const Trace& trace, ModeMethod method);

// Best distinct post-burn-in final-level draws by objective value.
std::vector<std::pair<Eigen::VectorXd, double>> top_distinct_draws(const Trace& trace, int n = 5,
                                                                   double tol = 1e-9);

struct LpDualResult {
  Eigen::VectorXd pi_hat;
  double G_hat = 0.0;
  double G_se = 0.0;
  Trace trace;
};

// G(z) = max {pi'z : W'pi <= q, pi_k >= 0 where nonneg[k]} by sampling
// exp(kappa pi'z) on the dual polytope along the schedule. pi_hat is the
// ergodic mean at the final level; G_hat the average of pi'z there.
LpDualResult solve_lp_dual(const Eigen::VectorXd& z, const Eigen::MatrixXd& W, const Eigen::VectorXd& q,
                           const std::vector<bool>& nonneg, const Schedule& schedule, RngStream& rng,
                           const std::optional<Eigen::VectorXd>& start = std::nullopt);

// Primal: maximize c1 x1 + c2 x2 s.t. x1 + b x2 <= t, 0 <= x <= box.
// Dual: minimize t pi1 + box (pi2 + pi3) s.t. pi1 + pi2 >= c1, b pi1 + pi3 >= c2, pi >= 0.
struct PincusParams {
  double t = 5.0;
  double b = 2.0;
  double c1 = 1.0;
  double c2 = 3.0;
  double box = 1.0;

  void validate() const;
  double dual_value(const Eigen::VectorXd& pi) const { return t * pi(0) + box * (pi(1) + pi(2)); }
  bool dual_feasible(const Eigen::VectorXd& pi, double tol = 1e-9) const;
};

// One systematic sweep over the three truncated-exponential conditionals.
Eigen::VectorXd pincus_gibbs_step(Eigen::VectorXd pi, double kappa, const PincusParams& p, RngStream& rng);
Trace pincus_run(const PincusParams& p, const Schedule& schedule, RngStream& rng);
// z, W, q and nonneg flags of the same dual in solve_lp_dual form (G = -dual optimum).
void pincus_dual_form(const PincusParams& p, Eigen::VectorXd& z, Eigen::MatrixXd& W, Eigen::VectorXd& q,
                      std::vector<bool>& nonneg);

}  // namespace mc2
