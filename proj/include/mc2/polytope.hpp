#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mc2/samplers1d.hpp"

namespace mc2 {

// {x : A x <= b, x_k >= 0 for flagged k}.
struct Polytope {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  std::vector<bool> nonneg;
  std::optional<Eigen::VectorXd> feasible_point;

  Polytope() = default;
  Polytope(Eigen::MatrixXd A_, Eigen::VectorXd b_, std::vector<bool> nonneg_ = {});

  int dim() const { return static_cast<int>(A.cols()); }
  int rows() const { return static_cast<int>(A.rows()); }

  void validate() const;
  // Largest constraint violation (0 when feasible).
  double max_violation(const Eigen::VectorXd& x) const;
  bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const;
  Polytope with_rows(const Eigen::MatrixXd& A2, const Eigen::VectorXd& b2) const;
  // Nonnegativity flags rewritten as explicit -x_k <= 0 rows.
  Polytope explicit_rows() const;

  static Polytope box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
};

inline constexpr double kZeroCoef = 1e-12;
inline constexpr double kRowTol = 1e-10;

// Conditional slice for coordinate k. rest_i = b_i - sum_{j != k} a_ij x_j.
// Rows with |a_ik| < kZeroCoef are skipped. A numerically empty interval
// within tolerance collapses to a point; beyond tolerance it is an error.
Interval conditional_interval(const Eigen::Ref<const Eigen::VectorXd>& col, const Eigen::VectorXd& rest,
                              const Eigen::VectorXd& b, bool nonneg);

Interval gibbs_conditional_bounds(const Polytope& poly, const Eigen::VectorXd& x, int k);

// Strictly interior point: a max-margin center found by LP, then the hint
// (or the origin) shrunk toward it. Throws Infeasible if the interior is empty.
Eigen::VectorXd find_interior_point(const Polytope& poly, const std::optional<Eigen::VectorXd>& hint = std::nullopt);

struct Normalizability {
  bool ok = true;
  std::string reason;
};

// Whether exp(m'x) is integrable over the polytope, via the recession cone.
Normalizability check_exp_normalizable(const Polytope& poly, const Eigen::VectorXd& m);

bool is_bounded(const Polytope& poly);

}  // namespace mc2
