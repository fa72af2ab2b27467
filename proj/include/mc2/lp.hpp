#pragma once

#include <vector>

#include <Eigen/Dense>

namespace mc2 {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  double value = 0.0;
};

// Dense two-phase simplex with Bland's rule for small problems:
// maximize c'x subject to A x <= b, x_k >= 0 where nonneg[k], free otherwise.
// Used for feasibility and recession-cone checks, not as a production LP solver.
LpResult lp_maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                     const std::vector<bool>& nonneg);

}  // namespace mc2
