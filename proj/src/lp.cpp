#include "mc2/lp.hpp"

#include <cmath>

#include "mc2/error.hpp"

namespace mc2 {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-10;
constexpr int kMaxPivots = 200000;

void pivot(Eigen::MatrixXd& T, Eigen::RowVectorXd* obj, std::vector<int>& basis, int r, int j) {
  T.row(r) /= T(r, j);
  for (int i = 0; i < T.rows(); ++i) {
    if (i != r && T(i, j) != 0.0) T.row(i) -= T(i, j) * T.row(r);
  }
  if (obj && (*obj)(j) != 0.0) *obj -= (*obj)(j)*T.row(r);
  basis[r] = j;
}

// Maximizes cost'z over the tableau; only columns < allowed may enter.
// Returns false when unbounded. The objective value is written to value.
bool run_simplex(Eigen::MatrixXd& T, std::vector<int>& basis, const Eigen::VectorXd& cost, int allowed,
                 double& value) {
  const int m = static_cast<int>(T.rows());
  const int n = static_cast<int>(T.cols()) - 1;
  Eigen::RowVectorXd obj = Eigen::RowVectorXd::Zero(n + 1);
  obj.head(n) = -cost.transpose();
  for (int i = 0; i < m; ++i) {
    if (cost(basis[i]) != 0.0) obj += cost(basis[i]) * T.row(i);
  }
  for (int it = 0; it < kMaxPivots; ++it) {
    int enter = -1;
    for (int j = 0; j < allowed; ++j) {
      if (obj(j) < -kCostTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) {
      value = obj(n);
      return true;
    }
    int leave = -1;
    double best = 0.0;
    for (int i = 0; i < m; ++i) {
      if (T(i, enter) > kPivotTol) {
        const double ratio = T(i, n) / T(i, enter);
        if (leave < 0 || ratio < best - 1e-14 || (std::abs(ratio - best) <= 1e-14 && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
    }
    if (leave < 0) return false;
    pivot(T, &obj, basis, leave, enter);
  }
  solver_error("lp_maximize: pivot limit reached");
}

}  // namespace

LpResult lp_maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                     const std::vector<bool>& nonneg) {
  const int K = static_cast<int>(c.size());
  const int m = static_cast<int>(A.rows());
  if (A.cols() != K || b.size() != m || static_cast<int>(nonneg.size()) != K) {
    config_error("lp_maximize: dimension mismatch");
  }
  // Column layout: split variables, slacks, artificials, rhs.
  std::vector<int> pos(K), neg(K, -1);
  int nz = 0;
  for (int k = 0; k < K; ++k) {
    pos[k] = nz++;
    if (!nonneg[k]) neg[k] = nz++;
  }
  int n_art = 0;
  for (int i = 0; i < m; ++i) n_art += b(i) < 0.0 ? 1 : 0;
  const int slack0 = nz, art0 = nz + m, ncols = nz + m + n_art;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, ncols + 1);
  std::vector<int> basis(m);
  int art = art0;
  for (int i = 0; i < m; ++i) {
    const double sgn = b(i) < 0.0 ? -1.0 : 1.0;
    for (int k = 0; k < K; ++k) {
      T(i, pos[k]) = sgn * A(i, k);
      if (neg[k] >= 0) T(i, neg[k]) = -sgn * A(i, k);
    }
    T(i, slack0 + i) = sgn;
    T(i, ncols) = sgn * b(i);
    if (sgn < 0.0) {
      T(i, art) = 1.0;
      basis[i] = art++;
    } else {
      basis[i] = slack0 + i;
    }
  }

  LpResult res;
  double value = 0.0;
  if (n_art > 0) {
    Eigen::VectorXd cost1 = Eigen::VectorXd::Zero(ncols);
    cost1.tail(n_art).setConstant(-1.0);
    run_simplex(T, basis, cost1, ncols, value);
    const double scale = 1.0 + b.cwiseAbs().maxCoeff();
    if (value < -1e-9 * scale) {
      res.status = LpStatus::Infeasible;
      return res;
    }
    for (int i = 0; i < m; ++i) {
      if (basis[i] < art0) continue;
      for (int j = 0; j < art0; ++j) {
        if (std::abs(T(i, j)) > 1e-9) {
          pivot(T, nullptr, basis, i, j);
          break;
        }
      }
    }
  }
  Eigen::VectorXd cost2 = Eigen::VectorXd::Zero(ncols);
  for (int k = 0; k < K; ++k) {
    cost2(pos[k]) = c(k);
    if (neg[k] >= 0) cost2(neg[k]) = -c(k);
  }
  if (!run_simplex(T, basis, cost2, art0, value)) {
    res.status = LpStatus::Unbounded;
    return res;
  }
  Eigen::VectorXd z = Eigen::VectorXd::Zero(ncols);
  for (int i = 0; i < m; ++i) z(basis[i]) = T(i, ncols);
  res.x.resize(K);
  for (int k = 0; k < K; ++k) res.x(k) = z(pos[k]) - (neg[k] >= 0 ? z(neg[k]) : 0.0);
  res.value = c.dot(res.x);
  res.status = LpStatus::Optimal;
  return res;
}

}  // namespace mc2
