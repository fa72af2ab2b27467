#include "mc2/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mc2/error.hpp"
#include "mc2/lp.hpp"

namespace mc2 {

Polytope::Polytope(Eigen::MatrixXd A_, Eigen::VectorXd b_, std::vector<bool> nonneg_)
    : A(std::move(A_)), b(std::move(b_)), nonneg(std::move(nonneg_)) {
  if (nonneg.empty()) nonneg.assign(A.cols(), false);
}

void Polytope::validate() const {
  if (A.cols() < 1) config_error("polytope: dimension must be at least 1");
  if (A.rows() != b.size()) {
    config_error("polytope: A has " + std::to_string(A.rows()) + " rows but b has " + std::to_string(b.size()));
  }
  if (static_cast<Eigen::Index>(nonneg.size()) != A.cols()) {
    config_error("polytope: nonneg has " + std::to_string(nonneg.size()) + " flags for " +
                 std::to_string(A.cols()) + " columns");
  }
  if (!A.allFinite() || !b.allFinite()) config_error("polytope: non-finite entries");
}

double Polytope::max_violation(const Eigen::VectorXd& x) const {
  double v = 0.0;
  if (rows() > 0) v = std::max(v, (A * x - b).maxCoeff());
  for (int k = 0; k < dim(); ++k) {
    if (nonneg[k]) v = std::max(v, -x(k));
  }
  return v;
}

bool Polytope::contains(const Eigen::VectorXd& x, double tol) const {
  if (rows() > 0) {
    const Eigen::VectorXd r = A * x - b;
    for (int i = 0; i < rows(); ++i) {
      if (r(i) > tol * (1.0 + std::abs(b(i)))) return false;
    }
  }
  for (int k = 0; k < dim(); ++k) {
    if (nonneg[k] && x(k) < -tol) return false;
  }
  return true;
}

Polytope Polytope::with_rows(const Eigen::MatrixXd& A2, const Eigen::VectorXd& b2) const {
  Polytope p;
  p.A.resize(A.rows() + A2.rows(), A.cols());
  p.A << A, A2;
  p.b.resize(b.size() + b2.size());
  p.b << b, b2;
  p.nonneg = nonneg;
  return p;
}

Polytope Polytope::explicit_rows() const {
  int extra = 0;
  for (bool f : nonneg) extra += f ? 1 : 0;
  Eigen::MatrixXd A2 = Eigen::MatrixXd::Zero(extra, dim());
  int r = 0;
  for (int k = 0; k < dim(); ++k) {
    if (nonneg[k]) A2(r++, k) = -1.0;
  }
  Polytope p = with_rows(A2, Eigen::VectorXd::Zero(extra));
  p.nonneg.assign(dim(), false);
  return p;
}

Polytope Polytope::box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  const int K = static_cast<int>(lo.size());
  if (hi.size() != K) config_error("box: lo and hi sizes differ");
  Polytope p;
  p.A = Eigen::MatrixXd::Zero(2 * K, K);
  p.b.resize(2 * K);
  for (int k = 0; k < K; ++k) {
    if (!(lo(k) < hi(k))) config_error("box: empty side at coordinate " + std::to_string(k));
    p.A(2 * k, k) = 1.0;
    p.b(2 * k) = hi(k);
    p.A(2 * k + 1, k) = -1.0;
    p.b(2 * k + 1) = -lo(k);
  }
  p.nonneg.assign(K, false);
  return p;
}

Interval conditional_interval(const Eigen::Ref<const Eigen::VectorXd>& col, const Eigen::VectorXd& rest,
                              const Eigen::VectorXd& b, bool nonneg) {
  double lo = nonneg ? 0.0 : -kInf, hi = kInf;
  double lo_tol = nonneg ? kRowTol : 0.0, hi_tol = 0.0;
  int lo_row = nonneg ? -2 : -1, hi_row = -1;
  for (Eigen::Index i = 0; i < col.size(); ++i) {
    const double a = col(i);
    if (std::abs(a) < kZeroCoef) continue;
    const double bound = rest(i) / a;
    const double tol = kRowTol * (1.0 + std::abs(b(i))) / std::abs(a);
    if (a > 0.0) {
      if (bound < hi) {
        hi = bound;
        hi_tol = tol;
        hi_row = static_cast<int>(i);
      }
    } else if (bound > lo) {
      lo = bound;
      lo_tol = tol;
      lo_row = static_cast<int>(i);
    }
  }
  if (lo > hi) {
    if (lo - hi <= std::max(lo_tol, hi_tol)) {
      const double mid = 0.5 * (lo + hi);
      return {mid, mid};
    }
    std::ostringstream os;
    os.precision(17);
    os << "conditional interval is empty: lower bound " << lo << " from "
       << (lo_row == -2 ? std::string("nonnegativity") : "row " + std::to_string(lo_row)) << " exceeds upper bound "
       << hi << " from row " << hi_row;
    solver_error(os.str());
  }
  return {lo, hi};
}

Interval gibbs_conditional_bounds(const Polytope& poly, const Eigen::VectorXd& x, int k) {
  if (k < 0 || k >= poly.dim()) config_error("gibbs_conditional_bounds: coordinate out of range");
  if (poly.rows() == 0) return {poly.nonneg[k] ? 0.0 : -kInf, kInf};
  const Eigen::VectorXd rest = poly.b - poly.A * x + poly.A.col(k) * x(k);
  return conditional_interval(poly.A.col(k), rest, poly.b, poly.nonneg[k]);
}

Eigen::VectorXd find_interior_point(const Polytope& poly, const std::optional<Eigen::VectorXd>& hint) {
  poly.validate();
  const int K = poly.dim();
  const Polytope P = poly.explicit_rows();
  const int m = P.rows();
  Eigen::VectorXd norms(m);
  for (int i = 0; i < m; ++i) norms(i) = P.A.row(i).norm();
  for (int i = 0; i < m; ++i) {
    if (norms(i) < kZeroCoef && P.b(i) < 0.0) infeasible_error("polytope row " + std::to_string(i) + " reads 0 <= " + std::to_string(P.b(i)));
  }
  if (m == 0) return hint ? *hint : Eigen::VectorXd::Zero(K);

  // maximize t subject to a_i'x + |a_i| t <= b_i, t <= 1.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m + 1, K + 1);
  Eigen::VectorXd b(m + 1);
  A.topLeftCorner(m, K) = P.A;
  A.col(K).head(m) = norms;
  b.head(m) = P.b;
  A(m, K) = 1.0;
  b(m) = 1.0;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(K + 1);
  c(K) = 1.0;
  const LpResult lp = lp_maximize(c, A, b, std::vector<bool>(K + 1, false));
  if (lp.status != LpStatus::Optimal || lp.value <= 1e-9) {
    infeasible_error("polytope has an empty interior (max margin " +
                     std::to_string(lp.status == LpStatus::Optimal ? lp.value : -1.0) + ")");
  }
  const Eigen::VectorXd center = lp.x.head(K);
  const double t = lp.value;

  const Eigen::VectorXd h = hint ? *hint : Eigen::VectorXd::Zero(K);
  if (h.size() != K) config_error("find_interior_point: hint has wrong dimension");
  const Eigen::VectorXd dir = h - center;
  double theta = 1.0;
  for (int i = 0; i < m; ++i) {
    const double slope = P.A.row(i).dot(dir);
    if (slope <= 0.0) continue;
    const double room = P.b(i) - 0.5 * t * norms(i) - P.A.row(i).dot(center);
    theta = std::min(theta, std::max(0.0, room / slope));
  }
  return center + theta * dir;
}

Normalizability check_exp_normalizable(const Polytope& poly, const Eigen::VectorXd& m) {
  const int K = poly.dim();
  if (m.size() != K) config_error("check_exp_normalizable: coefficient has wrong dimension");
  const Polytope P = poly.explicit_rows();
  // Recession cone intersected with the unit box.
  Eigen::MatrixXd A(P.rows() + 2 * K, K);
  A << P.A, Eigen::MatrixXd::Identity(K, K), -Eigen::MatrixXd::Identity(K, K);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(P.rows() + 2 * K);
  b.tail(2 * K).setOnes();
  const std::vector<bool> free(K, false);
  const LpResult up = lp_maximize(m, A, b, free);
  if (up.status != LpStatus::Optimal) solver_error("check_exp_normalizable: cone LP failed");
  if (up.value > 1e-10) {
    return {false, "the log-density increases without bound along a recession direction"};
  }
  Eigen::MatrixXd A2(A.rows() + 1, K);
  A2 << A, -m.transpose();
  Eigen::VectorXd b2(A.rows() + 1);
  b2 << b, 0.0;
  for (int k = 0; k < K; ++k) {
    for (double s : {1.0, -1.0}) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(K);
      e(k) = s;
      const LpResult r = lp_maximize(e, A2, b2, free);
      if (r.status == LpStatus::Optimal && r.value > 1e-9) {
        return {false, "the log-density is flat along an unbounded direction (coordinate " + std::to_string(k) + ")"};
      }
    }
  }
  return {};
}

bool is_bounded(const Polytope& poly) {
  return check_exp_normalizable(poly, Eigen::VectorXd::Zero(poly.dim())).ok;
}

}  // namespace mc2
