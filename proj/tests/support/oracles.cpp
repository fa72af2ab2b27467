#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace oracle {

double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

KsResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double D = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = cdf(x[i]);
    D = std::max({D, (i + 1) / n - F, F - i / n});
  }
  const double sn = std::sqrt(n);
  return {D, kolmogorov_q((sn + 0.12 + 0.11 / sn) * D)};
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double D = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    D = std::max(D, std::abs(i / na - j / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {D, kolmogorov_q((ne + 0.12 + 0.11 / ne) * D)};
}

double integrate(const std::function<double(double)>& f, double a, double b, int pieces) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  if (!std::isfinite(b)) return GK::integrate(f, a, b, 15, 1e-12);
  double s = 0.0;
  const double h = (b - a) / pieces;
  for (int i = 0; i < pieces; ++i) {
    const double lo = a + i * h, hi = i + 1 == pieces ? b : a + (i + 1) * h;
    s += GK::integrate(f, lo, hi, 8, 1e-12);
  }
  return s;
}

double trunc_exp_cdf(double m, double a, double b, double x) {
  if (x <= a) return 0.0;
  if (x >= b) return 1.0;
  // Shift by the larger endpoint value to keep the integrand bounded.
  const double top = m > 0 ? m * b : m * a;
  auto f = [&](double t) { return std::exp(m * t - top); };
  return integrate(f, a, x, 4) / integrate(f, a, b, 4);
}

double trunc_normal_cdf(double mean, double sd, double a, double b, double x) {
  boost::math::normal N(mean, sd);
  if (x <= a) return 0.0;
  if (x >= b) return 1.0;
  // Work in the tail that keeps precision.
  if (a > mean) {
    const double ca = boost::math::cdf(boost::math::complement(N, a));
    const double cb = std::isfinite(b) ? boost::math::cdf(boost::math::complement(N, b)) : 0.0;
    return (ca - boost::math::cdf(boost::math::complement(N, x))) / (ca - cb);
  }
  const double fa = std::isfinite(a) ? boost::math::cdf(N, a) : 0.0;
  const double fb = std::isfinite(b) ? boost::math::cdf(N, b) : 1.0;
  return (boost::math::cdf(N, x) - fa) / (fb - fa);
}

double trunc_gamma_cdf(double shape, double rate, double upper, double x) {
  if (x <= 0) return 0.0;
  if (x >= upper) return 1.0;
  return boost::math::gamma_p(shape, rate * x) / boost::math::gamma_p(shape, rate * upper);
}

double tilted_exp_cdf(double q, double b, double z) {
  if (z <= 0) return 0.0;
  if (z >= b) return 1.0;
  auto f = [&](double t) { return std::exp(-t) * (1.0 - std::exp(-q * (b - t))); };
  return integrate(f, 0.0, z, 8) / integrate(f, 0.0, b, 8);
}

std::vector<double> exp_sum_draws(const std::vector<double>& rates, int n, std::mt19937_64& eng) {
  std::vector<double> out(n);
  for (auto& v : out) {
    v = 0.0;
    for (double r : rates) v += std::exponential_distribution<double>(r)(eng);
  }
  return out;
}

std::vector<Eigen::VectorXd> simplex_exp_rejection(const Eigen::VectorXd& rates, int n, std::mt19937_64& eng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const Eigen::Index d = rates.size();
  const double lmin = std::min(0.0, rates.minCoeff());
  std::vector<Eigen::VectorXd> out;
  out.reserve(n);
  Eigen::VectorXd x(d);
  while (static_cast<int>(out.size()) < n) {
    for (Eigen::Index j = 0; j < d; ++j) x(j) = U(eng);
    if (x.sum() > 1.0) continue;
    // Envelope exp(-lmin) bounds exp(-rates'x) on the simplex for rates >= lmin.
    if (U(eng) <= std::exp(-rates.dot(x) + lmin)) out.push_back(x);
  }
  return out;
}

std::vector<Eigen::VectorXd> polytope_exp_rejection(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                                    const Eigen::VectorXd& m, const Eigen::VectorXd& lo,
                                                    const Eigen::VectorXd& hi, int n, std::mt19937_64& eng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const Eigen::Index d = lo.size();
  double top = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) top += std::max(m(k) * lo(k), m(k) * hi(k));
  std::vector<Eigen::VectorXd> out;
  out.reserve(n);
  Eigen::VectorXd x(d);
  while (static_cast<int>(out.size()) < n) {
    for (Eigen::Index k = 0; k < d; ++k) x(k) = lo(k) + (hi(k) - lo(k)) * U(eng);
    if (((A * x - b).array() > 0.0).any()) continue;
    if (U(eng) <= std::exp(m.dot(x) - top)) out.push_back(x);
  }
  return out;
}

std::vector<Eigen::VectorXd> truncnorm_rejection(const Eigen::VectorXd& mu, const Eigen::MatrixXd& Sigma,
                                                 const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int n,
                                                 std::mt19937_64& eng) {
  std::normal_distribution<double> Z(0.0, 1.0);
  const Eigen::MatrixXd L = Sigma.llt().matrixL();
  std::vector<Eigen::VectorXd> out;
  out.reserve(n);
  Eigen::VectorXd z(mu.size());
  while (static_cast<int>(out.size()) < n) {
    for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = Z(eng);
    const Eigen::VectorXd x = mu + L * z;
    if (((A * x - b).array() <= 0.0).all()) out.push_back(x);
  }
  return out;
}

double vertex_max(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                  Eigen::VectorXd* argmax) {
  const int n = static_cast<int>(A.cols()), m = static_cast<int>(A.rows());
  double best = std::numeric_limits<double>::quiet_NaN();
  std::vector<int> pick(n);
  for (int i = 0; i < n; ++i) pick[i] = i;
  if (m < n) return best;
  while (true) {
    Eigen::MatrixXd M(n, n);
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) {
      M.row(i) = A.row(pick[i]);
      r(i) = b(pick[i]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (lu.isInvertible()) {
      const Eigen::VectorXd x = lu.solve(r);
      const Eigen::VectorXd viol = A * x - b;
      bool ok = true;
      for (int i = 0; i < m; ++i) ok = ok && viol(i) <= 1e-9 * (1.0 + std::abs(b(i)));
      if (ok && (std::isnan(best) || c.dot(x) > best)) {
        best = c.dot(x);
        if (argmax) *argmax = x;
      }
    }
    int i = n - 1;
    while (i >= 0 && pick[i] == m - n + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int k = i + 1; k < n; ++k) pick[k] = pick[k - 1] + 1;
  }
  return best;
}

double farmer_vertex_value(double x, double w1, double w2, Eigen::VectorXd* y) {
  Eigen::MatrixXd A(5, 2);
  A << 1, 1, 110, 30, 120, 210, -1, 0, 0, -1;
  Eigen::VectorXd b(5);
  b << x, w1, w2, 0, 0;
  return vertex_max(Eigen::Vector2d(143, 60), A, b, y);
}

double farmer_grid_argmax(double k, double w1, double w2, int cells) {
  double best = -std::numeric_limits<double>::infinity(), arg = 0.0;
  for (int i = 0; i < cells; ++i) {
    const double x = (i + 0.5) * 100.0 / cells;
    const double v = farmer_vertex_value(x, w1, w2) - k * x;
    if (v > best) {
      best = v;
      arg = x;
    }
  }
  return arg;
}

double farmer_log_Z_quadrature(double x, double w1, double w2, double kappa) {
  const double top = std::min({x, w1 / 30.0, w2 / 210.0});
  auto V = [&](double y2) { return 60.0 * y2 + 143.0 * std::min({x - y2, (w1 - 30.0 * y2) / 110.0, (w2 - 210.0 * y2) / 120.0}); };
  double vmax = std::max(V(0.0), V(top));
  for (int i = 1; i < 20000; ++i) vmax = std::max(vmax, V(top * i / 20000.0));
  auto f = [&](double y2) { return std::exp(kappa * (V(y2) - vmax)); };
  return kappa * vmax + std::log(integrate(f, 0.0, top, 2000));
}

std::vector<double> column(const std::vector<Eigen::VectorXd>& v, int k) {
  std::vector<double> c;
  c.reserve(v.size());
  for (const auto& x : v) c.push_back(x(k));
  return c;
}

std::vector<double> row_sums(const std::vector<Eigen::VectorXd>& v) {
  std::vector<double> c;
  c.reserve(v.size());
  for (const auto& x : v) c.push_back(x.sum());
  return c;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

}  // namespace oracle
