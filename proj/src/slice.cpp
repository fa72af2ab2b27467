#include "mc2/slice.hpp"

#include <algorithm>
#include <cmath>

#include "mc2/error.hpp"

namespace mc2 {

double exp_slice_level(double f_at_x, double kappa, RngStream& rng, SliceMode mode) {
  if (!(kappa > 0.0)) config_error("exp_slice_level: kappa must be positive");
  if (!std::isfinite(f_at_x)) config_error("exp_slice_level: objective value is not finite");
  const double e = rng.exponential(kappa);
  return mode == SliceMode::Maximize ? f_at_x - e : f_at_x + e;
}

std::vector<double> multi_slice_levels(const std::vector<double>& f_terms, double kappa, RngStream& rng) {
  std::vector<double> u(f_terms.size());
  for (std::size_t i = 0; i < f_terms.size(); ++i) u[i] = exp_slice_level(f_terms[i], kappa, rng);
  return u;
}

double slice_shrink_sample(const std::function<bool(double)>& in_region, double x0, const Interval& domain,
                           RngStream& rng, const SliceShrinkOptions& opts) {
  double w = domain.bounded() ? opts.width_fraction * domain.width() : opts.unbounded_width;
  if (!(w > 0.0)) return x0;
  double L = x0 - w * rng.uniform();
  double R = L + w;
  L = std::max(L, domain.lo);
  R = std::min(R, domain.hi);
  for (int s = 0; s < opts.max_steps && L > domain.lo && in_region(L); ++s) L = std::max(L - w, domain.lo);
  for (int s = 0; s < opts.max_steps && R < domain.hi && in_region(R); ++s) R = std::min(R + w, domain.hi);
  for (;;) {
    if (R - L < opts.min_width) {
      solver_error("slice_shrink_sample: bracket collapsed below width " + std::to_string(opts.min_width));
    }
    const double t = L + (R - L) * rng.uniform();
    if (in_region(t)) return t;
    (t < x0 ? L : R) = t;
  }
}

int slice_discrete_sample(int n_points, const std::function<bool(int)>& in_region, int current, RngStream& rng) {
  std::vector<int> ok;
  ok.reserve(n_points);
  for (int p = 0; p < n_points; ++p) {
    if (p == current || in_region(p)) ok.push_back(p);
  }
  return ok[rng.index(ok.size())];
}

Interval linear_slice_interval(const Polytope& poly, const Eigen::VectorXd& g, double u, const Eigen::VectorXd& x,
                               int k) {
  Eigen::MatrixXd row = -g.transpose();
  Eigen::VectorXd rb(1);
  rb(0) = -u;
  return gibbs_conditional_bounds(poly.with_rows(row, rb), x, k);
}

std::vector<int> discrete_multi_slice_chain(const std::vector<std::vector<double>>& terms, double kappa, int start,
                                            int iterations, RngStream& rng) {
  const int n = static_cast<int>(terms.size());
  if (n == 0 || start < 0 || start >= n) config_error("discrete_multi_slice_chain: bad domain or start");
  std::vector<int> visits;
  visits.reserve(iterations);
  int cur = start;
  for (int it = 0; it < iterations; ++it) {
    const std::vector<double> u = multi_slice_levels(terms[cur], kappa, rng);
    cur = slice_discrete_sample(
        n,
        [&](int p) {
          for (std::size_t i = 0; i < u.size(); ++i) {
            if (terms[p][i] < u[i]) return false;
          }
          return true;
        },
        cur, rng);
    visits.push_back(cur);
  }
  return visits;
}

}  // namespace mc2
