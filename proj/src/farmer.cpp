#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "mc2/error.hpp"
#include "mc2/samplers1d.hpp"
#include "mc2/stochprog.hpp"
#include "mc2/truncexp_mv.hpp"

namespace mc2 {

namespace {

// Linear pieces a + s y2 of the profile value; V is their minimum.
struct Piece {
  double a;
  double s;
};

std::array<Piece, 3> profile_pieces(const FarmerInstance& f, double x, const Eigen::Vector2d& w) {
  return {{{f.p1 * x, f.p2 - f.p1},
           {f.p1 * w(0) / 110.0, f.p2 - 30.0 * f.p1 / 110.0},
           {f.p1 * w(1) / 120.0, f.p2 - 210.0 * f.p1 / 120.0}}};
}

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

void check_point(const FarmerInstance& f, double x, const Eigen::Vector2d& w) {
  if (!(x > f.x_lo && x <= f.x_hi)) config_error("farmer: x outside (x_lo, x_hi]");
  if (w(0) < f.w1_lo || w(0) > f.w1_hi || w(1) < f.w2_lo || w(1) > f.w2_hi) {
    config_error("farmer: omega outside its bounds");
  }
}

}  // namespace

void FarmerInstance::validate() const {
  if (!(x_lo >= 0.0 && x_lo < x_hi)) config_error("farmer: need 0 <= x_lo < x_hi");
  if (!(w1_lo > 0.0 && w1_lo <= w1_hi) || !(w2_lo > 0.0 && w2_lo <= w2_hi)) {
    config_error("farmer: omega bounds must be positive with lo <= hi");
  }
  if (!(k >= 0.0)) config_error("farmer: k must be nonnegative");
  if (!(p1 > 0.0 && p2 > 0.0)) config_error("farmer: prices must be positive");
}

Polytope FarmerInstance::inner_polytope(double x, const Eigen::Vector2d& omega) const {
  Eigen::MatrixXd A(3, 2);
  A << 1.0, 1.0, 110.0, 30.0, 120.0, 210.0;
  Eigen::VectorXd b(3);
  b << x, omega(0), omega(1);
  return Polytope(A, b, {true, true});
}

double FarmerInstance::y2_max(double x, const Eigen::Vector2d& omega) const {
  return std::min({x, omega(0) / 30.0, omega(1) / 210.0});
}

double FarmerInstance::profile_value(double y2, double x, const Eigen::Vector2d& omega) const {
  double v = kInf;
  for (const Piece& p : profile_pieces(*this, x, omega)) v = std::min(v, p.a + p.s * y2);
  return v;
}

std::vector<double> farmer_default_ladder(double kappa) {
  std::vector<double> ladder;
  for (double k = kappa / 5.0; k >= 0.01; k /= 5.0) ladder.push_back(k);
  std::reverse(ladder.begin(), ladder.end());
  return ladder;
}

FarmerInnerResult farmer_inner_gibbs(const FarmerInstance& inst, double x, const Eigen::Vector2d& omega, double kappa,
                                     bool use_slice, int sweeps, RngStream& rng, const FarmerInnerOptions& opts) {
  inst.validate();
  check_point(inst, x, omega);
  if (!(kappa > 0.0)) config_error("farmer inner: kappa must be positive");
  if (sweeps < 1 || opts.warmup_sweeps < 0) config_error("farmer inner: sweep counts must be positive");
  if (!(opts.burnin_fraction >= 0.0 && opts.burnin_fraction < 1.0)) {
    config_error("farmer inner: burn-in fraction must be in [0, 1)");
  }
  std::vector<double> kappas = opts.ladder.empty() ? farmer_default_ladder(kappa) : opts.ladder;
  for (std::size_t i = 0; i < kappas.size(); ++i) {
    if (!(kappas[i] > 0.0) || kappas[i] >= kappa || (i > 0 && kappas[i] <= kappas[i - 1])) {
      config_error("farmer inner: warm-up ladder must be positive, increasing and below kappa");
    }
  }
  kappas.push_back(kappa);

  const Polytope poly = inst.inner_polytope(x, omega);
  const Eigen::Vector2d price(inst.p1, inst.p2);
  Eigen::VectorXd y = opts.start ? Eigen::VectorXd(*opts.start) : find_interior_point(poly);
  if (!poly.contains(y)) config_error("farmer inner: start point is infeasible");

  FarmerInnerResult res;
  res.trace.names = {"y1", "y2"};
  res.trace.sense = Sense::Maximize;
  res.trace.seed = rng.seed();
  res.trace.stream = rng.stream();
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd slice_row = -price.transpose();
  Eigen::VectorXd slice_b(1);

  for (int lvl = 0; lvl < static_cast<int>(kappas.size()); ++lvl) {
    const double k = kappas[lvl];
    const bool last = lvl + 1 == static_cast<int>(kappas.size());
    const int n = last ? sweeps : opts.warmup_sweeps;
    const int burn = last ? static_cast<int>(opts.burnin_fraction * n) : n;
    const Eigen::VectorXd m = k * price;
    for (int it = 0; it < n; ++it) {
      if (use_slice) {
        slice_b(0) = -(price.dot(y) - rng.exponential(k));
        gibbs_sweep_logexp(poly.with_rows(slice_row, slice_b), zero, y, rng);
      } else {
        gibbs_sweep_logexp(poly, m, y, rng);
      }
      res.trace.push(y, price.dot(y), k, lvl, it < burn);
    }
    res.trace.close_level(lvl, k);
  }
  res.y_hat = mode_estimate(res.trace, ModeMethod::ErgodicMean);
  res.value = inst.inner_value(res.y_hat);
  const auto v = res.trace.final_values();
  res.value_rb = mean(v);
  res.value_se = batch_means_se(v);
  return res;
}

double PiecewiseExp::log_normalizer() const {
  double z = -kInf;
  for (std::size_t i = 0; i < slope.size(); ++i) {
    z = log_add(z, intercept[i] + trunc_exp_log_normalizer(slope[i], Interval{breaks[i], breaks[i + 1]}));
  }
  return z;
}

double PiecewiseExp::sample(RngStream& rng) const {
  std::vector<double> lw(slope.size());
  double z = -kInf;
  for (std::size_t i = 0; i < slope.size(); ++i) {
    lw[i] = intercept[i] + trunc_exp_log_normalizer(slope[i], Interval{breaks[i], breaks[i + 1]});
    z = log_add(z, lw[i]);
  }
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t seg = slope.size() - 1;
  for (std::size_t i = 0; i < slope.size(); ++i) {
    acc += std::exp(lw[i] - z);
    if (u < acc) {
      seg = i;
      break;
    }
  }
  return trunc_exp_sample(slope[seg], Interval{breaks[seg], breaks[seg + 1]}, rng);
}

double PiecewiseExp::log_density(double y) const {
  if (slope.empty() || y < breaks.front() || y > breaks.back()) return -kInf;
  const auto it = std::upper_bound(breaks.begin(), breaks.end(), y);
  const std::size_t i = std::min(slope.size() - 1, static_cast<std::size_t>(it - breaks.begin()) - 1);
  return intercept[i] + slope[i] * y - log_normalizer();
}

PiecewiseExp farmer_y2_marginal(const FarmerInstance& inst, double x, const Eigen::Vector2d& omega, double kappa) {
  if (!(kappa > 0.0)) config_error("farmer marginal: kappa must be positive");
  const double top = inst.y2_max(x, omega);
  if (!(top > 0.0)) infeasible_error("farmer marginal: empty y2 range");
  const auto pieces = profile_pieces(inst, x, omega);
  std::vector<double> br = {0.0, top};
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    for (std::size_t j = i + 1; j < pieces.size(); ++j) {
      const double ds = pieces[i].s - pieces[j].s;
      if (std::abs(ds) < 1e-300) continue;
      const double y = (pieces[j].a - pieces[i].a) / ds;
      if (y > 0.0 && y < top) br.push_back(y);
    }
  }
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  PiecewiseExp pe;
  pe.breaks.push_back(br.front());
  for (std::size_t i = 0; i + 1 < br.size(); ++i) {
    const double mid = 0.5 * (br[i] + br[i + 1]);
    const Piece* act = &pieces[0];
    for (const Piece& p : pieces) {
      if (p.a + p.s * mid < act->a + act->s * mid) act = &p;
    }
    pe.breaks.push_back(br[i + 1]);
    pe.intercept.push_back(kappa * act->a);
    pe.slope.push_back(kappa * act->s);
  }
  return pe;
}

double farmer_log_Z(const FarmerInstance& inst, double x, const Eigen::Vector2d& omega, double kappa) {
  return farmer_y2_marginal(inst, x, omega, kappa).log_normalizer();
}

Schedule farmer_outer_schedule(double kappa, int iterations) {
  if (!(kappa > 0.0)) config_error("farmer outer: kappa must be positive");
  if (iterations < 8) config_error("farmer outer: need at least 8 iterations");
  Schedule s;
  s.kappas = {kappa / 125.0, kappa / 25.0, kappa / 5.0, kappa};
  // the reported segment is exactly the second half; warm levels round up
  s.final_sweeps = iterations - iterations / 2;
  s.sweeps_per_level = (iterations / 2 + 2) / 3;
  s.burnin_fraction = 0.0;
  return s;
}

FarmerOuterResult farmer_outer_mcmc(const FarmerInstance& inst, int J, const Schedule& schedule, RngStream& rng,
                                    int bins) {
  inst.validate();
  schedule.validate();
  if (J < 1) config_error("farmer outer: J must be at least 1");
  if (bins < 1) config_error("farmer outer: bins must be positive");
  if (schedule.kappas.front() <= 0.0) config_error("farmer outer: kappa levels must be positive");

  double x = 0.5 * (inst.x_lo + inst.x_hi);
  std::vector<Eigen::Vector2d> omega(J, Eigen::Vector2d(0.5 * (inst.w1_lo + inst.w1_hi), 0.5 * (inst.w2_lo + inst.w2_hi)));
  std::vector<double> y2(J), u(J);
  for (int j = 0; j < J; ++j) {
    y2[j] = 0.5 * inst.y2_max(x, omega[j]);
    u[j] = inst.profile_value(y2[j], x, omega[j]);
  }

  FarmerOuterResult res;
  res.trace.names = {"x"};
  res.trace.sense = Sense::Maximize;
  res.trace.seed = rng.seed();
  res.trace.stream = rng.stream();
  Eigen::VectorXd xv(1);

  for (int lvl = 0; lvl < schedule.levels(); ++lvl) {
    const double k = schedule.kappas[lvl];
    const int burn = schedule.burnin_at(lvl);
    for (int it = 0; it < schedule.sweeps_at(lvl); ++it) {
      for (int j = 0; j < J; ++j) {
        u[j] = inst.profile_value(y2[j], x, omega[j]) - rng.exponential(k);
        // {y2 in (0, y2_max) : a_i + s_i y2 >= u for all pieces} is an interval.
        double lo = 0.0, hi = inst.y2_max(x, omega[j]);
        for (const Piece& p : profile_pieces(inst, x, omega[j])) {
          if (p.s > 0.0) lo = std::max(lo, (u[j] - p.a) / p.s);
          if (p.s < 0.0) hi = std::min(hi, (u[j] - p.a) / p.s);
        }
        if (lo > hi) lo = hi = y2[j];
        y2[j] = rng.uniform(lo, hi);
        if (!inst.degenerate()) {
          // omega bounds from the omega-dependent pieces and y2 <= y2_max.
          const double base = (u[j] - inst.p2 * y2[j]) / inst.p1;
          const double w1 = std::max({inst.w1_lo, 110.0 * base + 30.0 * y2[j], 30.0 * y2[j]});
          const double w2 = std::max({inst.w2_lo, 120.0 * base + 210.0 * y2[j], 210.0 * y2[j]});
          omega[j](0) = w1 < inst.w1_hi ? rng.uniform(w1, inst.w1_hi) : inst.w1_hi;
          omega[j](1) = w2 < inst.w2_hi ? rng.uniform(w2, inst.w2_hi) : inst.w2_hi;
        }
      }
      double xlo = inst.x_lo;
      for (int j = 0; j < J; ++j) {
        xlo = std::max({xlo, y2[j] + (u[j] - inst.p2 * y2[j]) / inst.p1, y2[j]});
      }
      x = xlo < inst.x_hi ? trunc_exp_sample(-k * J * inst.k, Interval{xlo, inst.x_hi}, rng) : inst.x_hi;
      double value = 0.0;
      for (int j = 0; j < J; ++j) value += inst.profile_value(y2[j], x, omega[j]);
      xv(0) = x;
      res.trace.push(xv, value / J - inst.k * x, k, lvl, it < burn);
    }
    res.trace.close_level(lvl, k);
  }

  std::vector<double> xs;
  for (auto i : res.trace.final_indices()) xs.push_back(res.trace.draws[i](0));
  res.x_hat = mean(xs);
  res.histogram = histogram_fixed(xs, inst.x_lo, inst.x_hi, static_cast<std::size_t>(bins));
  const std::size_t m = res.histogram.mode_bin();
  res.modal_interval = Interval{res.histogram.edges[m], res.histogram.edges[m + 1]};
  return res;
}

}  // namespace mc2
