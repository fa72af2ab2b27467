#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mc2/error.hpp"
#include "mc2/samplers1d.hpp"
#include "mc2/slice.hpp"
#include "mc2/stochprog.hpp"
#include "mc2/truncexp_mv.hpp"

namespace mc2 {

namespace {

constexpr double kCandidateTol = 1e-12;

// Unbounded dual conditionals mean some scenario has no feasible recourse.
template <class F>
auto recourse_guard(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Config) throw;
    infeasible_error(std::string("two-stage: dual conditional not normalizable (recourse not complete): ") + e.what());
  }
}

// Sum over coordinates of log of the normalizer of exp(kappa a_i xi_i) on the
// conditional interval of xi_i given the rest. Degenerate intervals add 0.
double log_norm_sum(const Polytope& dual, const Eigen::VectorXd& a, const Eigen::VectorXd& xi, double kappa) {
  const Eigen::VectorXd Ax = dual.A * xi;
  double s = 0.0;
  for (int i = 0; i < dual.dim(); ++i) {
    const Eigen::VectorXd rest = dual.b - Ax + dual.A.col(i) * xi(i);
    const Interval iv = conditional_interval(dual.A.col(i), rest, dual.b, false);
    if (iv.lo < iv.hi) s += trunc_exp_log_normalizer(kappa * a(i), iv);
  }
  return s;
}

bool feasible_candidate(const Polytope& dual, const Eigen::VectorXd& xi) {
  const Eigen::VectorXd r = dual.A * xi - dual.b;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (r(i) > kCandidateTol * (1.0 + std::abs(dual.b(i)))) return false;
  }
  return true;
}

int draw_scenario(const std::vector<double>& cum, RngStream& rng) {
  const double u = rng.uniform() * cum.back();
  for (std::size_t s = 0; s < cum.size(); ++s) {
    if (u < cum[s]) return static_cast<int>(s);
  }
  return static_cast<int>(cum.size()) - 1;
}

}  // namespace

void TwoStageProblem::validate() const {
  const int n = dim_x(), m = dim_xi();
  if (n < 1) config_error("two-stage: c must be nonempty");
  if (m < 1 || W.cols() < 1) config_error("two-stage: W must be nonempty");
  if (discrete()) {
    for (const auto& p : x_points) {
      if (p.size() != n) config_error("two-stage: x_points entries must have length of c");
    }
  } else {
    S.validate();
    if (S.dim() != n) config_error("two-stage: S dimension differs from c");
    if (!is_bounded(S)) config_error("two-stage: first-stage set must be bounded");
  }
  if (scenarios.empty()) config_error("two-stage: no scenarios");
  double total = 0.0;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const auto& sc = scenarios[s];
    const std::string tag = "two-stage: scenario " + std::to_string(s) + ": ";
    if (sc.q.size() != W.cols()) config_error(tag + "q length must equal W columns");
    if (sc.h.size() != m) config_error(tag + "h length must equal W rows");
    if (sc.T.rows() != m || sc.T.cols() != n) config_error(tag + "T must be (W rows) x (length of c)");
    if (!(sc.prob >= 0.0)) config_error(tag + "probability must be nonnegative");
    total += sc.prob;
  }
  if (std::abs(total - 1.0) > 1e-9) config_error("two-stage: scenario probabilities must sum to 1");
  if (!(kappa_outer >= 0.0) || !(kappa > kappa_outer)) config_error("two-stage: need kappa > kappa_outer >= 0");
  if (J < 1) config_error("two-stage: J must be at least 1");
}

Polytope TwoStageProblem::dual_polytope(int s) const {
  return Polytope(W.transpose(), scenarios[s].q, std::vector<bool>(W.rows(), false));
}

DualNormalizerTable::DualNormalizerTable(const Polytope& dual, long max_bases) {
  const Polytope P = dual.explicit_rows();
  const int d = P.dim(), r = static_cast<int>(P.rows());
  if (r < d) return;
  Eigen::VectorXd b = P.b;
  for (int i = 0; i < r; ++i) b(i) += 1e-10 * (1.0 + std::abs(b(i))) * ((i * 7919) % 97 + 1) / 97.0;
  std::vector<bool> pick(r, false);
  std::fill(pick.begin(), pick.begin() + d, true);
  long bases = 0;
  std::vector<int> rows(d);
  do {
    if (++bases > max_bases) {
      v_.clear();
      return;
    }
    for (int i = 0, k = 0; i < r; ++i) {
      if (pick[i]) rows[k++] = i;
    }
    Eigen::MatrixXd B(d, d);
    Eigen::VectorXd bs(d);
    for (int k = 0; k < d; ++k) {
      B.row(k) = P.A.row(rows[k]);
      bs(k) = b(rows[k]);
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd v = lu.solve(bs);
    if ((P.A * v - b).maxCoeff() > 1e-12 * (1.0 + b.cwiseAbs().maxCoeff() + v.cwiseAbs().maxCoeff())) continue;
    const Eigen::MatrixXd G = -lu.inverse();
    for (int k = 0; k < d; ++k) {
      const Eigen::VectorXd g = G.col(k);
      if ((P.A * g).maxCoeff() <= 1e-12 * P.A.cwiseAbs().maxCoeff() * g.norm()) rays_.push_back(g / g.norm());
    }
    v_.push_back(v);
    G_.push_back(G);
    log_det_.push_back(std::log(std::abs(lu.determinant())));
  } while (std::prev_permutation(pick.begin(), pick.end()));
  ok_ = !v_.empty();
}

double DualNormalizerTable::evaluate(const Eigen::VectorXd& m, bool* singular) const {
  // Brion: sum over vertices of exp(m'v) / (|det B| prod_i w_i), w = -G'm.
  std::vector<double> logs, signs;
  const double scale = m.cwiseAbs().maxCoeff();
  for (std::size_t k = 0; k < v_.size(); ++k) {
    const Eigen::VectorXd w = -G_[k].transpose() * m;
    double l = m.dot(v_[k]) - log_det_[k], sg = 1.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      if (std::abs(w(i)) <= 1e-11 * scale * G_[k].col(i).norm()) {
        *singular = true;
        return 0.0;
      }
      l -= std::log(std::abs(w(i)));
      if (w(i) < 0.0) sg = -sg;
    }
    logs.push_back(l);
    signs.push_back(sg);
  }
  const double top = *std::max_element(logs.begin(), logs.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < logs.size(); ++k) sum += signs[k] * std::exp(logs[k] - top);
  if (!(sum > 0.0)) solver_error("dual normalizer: vertex sum lost all precision");
  return top + std::log(sum);
}

double DualNormalizerTable::log_normalizer(const Eigen::VectorXd& m) const {
  if (!ok_) config_error("dual normalizer: polyhedron has no vertices");
  for (const auto& ray : rays_) {
    if (m.dot(ray) >= -1e-12 * m.norm()) config_error("dual normalizer: exp(m'xi) grows along a recession ray");
  }
  bool singular = false;
  const double z = evaluate(m, &singular);
  if (!singular) return z;
  // removable singularity: a bounded edge orthogonal to m
  Eigen::VectorXd mp = m;
  const double eps = 1e-7 * (1.0 + m.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < m.size(); ++i) mp(i) += eps / (i + 1.0) * (i % 2 ? -1.0 : 1.0);
  singular = false;
  const double zp = evaluate(mp, &singular);
  if (singular) solver_error("dual normalizer: degenerate direction");
  return zp;
}

double ch_log_ratio(const Eigen::VectorXd& xi, int cand_s, const Eigen::VectorXd& cand_x, int curr_s,
                    const Eigen::VectorXd& curr_x, const TwoStageProblem& prob, double kappa) {
  const Polytope cand = prob.dual_polytope(cand_s), curr = prob.dual_polytope(curr_s);
  if (!feasible_candidate(cand, xi)) return -kInf;
  const Eigen::VectorXd a1 = prob.rhs(cand_s, cand_x), a0 = prob.rhs(curr_s, curr_x);
  return recourse_guard([&] {
    return kappa * xi.dot(a1 - a0) - (log_norm_sum(cand, a1, xi, kappa) - log_norm_sum(curr, a0, xi, kappa));
  });
}

double ch_metropolis_ratio(const Eigen::VectorXd& xi, int cand_s, const Eigen::VectorXd& cand_x, int curr_s,
                           const Eigen::VectorXd& curr_x, const TwoStageProblem& prob, double kappa) {
  return std::exp(ch_log_ratio(xi, cand_s, cand_x, curr_s, curr_x, prob, kappa));
}

TwoStageResult two_stage_mcmc(const TwoStageProblem& prob, const TwoStageOptions& opts, RngStream& rng) {
  prob.validate();
  if (opts.sweeps < 1 || opts.xi_sweeps < 1) config_error("two-stage: sweep counts must be positive");
  if (!(opts.burnin_fraction >= 0.0 && opts.burnin_fraction < 1.0)) {
    config_error("two-stage: burn-in fraction must be in [0, 1)");
  }
  const int J = prob.J, n = prob.dim_x();
  const double k0 = prob.kappa_outer, ke = prob.kappa - prob.kappa_outer;
  const int nsc = static_cast<int>(prob.scenarios.size());

  std::vector<Polytope> duals;
  std::vector<double> cum;
  for (int s = 0; s < nsc; ++s) {
    duals.push_back(prob.dual_polytope(s));
    cum.push_back((cum.empty() ? 0.0 : cum.back()) + prob.scenarios[s].prob);
  }

  int x_idx = 0;
  Eigen::VectorXd x = prob.discrete() ? prob.x_points[0] : find_interior_point(prob.S);
  std::vector<int> sc(J);
  std::vector<Eigen::VectorXd> xi(J);
  for (int j = 0; j < J; ++j) {
    sc[j] = draw_scenario(cum, rng);
    xi[j] = find_interior_point(duals[sc[j]]);
  }
  std::vector<DualNormalizerTable> tables;
  if (opts.normalizer == DualNormalizer::Exact) {
    for (int s = 0; s < nsc; ++s) {
      tables.emplace_back(duals[s]);
      if (!tables.back().available()) {
        config_error("two-stage: scenario " + std::to_string(s) +
                     ": exact dual normalizer unavailable (no vertices or too many bases); use the coordinate form");
      }
    }
  }
  // log Z_kappa for scenario s at rhs a; the coordinate form depends on xi
  auto lognorm = [&](int s, const Eigen::VectorXd& a, const Eigen::VectorXd& v) {
    if (tables.empty()) return log_norm_sum(duals[s], a, v, prob.kappa);
    return tables[s].log_normalizer(prob.kappa * a);
  };
  std::vector<double> lns(J);
  auto refresh = [&](int j) { lns[j] = lognorm(sc[j], prob.rhs(sc[j], x), xi[j]); };

  TwoStageResult res;
  for (int k = 0; k < n; ++k) res.trace.names.push_back("x" + std::to_string(k + 1));
  for (int j = 0; j < J; ++j) res.trace.extra_names.push_back("omega" + std::to_string(j + 1));
  res.trace.sense = Sense::Minimize;
  res.trace.seed = rng.seed();
  res.trace.stream = rng.stream();
  const int burn = static_cast<int>(opts.burnin_fraction * opts.sweeps);
  long w_prop = 0, w_acc = 0, x_prop = 0, x_acc = 0;
  Eigen::VectorXd extra(J);

  recourse_guard([&] {
    for (int it = 0; it < opts.sweeps; ++it) {
      for (int j = 0; j < J; ++j) {
        const Eigen::VectorXd m = ke * prob.rhs(sc[j], x);
        for (int r = 0; r < opts.xi_sweeps; ++r) gibbs_sweep_logexp(duals[sc[j]], m, xi[j], rng);
      }
      for (int j = 0; j < J; ++j) {
        const int cand = draw_scenario(cum, rng);
        ++w_prop;
        if (cand == sc[j]) {
          ++w_acc;
          continue;
        }
        if (!feasible_candidate(duals[cand], xi[j])) continue;
        const Eigen::VectorXd a1 = prob.rhs(cand, x), a0 = prob.rhs(sc[j], x);
        const double l1 = lognorm(cand, a1, xi[j]);
        const double l0 = lognorm(sc[j], a0, xi[j]);
        if (std::log(rng.uniform_open()) < ke * xi[j].dot(a1 - a0) - (l1 - l0)) {
          sc[j] = cand;
          ++w_acc;
        }
      }
      for (int j = 0; j < J; ++j) refresh(j);

      if (prob.discrete()) {
        const int cand = static_cast<int>(rng.index(prob.x_points.size()));
        ++x_prop;
        if (cand == x_idx) {
          ++x_acc;
        } else {
          const Eigen::VectorXd& xn = prob.x_points[cand];
          double la = -J * k0 * prob.c.dot(xn - x);
          std::vector<double> lnew(J);
          for (int j = 0; j < J; ++j) {
            const Eigen::VectorXd a1 = prob.rhs(sc[j], xn), a0 = prob.rhs(sc[j], x);
            lnew[j] = lognorm(sc[j], a1, xi[j]);
            la += ke * xi[j].dot(a1 - a0) - (lnew[j] - lns[j]);
          }
          if (std::log(rng.uniform_open()) < la) {
            x = xn;
            x_idx = cand;
            lns = lnew;
            ++x_acc;
          }
        }
      } else {
        // Slice update per coordinate on the exact x-conditional: the linear
        // part plus minus the sum of log normalizers.
        auto log_cond = [&](const Eigen::VectorXd& y, std::vector<double>* out) {
          double l = -J * k0 * prob.c.dot(y);
          for (int j = 0; j < J; ++j) {
            const Eigen::VectorXd a = prob.rhs(sc[j], y);
            double z;
            try {
              z = lognorm(sc[j], a, xi[j]);
            } catch (const Error& e) {
              if (e.kind() != ErrorKind::Config) throw;
              return -kInf;
            }
            if (out) (*out)[j] = z;
            l += ke * xi[j].dot(a) - z;
          }
          return l;
        };
        for (int k = 0; k < n; ++k) {
          const Interval iv = gibbs_conditional_bounds(prob.S, x, k);
          if (!(iv.lo < iv.hi)) continue;
          const double level = log_cond(x, nullptr) - rng.exponential(1.0);
          Eigen::VectorXd y = x;
          const double t = slice_shrink_sample(
              [&](double v) {
                y(k) = v;
                return log_cond(y, nullptr) >= level;
              },
              x(k), iv, rng);
          ++x_prop;
          if (t != x(k)) ++x_acc;
          x(k) = t;
        }
        log_cond(x, &lns);
      }

      double value = 0.0;
      for (int j = 0; j < J; ++j) {
        value += xi[j].dot(prob.rhs(sc[j], x));
        extra(j) = sc[j];
      }
      res.trace.push(x, prob.c.dot(x) + value / J, prob.kappa, 0, it < burn);
      res.trace.extra.push_back(extra);
      res.x_index.push_back(x_idx);
      res.omega0.push_back(sc[0]);
    }
    return 0;
  });
  res.trace.close_level(0, prob.kappa, x_prop ? static_cast<double>(x_acc) / x_prop : 1.0);
  res.x_hat = mode_estimate(res.trace, ModeMethod::ErgodicMean);
  const auto v = res.trace.final_values();
  res.value_hat = mean(v);
  res.value_se = batch_means_se(v);
  res.omega_acceptance = w_prop ? static_cast<double>(w_acc) / w_prop : 1.0;
  res.x_acceptance = x_prop ? static_cast<double>(x_acc) / x_prop : 1.0;
  return res;
}

DualValue dual_value_estimate(const TwoStageProblem& prob, int s, const Eigen::VectorXd& x, double kappa, int sweeps,
                              RngStream& rng) {
  if (s < 0 || s >= static_cast<int>(prob.scenarios.size())) config_error("dual value: scenario index out of range");
  if (!(kappa > 0.0) || sweeps < 2) config_error("dual value: need kappa > 0 and sweeps >= 2");
  const Polytope dual = prob.dual_polytope(s);
  const Eigen::VectorXd a = prob.rhs(s, x);
  const Normalizability nz = check_exp_normalizable(dual, a);
  if (!nz.ok) infeasible_error("dual value: recourse problem is infeasible: " + nz.reason);
  Eigen::VectorXd xi = find_interior_point(dual);
  const Eigen::VectorXd m = kappa * a;
  std::vector<double> vals;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(xi.size());
  for (int it = 0; it < sweeps; ++it) {
    gibbs_sweep_logexp(dual, m, xi, rng);
    if (it >= sweeps / 2) {
      vals.push_back(xi.dot(a));
      acc += xi;
    }
  }
  DualValue out;
  out.mean = mean(vals);
  out.se = batch_means_se(vals);
  out.xi_hat = acc / static_cast<double>(vals.size());
  return out;
}

}  // namespace mc2
