#include "mc2/waterfill.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mc2/error.hpp"

namespace mc2 {

void ParticleSet::validate() const {
  if (q.empty()) config_error("particle set is empty");
  double s = 0.0;
  for (double w : q) {
    if (!(w >= 0.0) || !std::isfinite(w)) config_error("particle weights must be nonnegative");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-12 * static_cast<double>(q.size())) {
    config_error("particle weights sum to " + std::to_string(s) + ", not 1");
  }
}

std::vector<double> CollapsedSet::dense(std::size_t M) const {
  std::vector<double> d(M, 0.0);
  for (std::size_t i = 0; i < indices.size(); ++i) d[indices[i]] = weights[i];
  return d;
}

double solve_alpha(const std::vector<double>& q, std::size_t N) {
  std::vector<double> pos;
  for (double w : q) {
    if (w > 0.0) pos.push_back(w);
  }
  if (N < 1) config_error("solve_alpha: N must be at least 1");
  if (N > pos.size()) {
    config_error("solve_alpha: N = " + std::to_string(N) + " exceeds the " + std::to_string(pos.size()) +
                 " positive weights");
  }
  std::sort(pos.begin(), pos.end(), std::greater<>());
  // Pin the m largest at 1; the rest contribute alpha * tail_sum.
  std::vector<double> tail(pos.size() + 1, 0.0);
  for (std::size_t j = pos.size(); j-- > 0;) tail[j] = tail[j + 1] + pos[j];
  for (std::size_t m = 0; m < N; ++m) {
    const double alpha = static_cast<double>(N - m) / tail[m];
    if (alpha * pos[m] <= 1.0 + 1e-12) return alpha;
  }
  // Unreachable for N <= count of positive weights; kept as a guard.
  double lo = 0.0, hi = 1.0 / pos.back();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    double s = 0.0;
    for (double w : pos) s += std::min(mid * w, 1.0);
    (s < static_cast<double>(N) ? lo : hi) = mid;
  }
  return hi;
}

CollapsedSet collapse(const ParticleSet& ps, std::size_t N, RngStream& rng) {
  ps.validate();
  CollapsedSet cs;
  cs.alpha = solve_alpha(ps.q, N);
  std::vector<std::size_t> below;
  std::vector<double> p;
  for (std::size_t j = 0; j < ps.q.size(); ++j) {
    if (ps.q[j] <= 0.0) continue;
    const double aq = cs.alpha * ps.q[j];
    if (aq >= 1.0) {
      cs.indices.push_back(j);
      cs.weights.push_back(ps.q[j]);
    } else {
      below.push_back(j);
      p.push_back(aq);
    }
  }
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  const auto need = static_cast<long>(std::llround(total));
  if (need > 0) {
    // Systematic sampling: one uniform offset, points u, u+1, ...; each p <= 1
    // so a particle catches at most one point.
    const double scale = static_cast<double>(need) / total;
    const double u = rng.uniform();
    double cum = 0.0;
    long next = 0;
    for (std::size_t i = 0; i < below.size() && next < need; ++i) {
      const double prev = cum;
      cum += p[i] * scale;
      if (u + static_cast<double>(next) < cum && u + static_cast<double>(next) >= prev) {
        cs.indices.push_back(below[i]);
        cs.weights.push_back(1.0 / cs.alpha);
        ++next;
      }
    }
  }
  std::vector<std::size_t> order(cs.indices.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cs.indices[a] < cs.indices[b]; });
  CollapsedSet sorted;
  sorted.alpha = cs.alpha;
  for (std::size_t o : order) {
    sorted.indices.push_back(cs.indices[o]);
    sorted.weights.push_back(cs.weights[o]);
  }
  return sorted;
}

CollapsedSet multinomial_resample(const ParticleSet& ps, std::size_t N, RngStream& rng) {
  ps.validate();
  if (N < 1) config_error("multinomial_resample: N must be at least 1");
  std::vector<double> cdf(ps.q.size());
  std::partial_sum(ps.q.begin(), ps.q.end(), cdf.begin());
  std::vector<long> counts(ps.q.size(), 0);
  for (std::size_t i = 0; i < N; ++i) {
    const double u = rng.uniform() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    ++counts[std::min<std::size_t>(it - cdf.begin(), ps.q.size() - 1)];
  }
  CollapsedSet cs;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] > 0) {
      cs.indices.push_back(j);
      cs.weights.push_back(static_cast<double>(counts[j]) / static_cast<double>(N));
    }
  }
  return cs;
}

double estimate_functional(const CollapsedSet& cs, const std::vector<double>& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < cs.indices.size(); ++i) {
    if (cs.indices[i] >= f.size()) config_error("estimate_functional: f is shorter than the particle set");
    s += f[cs.indices[i]] * cs.weights[i];
  }
  return s;
}

double waterfill_mse(const std::vector<double>& q, std::size_t N) {
  const double alpha = solve_alpha(q, N);
  double s = 0.0;
  for (double w : q) {
    if (w <= 0.0) continue;
    const double p = std::min(alpha * w, 1.0);
    s += w * w * (1.0 / p - 1.0);
  }
  return s;
}

std::vector<double> collapse_generations(
    const ParticleSet& initial, std::size_t N, int generations,
    const std::function<GenerationStep(std::size_t, RngStream&)>& children, RngStream& rng) {
  std::vector<double> q = initial.q;
  for (int g = 0; g < generations; ++g) {
    std::vector<double> pooled;
    for (std::size_t j = 0; j < q.size(); ++j) {
      if (q[j] <= 0.0) continue;
      const GenerationStep step = children(j, rng);
      double s = 0.0;
      for (double w : step.child_weights) s += w;
      if (!(s > 0.0)) continue;
      for (double w : step.child_weights) pooled.push_back(q[j] * w / s);
    }
    const double total = std::accumulate(pooled.begin(), pooled.end(), 0.0);
    if (!(total > 0.0)) solver_error("collapse_generations: all weights vanished");
    for (double& w : pooled) w /= total;
    std::size_t positive = 0;
    for (double w : pooled) positive += w > 0.0 ? 1 : 0;
    ParticleSet ps{pooled};
    q = positive > N ? collapse(ps, N, rng).dense(pooled.size()) : pooled;
    std::vector<double> compact;
    for (double w : q) {
      if (w > 0.0) compact.push_back(w);
    }
    q = compact;
  }
  return q;
}

}  // namespace mc2
