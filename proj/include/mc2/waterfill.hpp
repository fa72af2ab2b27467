#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "mc2/rng.hpp"

namespace mc2 {

struct ParticleSet {
  std::vector<double> q;  // nonnegative, sums to 1
  void validate() const;
  std::size_t size() const { return q.size(); }
};

struct CollapsedSet {
  std::vector<std::size_t> indices;  // surviving particles, increasing
  std::vector<double> weights;       // Q_j for each survivor
  double alpha = 0.0;

  // Dense Q over the original M particles.
  std::vector<double> dense(std::size_t M) const;
};

// Root of N = sum_j min(alpha q_j, 1) by sort and scan over the breakpoints.
double solve_alpha(const std::vector<double>& q, std::size_t N);

// Survivors with alpha q_j >= 1 keep q_j; the rest survive with probability
// alpha q_j at weight 1/alpha, chosen by systematic sampling so exactly N
// particles survive.
CollapsedSet collapse(const ParticleSet& ps, std::size_t N, RngStream& rng);

// Baseline: N multinomial draws, weight count/N.
CollapsedSet multinomial_resample(const ParticleSet& ps, std::size_t N, RngStream& rng);

double estimate_functional(const CollapsedSet& cs, const std::vector<double>& f);

// Closed-form sum_j q_j^2 (1/p_j - 1) with p_j = min(alpha q_j, 1).
double waterfill_mse(const std::vector<double>& q, std::size_t N);

// Repeated branching and collapsing: each survivor spawns children whose
// weights come from `children(parent_index_in_generation, rng)`; the pooled
// set is renormalized and collapsed back to N. Returns the final weights.
struct GenerationStep {
  std::vector<double> child_weights;  // unnormalized, one per child
};
std::vector<double> collapse_generations(
    const ParticleSet& initial, std::size_t N, int generations,
    const std::function<GenerationStep(std::size_t, RngStream&)>& children, RngStream& rng);

}  // namespace mc2
