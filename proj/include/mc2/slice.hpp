#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "mc2/polytope.hpp"
#include "mc2/rng.hpp"

namespace mc2 {

// Internally everything is maximization: levels sit below f.
// Minimize negates at the boundary, so its level sits above f.
enum class SliceMode { Maximize, Minimize };

struct SliceState {
  Eigen::VectorXd x;
  std::vector<double> u;
  double kappa = 1.0;
};

// Maximize: f - Exp(kappa). Minimize: f + Exp(kappa), i.e. the uniform slice
// on (0, exp(-kappa f)) expressed on the f scale.
double exp_slice_level(double f_at_x, double kappa, RngStream& rng, SliceMode mode = SliceMode::Maximize);

// One exponential level per additive term; integrating them out leaves
// exp(kappa * sum f_i).
std::vector<double> multi_slice_levels(const std::vector<double>& f_terms, double kappa, RngStream& rng);

struct SliceShrinkOptions {
  double width_fraction = 0.1;  // initial width relative to the domain width
  double unbounded_width = 1.0; // initial width when the domain is unbounded
  int max_steps = 20;           // stepping-out steps per side
  double min_width = 1e-14;
};

// Stepping-out then shrinkage on a 1-D domain. in_region(t) must hold at x0.
double slice_shrink_sample(const std::function<bool(double)>& in_region, double x0, const Interval& domain,
                           RngStream& rng, const SliceShrinkOptions& opts = {});

// Uniform over the listed points satisfying the predicate. current must qualify.
int slice_discrete_sample(int n_points, const std::function<bool(int)>& in_region, int current, RngStream& rng);

// Linear objective f(x) = g'x: the slice {g'x >= u} is one more row -g'x <= -u.
Interval linear_slice_interval(const Polytope& poly, const Eigen::VectorXd& g, double u, const Eigen::VectorXd& x,
                               int k);

// Slice-within-Gibbs on a discrete domain for an additive objective given as
// a per-point, per-term table terms[p][i]. Returns the visited point indices.
std::vector<int> discrete_multi_slice_chain(const std::vector<std::vector<double>>& terms, double kappa, int start,
                                            int iterations, RngStream& rng);

}  // namespace mc2
