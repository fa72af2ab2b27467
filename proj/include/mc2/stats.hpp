#pragma once

#include <cstddef>
#include <vector>

namespace mc2 {

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);
// Standard error of the mean by non-overlapping batch means; the default
// uses floor(sqrt(n)) batches.
double batch_means_se(const std::vector<double>& v, std::size_t batches = 0);

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges
  std::vector<long> counts;

  std::size_t bins() const { return counts.size(); }
  std::size_t mode_bin() const;
  std::size_t bin_of(double x) const;
};

Histogram histogram_fixed(const std::vector<double>& v, double lo, double hi, std::size_t bins);
// Freedman-Diaconis bin width, capped at max_bins.
Histogram histogram_fd(const std::vector<double>& v, std::size_t max_bins = 200);

double quantile_sorted(const std::vector<double>& sorted, double p);

}  // namespace mc2
