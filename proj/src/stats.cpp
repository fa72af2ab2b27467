#include "mc2/stats.hpp"

#include <algorithm>
#include <cmath>

#include "mc2/error.hpp"

namespace mc2 {

double mean(const std::vector<double>& v) {
  if (v.empty()) solver_error("mean of an empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double batch_means_se(const std::vector<double>& v, std::size_t batches) {
  const std::size_t n = v.size();
  if (n < 4) return n < 2 ? 0.0 : std::sqrt(variance(v) / static_cast<double>(n));
  if (batches == 0) batches = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  batches = std::clamp<std::size_t>(batches, 2, n / 2);
  const std::size_t len = n / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) s += v[i];
    means[b] = s / static_cast<double>(len);
  }
  return std::sqrt(variance(means) / static_cast<double>(batches));
}

std::size_t Histogram::mode_bin() const {
  if (counts.empty()) solver_error("histogram has no bins");
  return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

std::size_t Histogram::bin_of(double x) const {
  const std::size_t n = bins();
  if (x <= edges.front()) return 0;
  if (x >= edges.back()) return n - 1;
  auto it = std::upper_bound(edges.begin(), edges.end(), x);
  return std::min(n - 1, static_cast<std::size_t>(it - edges.begin()) - 1);
}

Histogram histogram_fixed(const std::vector<double>& v, double lo, double hi, std::size_t bins) {
  if (!(hi > lo) || bins == 0) config_error("histogram: need hi > lo and at least one bin");
  Histogram h;
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / bins;
  h.counts.assign(bins, 0);
  for (double x : v) {
    if (x < lo || x > hi) continue;
    ++h.counts[h.bin_of(x)];
  }
  return h;
}

double quantile_sorted(const std::vector<double>& s, double p) {
  if (s.empty()) solver_error("quantile of an empty sample");
  const double pos = p * static_cast<double>(s.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= s.size()) return s.back();
  return s[i] + (pos - static_cast<double>(i)) * (s[i + 1] - s[i]);
}

Histogram histogram_fd(const std::vector<double>& v, std::size_t max_bins) {
  if (v.empty()) solver_error("histogram of an empty sample");
  std::vector<double> s(v);
  std::sort(s.begin(), s.end());
  const double lo = s.front(), hi = s.back();
  if (!(hi > lo)) return histogram_fixed(v, lo - 0.5, lo + 0.5, 1);
  const double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
  std::size_t bins = max_bins;
  if (iqr > 0.0) {
    const double width = 2.0 * iqr / std::cbrt(static_cast<double>(s.size()));
    bins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
  }
  bins = std::clamp<std::size_t>(bins, 1, max_bins);
  return histogram_fixed(v, lo, hi, bins);
}

}  // namespace mc2
