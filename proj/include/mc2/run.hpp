#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mc2/anneal.hpp"
#include "mc2/stats.hpp"

namespace mc2 {

struct RunConfig {
  std::string problem_path;
  std::string solver;
  std::vector<double> kappa_schedule;  // empty = solver default
  std::optional<int> J;
  std::optional<int> sweeps;
  std::optional<int> burnin;  // sweeps discarded at the final level
  int chains = 1;
  std::optional<std::uint64_t> seed;  // required
  std::string out_dir = "out";
  std::string format = "text";

  void validate() const;
};

struct Estimate {
  std::string name;
  double value = 0.0;
  double se = 0.0;  // NaN when not applicable
  long draws = 0;
};

struct ChainReport {
  int chain = 0;
  std::vector<Estimate> estimates;
  std::vector<std::pair<Eigen::VectorXd, double>> top;
  std::vector<LevelStats> levels;
  std::vector<std::string> files;
};

struct RunReport {
  RunConfig config;
  std::string problem_name;
  std::string problem_type;
  std::string version;
  std::vector<std::string> coord_names;
  std::vector<ChainReport> chains;
  std::vector<std::string> notes;  // oracle comparisons and diagnostics
};

const std::vector<std::string>& solver_names();

RunReport run(const RunConfig& config);
std::string report_summary(const RunReport& report);

void write_trace(const Trace& trace, const std::string& path);
void write_histogram(const Histogram& h, const std::string& path);

}  // namespace mc2
