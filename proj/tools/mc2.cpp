#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "mc2/error.hpp"
#include "mc2/run.hpp"
#include "mc2/version.hpp"

namespace {

std::vector<double> parse_schedule(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      mc2::config_error("--kappa-schedule: cannot parse '" + item + "'");
    }
  }
  return out;
}

int fail(mc2::ErrorKind kind, const std::string& msg) {
  nlohmann::json j = {{"error", {{"kind", mc2::kind_name(kind)}, {"message", msg}, {"exit_code", mc2::exit_code(kind)}}}};
  std::cerr << j.dump() << std::endl;
  return mc2::exit_code(kind);
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("mc2");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("MC2_LOG_LEVEL")) spdlog::set_level(spdlog::level::from_str(lvl));
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Monte Carlo optimisation by annealed sampling"};
  app.set_version_flag("--version", std::string(mc2::kVersion));
  app.require_subcommand(1);

  mc2::RunConfig cfg;
  std::string schedule;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Run a solver on a problem file");
  run->add_option("--problem", cfg.problem_path, "Problem file (JSON)")->required();
  run->add_option("--solver", cfg.solver, "Solver name (see 'mc2 solvers')")->required();
  run->add_option("--kappa-schedule", schedule, "Comma-separated kappa levels");
  auto* jopt = run->add_option("--J", "Number of copies");
  auto* sopt = run->add_option("--sweeps", "Sweeps at the final level");
  auto* bopt = run->add_option("--burnin", "Burn-in sweeps at the final level");
  run->add_option("--chains", cfg.chains, "Independent chains (stream = chain index)");
  run->add_option("--seed", seed, "Random seed")->required();
  run->add_option("--out", cfg.out_dir, "Output directory");
  run->add_option("--format", cfg.format, "Output format (text)");

  auto* list = app.add_subcommand("solvers", "List solver names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(mc2::ErrorKind::Config, e.what());
  }

  if (list->parsed()) {
    for (const auto& n : mc2::solver_names()) std::cout << n << "\n";
    return 0;
  }

  try {
    if (*jopt) cfg.J = jopt->as<int>();
    if (*sopt) cfg.sweeps = sopt->as<int>();
    if (*bopt) cfg.burnin = bopt->as<int>();
    cfg.seed = seed;
    if (!schedule.empty()) cfg.kappa_schedule = parse_schedule(schedule);
    spdlog::info("problem {} solver {} seed {}", cfg.problem_path, cfg.solver, seed);
    const mc2::RunReport rep = mc2::run(cfg);
    std::cout << mc2::report_summary(rep);
    spdlog::info("wrote report to {}/report.txt", cfg.out_dir);
  } catch (const mc2::Error& e) {
    spdlog::debug("run failed: {}", e.what());
    return fail(e.kind(), e.what());
  } catch (const CLI::ConversionError& e) {
    return fail(mc2::ErrorKind::Config, e.what());
  } catch (const std::exception& e) {
    return fail(mc2::ErrorKind::Solver, e.what());
  }
  return 0;
}
