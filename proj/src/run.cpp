#include "mc2/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "mc2/error.hpp"
#include "mc2/lp.hpp"
#include "mc2/problem_io.hpp"
#include "mc2/stochprog.hpp"
#include "mc2/version.hpp"

namespace mc2 {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kFarmerOuterKappa = 0.1;
constexpr double kFarmerInnerKappa = 125.0;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string g6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string vec_str(const Eigen::VectorXd& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + g6(v(i));
  return s + ")";
}

std::vector<double> column(const Trace& t, const std::vector<std::size_t>& idx, int k) {
  std::vector<double> c;
  c.reserve(idx.size());
  for (auto i : idx) c.push_back(t.draws[i](k));
  return c;
}

// Ergodic means of every coordinate and of the value, with batch-means SEs.
ChainReport summarize(const Trace& t, int chain) {
  ChainReport r;
  r.chain = chain;
  const auto idx = t.final_indices();
  if (idx.empty()) solver_error("report: empty trace");
  const long n = static_cast<long>(idx.size());
  for (int k = 0; k < t.dim(); ++k) {
    const auto c = column(t, idx, k);
    r.estimates.push_back({"mean " + t.names[k], mean(c), batch_means_se(c), n});
  }
  const auto v = t.final_values();
  r.estimates.push_back({"value", mean(v), batch_means_se(v), n});
  r.top = top_distinct_draws(t, 5);
  r.levels = t.levels;
  return r;
}

Schedule schedule_from(const RunConfig& cfg, const Schedule& def) {
  Schedule s = def;
  if (!cfg.kappa_schedule.empty()) s.kappas = cfg.kappa_schedule;
  if (cfg.sweeps) s.final_sweeps = *cfg.sweeps;
  if (cfg.burnin) s.burnin_fraction = static_cast<double>(*cfg.burnin) / s.final_sweeps;
  s.validate();
  return s;
}

double burnin_fraction(const RunConfig& cfg, int sweeps, double def = 0.5) {
  if (!cfg.burnin) return def;
  if (*cfg.burnin >= sweeps) config_error("--burnin must be smaller than --sweeps");
  return static_cast<double>(*cfg.burnin) / sweeps;
}

void require_kind(const ProblemSpec& p, std::initializer_list<ProblemKind> kinds, const std::string& solver) {
  for (auto k : kinds) {
    if (p.kind == k) return;
  }
  std::string names;
  for (auto k : kinds) names += std::string(names.empty() ? "" : ", ") + problem_kind_name(k);
  config_error("solver '" + solver + "' needs a problem of type " + names + ", got " + problem_kind_name(p.kind));
}

struct ChainOutput {
  Trace trace;
  std::optional<Histogram> histogram;
  std::vector<Estimate> extra;
  std::vector<std::string> notes;
};

ChainOutput run_chain(const ProblemSpec& p, const RunConfig& cfg, RngStream& rng) {
  const std::string& s = cfg.solver;
  ChainOutput out;
  if (s == "lp-dual" || s == "lp-pincus") {
    require_kind(p, {ProblemKind::Lp}, s);
    const Schedule sch = schedule_from(cfg, default_schedule());
    double G = 0.0, se = 0.0;
    if (s == "lp-pincus") {
      if (p.lp.form != "pincus") config_error("solver 'lp-pincus' needs an lp problem with form pincus");
      out.trace = pincus_run(p.lp.pincus, sch, rng);
      const auto v = out.trace.final_values();
      G = -mean(v);
      se = batch_means_se(v);
    } else {
      Eigen::VectorXd z, q;
      Eigen::MatrixXd W;
      std::vector<bool> nn;
      p.lp.dual_form(z, W, q, nn);
      LpDualResult r = solve_lp_dual(z, W, q, nn, sch, rng);
      out.trace = std::move(r.trace);
      G = r.G_hat;
      se = r.G_se;
    }
    Eigen::VectorXd c, b;
    Eigen::MatrixXd A;
    p.lp.primal_form(c, A, b);
    const LpResult ref = lp_maximize(c, A, b, std::vector<bool>(c.size(), true));
    out.extra.push_back({"primal value (annealed dual)", -G, se, static_cast<long>(out.trace.final_indices().size())});
    if (ref.status == LpStatus::Optimal) {
      out.extra.push_back({"primal value (simplex reference)", ref.value, kNaN, 0});
      const double gap = std::abs(-G - ref.value) / std::max(1e-12, std::abs(ref.value));
      out.notes.push_back("relative duality gap vs simplex reference: " + g6(gap));
    }
  } else if (s == "one-stage") {
    require_kind(p, {ProblemKind::OneStage}, s);
    OneStageProblem prob = p.one_stage.build();
    if (cfg.J) prob.J_ladder = {*cfg.J};
    OneStageOptions o;
    if (cfg.sweeps) o.sweeps = *cfg.sweeps;
    o.burnin_fraction = burnin_fraction(cfg, o.sweeps);
    OneStageResult r = one_stage_mcmc(prob, o, rng);
    out.trace = std::move(r.trace);
    for (std::size_t l = 0; l < r.x_sd.size(); ++l) {
      out.notes.push_back("J = " + std::to_string(prob.J_ladder[l]) + ": post-burn-in sd of x1 = " + g6(r.x_sd[l]));
    }
    out.notes.push_back("omega acceptance rate " + g6(r.omega_acceptance));
  } else if (s == "portfolio") {
    require_kind(p, {ProblemKind::Portfolio}, s);
    PortfolioInstance inst = p.portfolio;
    if (cfg.J) inst.J = *cfg.J;
    const int sweeps = cfg.sweeps.value_or(5000);
    PortfolioResult r = portfolio_mcmc(inst, sweeps, rng, burnin_fraction(cfg, sweeps));
    out.trace = std::move(r.trace);
    const Eigen::VectorXd xs = inst.analytic_optimum();
    out.notes.push_back("analytic optimum Sigma^-1 mu / gamma = " + vec_str(xs));
    out.notes.push_back("ergodic mean " + vec_str(r.x_hat) + ", posterior median " + vec_str(r.x_median));
    for (int k = 0; k < inst.n(); ++k) {
      out.notes.push_back("x" + std::to_string(k + 1) + " relative error " +
                          g6(std::abs(r.x_hat(k) - xs(k)) / std::max(1e-12, std::abs(xs(k)))));
    }
  } else if (s == "saa") {
    require_kind(p, {ProblemKind::Portfolio, ProblemKind::OneStage}, s);
    const int N = cfg.sweeps.value_or(10000);
    SaaResult r = p.kind == ProblemKind::Portfolio
                      ? saa_baseline(p.portfolio, N, rng)
                      : saa_baseline(p.one_stage.build(), p.one_stage.lo, p.one_stage.hi, N, rng);
    Eigen::VectorXd x = r.x;
    out.trace.names.clear();
    for (Eigen::Index k = 0; k < x.size(); ++k) out.trace.names.push_back("x" + std::to_string(k + 1));
    out.trace.sense = Sense::Maximize;
    out.trace.push(x, r.value, 0.0, 0, false);
    out.trace.close_level(0, 0.0);
    out.notes.push_back("SAA with N = " + std::to_string(N) + " scenarios, " + std::to_string(r.iterations) +
                        " ascent iterations");
  } else if (s == "farmer-inner" || s == "farmer-inner-slice") {
    require_kind(p, {ProblemKind::Farmer}, s);
    const double kappa = cfg.kappa_schedule.empty() ? kFarmerInnerKappa : cfg.kappa_schedule.back();
    FarmerInnerOptions o;
    if (cfg.kappa_schedule.size() > 1) o.ladder.assign(cfg.kappa_schedule.begin(), cfg.kappa_schedule.end() - 1);
    const int sweeps = cfg.sweeps.value_or(10000);
    o.burnin_fraction = burnin_fraction(cfg, sweeps);
    const auto& f = p.farmer;
    FarmerInnerResult r =
        farmer_inner_gibbs(f.inst, f.inner_x, f.inner_omega, kappa, s == "farmer-inner-slice", sweeps, rng, o);
    out.trace = std::move(r.trace);
    const LpResult ref = lp_maximize(Eigen::Vector2d(f.inst.p1, f.inst.p2), f.inst.inner_polytope(f.inner_x, f.inner_omega).A,
                                     f.inst.inner_polytope(f.inner_x, f.inner_omega).b, {true, true});
    out.extra.push_back({"value at ergodic mean", r.value, kNaN, static_cast<long>(out.trace.final_indices().size())});
    if (ref.status == LpStatus::Optimal) {
      out.extra.push_back({"inner optimum (simplex reference)", ref.value, kNaN, 0});
      out.notes.push_back("relative error vs simplex reference: " + g6(std::abs(r.value - ref.value) / ref.value));
    }
  } else if (s == "farmer-outer") {
    require_kind(p, {ProblemKind::Farmer}, s);
    const int J = cfg.J.value_or(20);
    const int sweeps = cfg.sweeps.value_or(5000);
    Schedule sch;
    if (cfg.kappa_schedule.size() > 1) {
      sch.kappas = cfg.kappa_schedule;
      const int warm = static_cast<int>(sch.kappas.size()) - 1;
      sch.sweeps_per_level = std::max(1, (sweeps / 2 + warm - 1) / warm);
      sch.final_sweeps = sweeps - sweeps / 2;
      sch.burnin_fraction = 0.0;
    } else {
      sch = farmer_outer_schedule(cfg.kappa_schedule.empty() ? kFarmerOuterKappa : cfg.kappa_schedule.back(), sweeps);
    }
    if (cfg.burnin) sch.burnin_fraction = burnin_fraction(cfg, sch.final_sweeps, 0.0);
    FarmerOuterResult r = farmer_outer_mcmc(p.farmer.inst, J, sch, rng);
    out.trace = std::move(r.trace);
    out.histogram = r.histogram;
    out.notes.push_back("modal interval " + r.modal_interval.str() + ", ergodic mean " + g6(r.x_hat));
  } else if (s == "two-stage") {
    require_kind(p, {ProblemKind::TwoStage}, s);
    TwoStageProblem prob = p.two_stage;
    if (cfg.J) prob.J = *cfg.J;
    if (!cfg.kappa_schedule.empty()) prob.kappa = cfg.kappa_schedule.back();
    TwoStageOptions o;
    if (cfg.sweeps) o.sweeps = *cfg.sweeps;
    o.burnin_fraction = burnin_fraction(cfg, o.sweeps);
    TwoStageResult r = two_stage_mcmc(prob, o, rng);
    out.trace = std::move(r.trace);
    out.notes.push_back("omega acceptance " + g6(r.omega_acceptance) + ", x acceptance " + g6(r.x_acceptance));
  } else {
    std::string names;
    for (const auto& n : solver_names()) names += (names.empty() ? "" : ", ") + n;
    config_error("unknown solver '" + s + "' (valid: " + names + ")");
  }
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (problem_path.empty()) config_error("--problem is required");
  if (solver.empty()) config_error("--solver is required");
  if (!seed) config_error("--seed is required");
  if (chains < 1 || chains > 64) config_error("--chains must be in [1, 64]");
  if (J && (*J < 1 || *J > 10000)) config_error("--J must be in [1, 10000]");
  if (sweeps && (*sweeps < 2 || *sweeps > 100000000)) config_error("--sweeps must be in [2, 1e8]");
  if (burnin && *burnin < 0) config_error("--burnin must be nonnegative");
  if (format != "text") config_error("--format: only 'text' is supported");
  for (double k : kappa_schedule) {
    if (!(k >= 0.0) || !std::isfinite(k)) config_error("--kappa-schedule: values must be finite and >= 0");
  }
}

const std::vector<std::string>& solver_names() {
  static const std::vector<std::string> names = {"lp-dual",      "lp-pincus",          "one-stage",    "portfolio", "saa",
                                                 "farmer-inner", "farmer-inner-slice", "farmer-outer", "two-stage"};
  return names;
}

void write_trace(const Trace& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) solver_error("cannot write " + path);
  out << "iter level kappa burnin value";
  for (const auto& n : t.names) out << ' ' << n;
  for (const auto& n : t.extra_names) out << ' ' << n;
  out << '\n';
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << i << ' ' << t.level[i] << ' ' << g17(t.kappa[i]) << ' ' << int(t.burnin[i]) << ' ' << g17(t.values[i]);
    for (Eigen::Index k = 0; k < t.draws[i].size(); ++k) out << ' ' << g17(t.draws[i](k));
    if (!t.extra_names.empty()) {
      for (Eigen::Index k = 0; k < t.extra[i].size(); ++k) out << ' ' << g17(t.extra[i](k));
    }
    out << '\n';
  }
}

void write_histogram(const Histogram& h, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) solver_error("cannot write " + path);
  out << "edge_lo edge_hi count\n";
  for (std::size_t b = 0; b < h.bins(); ++b) out << g17(h.edges[b]) << ' ' << g17(h.edges[b + 1]) << ' ' << h.counts[b] << '\n';
}

RunReport run(const RunConfig& cfg) {
  cfg.validate();
  const ProblemSpec prob = parse_problem_file(cfg.problem_path);
  RunReport rep;
  rep.config = cfg;
  rep.problem_name = prob.name;
  rep.problem_type = problem_kind_name(prob.kind);
  rep.version = kVersion;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) config_error("cannot create output directory " + cfg.out_dir + ": " + ec.message());

  for (int c = 0; c < cfg.chains; ++c) {
    RngStream rng(*cfg.seed, static_cast<std::uint64_t>(c));
    ChainOutput out = run_chain(prob, cfg, rng);
    ChainReport cr = summarize(out.trace, c);
    cr.estimates.insert(cr.estimates.end(), out.extra.begin(), out.extra.end());
    if (rep.coord_names.empty()) rep.coord_names = out.trace.names;
    const std::string tag = "chain" + std::to_string(c);
    const std::string tpath = (fs::path(cfg.out_dir) / ("trace_" + tag + ".txt")).string();
    write_trace(out.trace, tpath);
    cr.files.push_back(tpath);
    Histogram h;
    if (out.histogram) {
      h = *out.histogram;
    } else {
      h = histogram_fd(column(out.trace, out.trace.final_indices(), 0));
    }
    const std::string hpath = (fs::path(cfg.out_dir) / ("histogram_" + tag + ".txt")).string();
    write_histogram(h, hpath);
    cr.files.push_back(hpath);
    for (const auto& n : out.notes) rep.notes.push_back(tag + ": " + n);
    rep.chains.push_back(std::move(cr));
  }
  const std::string rpath = (fs::path(cfg.out_dir) / "report.txt").string();
  std::ofstream r(rpath, std::ios::binary);
  if (!r) solver_error("cannot write " + rpath);
  r << report_summary(rep);
  return rep;
}

std::string report_summary(const RunReport& rep) {
  if (rep.chains.empty()) solver_error("report: no chains");
  std::ostringstream o;
  o << "problem: " << rep.problem_name << " (" << rep.problem_type << ")\n";
  o << "solver: " << rep.config.solver << "\n\n";
  for (const auto& c : rep.chains) {
    o << "chain " << c.chain << "\n";
    o << "  estimate                              value           se       draws\n";
    for (const auto& e : c.estimates) {
      char line[200];
      std::snprintf(line, sizeof line, "  %-34s %12.6g %12s %11ld\n", e.name.c_str(), e.value,
                    std::isnan(e.se) ? "-" : g6(e.se).c_str(), e.draws);
      o << line;
    }
    o << "  top draws by value:\n";
    for (const auto& [x, v] : c.top) o << "    " << vec_str(x) << "  value " << g6(v) << "\n";
    o << "  levels:\n";
    for (std::size_t l = 0; l < c.levels.size(); ++l) {
      const auto& s = c.levels[l];
      o << "    " << l << ": kappa " << g6(s.kappa) << ", sweeps " << s.sweeps << ", kept " << s.kept << ", mean value "
        << g6(s.mean_value) << " +- " << g6(s.se_value) << ", acceptance " << g6(s.acceptance) << "\n";
    }
    o << "  files:";
    for (const auto& f : c.files) o << ' ' << f;
    o << "\n\n";
  }
  if (!rep.notes.empty()) {
    o << "notes:\n";
    for (const auto& n : rep.notes) o << "  " << n << "\n";
    o << "\n";
  }
  const auto& cfg = rep.config;
  o << "provenance:\n";
  o << "  version " << rep.version << "\n";
  o << "  problem " << cfg.problem_path << "\n";
  o << "  seed " << (cfg.seed ? std::to_string(*cfg.seed) : "-") << ", chains " << cfg.chains << "\n";
  o << "  kappa schedule";
  if (cfg.kappa_schedule.empty()) o << " default";
  for (double k : cfg.kappa_schedule) o << ' ' << g6(k);
  o << "\n  J " << (cfg.J ? std::to_string(*cfg.J) : "default") << ", sweeps "
    << (cfg.sweeps ? std::to_string(*cfg.sweeps) : "default") << ", burnin "
    << (cfg.burnin ? std::to_string(*cfg.burnin) : "default") << "\n";
  return o.str();
}

}  // namespace mc2
