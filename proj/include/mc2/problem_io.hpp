#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "mc2/anneal.hpp"
#include "mc2/stochprog.hpp"

namespace mc2 {

inline constexpr int kSchemaVersion = 1;

enum class ProblemKind { Lp, OneStage, Portfolio, Farmer, TwoStage };

const char* problem_kind_name(ProblemKind k);

// form "pincus": the two-variable example. form "general":
// maximize c'x subject to A x <= b, x >= 0.
struct LpProblem {
  std::string form = "pincus";
  PincusParams pincus;
  Eigen::VectorXd c;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;

  // Dual in solve_lp_dual form; the primal optimum is -G.
  void dual_form(Eigen::VectorXd& z, Eigen::MatrixXd& W, Eigen::VectorXd& q, std::vector<bool>& nonneg) const;
  // Primal data (maximize c'x, A x <= b, x >= 0) for the simplex reference.
  void primal_form(Eigen::VectorXd& c_out, Eigen::MatrixXd& A_out, Eigen::VectorXd& b_out) const;
};

// Named payoffs only. "quadratic": G(omega, x) = K - |x - omega|^2.
struct OneStageSpec {
  std::string payoff = "quadratic";
  double K = 10.0;
  std::vector<Eigen::VectorXd> scenarios;
  std::vector<double> probs;
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  std::vector<int> J_ladder = {4, 16, 64};

  void validate() const;
  OneStageProblem build() const;
  // Exact expectation of the payoff over the discrete scenarios.
  double expected_payoff(const Eigen::VectorXd& x) const;
};

struct FarmerSpec {
  FarmerInstance inst;
  double inner_x = 75.0;
  Eigen::Vector2d inner_omega{4000.0, 15000.0};
};

struct ProblemSpec {
  int schema_version = kSchemaVersion;
  ProblemKind kind = ProblemKind::Lp;
  std::string name;
  LpProblem lp;
  OneStageSpec one_stage;
  PortfolioInstance portfolio;
  FarmerSpec farmer;
  TwoStageProblem two_stage;
};

ProblemSpec parse_problem(const nlohmann::json& j);
ProblemSpec parse_problem_text(const std::string& text, const std::string& source = "<string>");
ProblemSpec parse_problem_file(const std::string& path);
nlohmann::json serialize_problem(const ProblemSpec& p);

}  // namespace mc2
