#include "mc2/problem_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mc2/error.hpp"

namespace mc2 {

using nlohmann::json;

namespace {

std::string at(const std::string& path, const std::string& key) { return path + "/" + key; }

const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) config_error(path + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) config_error(at(path, key) + ": missing required field");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) config_error(path + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) config_error(path + ": must be finite");
  return d;
}

int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) config_error(path + ": expected an integer");
  return v.get<int>();
}

double num_or(const json& j, const std::string& key, double def, const std::string& path) {
  return j.contains(key) ? number(j[key], at(path, key)) : def;
}

Eigen::VectorXd vec(const json& v, const std::string& path) {
  if (!v.is_array()) config_error(path + ": expected an array of numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = number(v[i], path + "/" + std::to_string(i));
  return out;
}

Eigen::MatrixXd mat(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) config_error(path + ": expected a nonempty array of rows");
  const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < v.size(); ++r) {
    const std::string rp = path + "/" + std::to_string(r);
    if (!v[r].is_array()) config_error(rp + ": expected a row array");
    if (v[r].size() != cols) {
      config_error(rp + ": row has length " + std::to_string(v[r].size()) + ", expected " + std::to_string(cols));
    }
    out.row(static_cast<Eigen::Index>(r)) = vec(v[r], rp).transpose();
  }
  return out;
}

Eigen::Vector2d pair(const json& v, const std::string& path) {
  const Eigen::VectorXd p = vec(v, path);
  if (p.size() != 2) config_error(path + ": expected two numbers");
  return p;
}

json to_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(to_json(Eigen::VectorXd(m.row(r).transpose())));
  return rows;
}

void require_dims(bool ok, const std::string& msg) {
  if (!ok) config_error("dimension mismatch: " + msg);
}

LpProblem parse_lp(const json& j) {
  LpProblem lp;
  lp.form = j.value("form", std::string("pincus"));
  if (lp.form == "pincus") {
    const Eigen::Vector2d c = pair(field(j, "c", ""), "/c");
    lp.pincus.c1 = c(0);
    lp.pincus.c2 = c(1);
    lp.pincus.t = number(field(j, "t", ""), "/t");
    lp.pincus.b = number(field(j, "b", ""), "/b");
    lp.pincus.box = num_or(j, "box", 1.0, "");
    lp.pincus.validate();
  } else if (lp.form == "general") {
    lp.c = vec(field(j, "c", ""), "/c");
    lp.A = mat(field(j, "A", ""), "/A");
    lp.b = vec(field(j, "b", ""), "/b");
    require_dims(lp.A.cols() == lp.c.size(), "/A has " + std::to_string(lp.A.cols()) + " columns but /c has length " +
                                                 std::to_string(lp.c.size()));
    require_dims(lp.A.rows() == lp.b.size(),
                 "/A has " + std::to_string(lp.A.rows()) + " rows but /b has length " + std::to_string(lp.b.size()));
  } else {
    config_error("/form: unknown lp form '" + lp.form + "' (expected pincus or general)");
  }
  return lp;
}

OneStageSpec parse_one_stage(const json& j) {
  OneStageSpec s;
  s.payoff = j.value("payoff", std::string("quadratic"));
  s.K = num_or(j, "K", s.K, "");
  const json& sc = field(j, "scenarios", "");
  if (!sc.is_array() || sc.empty()) config_error("/scenarios: expected a nonempty array");
  for (std::size_t i = 0; i < sc.size(); ++i) s.scenarios.push_back(vec(sc[i], "/scenarios/" + std::to_string(i)));
  if (j.contains("probs")) {
    const Eigen::VectorXd p = vec(j["probs"], "/probs");
    s.probs.assign(p.data(), p.data() + p.size());
  }
  s.lo = vec(field(j, "lo", ""), "/lo");
  s.hi = vec(field(j, "hi", ""), "/hi");
  if (j.contains("J_ladder")) {
    s.J_ladder.clear();
    const json& l = j["J_ladder"];
    if (!l.is_array()) config_error("/J_ladder: expected an array of integers");
    for (std::size_t i = 0; i < l.size(); ++i) s.J_ladder.push_back(integer(l[i], "/J_ladder/" + std::to_string(i)));
  }
  s.validate();
  return s;
}

PortfolioInstance parse_portfolio(const json& j) {
  PortfolioInstance p;
  p.mu = vec(field(j, "mu", ""), "/mu");
  p.Sigma = mat(field(j, "Sigma", ""), "/Sigma");
  p.gamma = number(field(j, "gamma", ""), "/gamma");
  p.rf = num_or(j, "rf", 0.0, "");
  p.K = num_or(j, "K", 1.0, "");
  p.J = j.contains("J") ? integer(j["J"], "/J") : 20;
  p.lo = vec(field(j, "lo", ""), "/lo");
  p.hi = vec(field(j, "hi", ""), "/hi");
  require_dims(p.Sigma.rows() == p.mu.size() && p.Sigma.cols() == p.mu.size(),
               "/Sigma must be n x n with n = length of /mu");
  require_dims(p.lo.size() == p.mu.size() && p.hi.size() == p.mu.size(), "/lo and /hi must have the length of /mu");
  p.validate();
  return p;
}

FarmerSpec parse_farmer(const json& j) {
  FarmerSpec f;
  f.inst.k = num_or(j, "k", f.inst.k, "");
  if (j.contains("x_range")) {
    const Eigen::Vector2d r = pair(j["x_range"], "/x_range");
    f.inst.x_lo = r(0);
    f.inst.x_hi = r(1);
  }
  if (j.contains("omega1")) {
    const Eigen::Vector2d r = pair(j["omega1"], "/omega1");
    f.inst.w1_lo = r(0);
    f.inst.w1_hi = r(1);
  }
  if (j.contains("omega2")) {
    const Eigen::Vector2d r = pair(j["omega2"], "/omega2");
    f.inst.w2_lo = r(0);
    f.inst.w2_hi = r(1);
  }
  if (j.contains("prices")) {
    const Eigen::Vector2d p = pair(j["prices"], "/prices");
    f.inst.p1 = p(0);
    f.inst.p2 = p(1);
  }
  if (j.contains("inner")) {
    const json& in = j["inner"];
    f.inner_x = num_or(in, "x", f.inner_x, "/inner");
    if (in.contains("omega")) f.inner_omega = pair(in["omega"], "/inner/omega");
  }
  f.inst.validate();
  return f;
}

TwoStageProblem parse_two_stage(const json& j) {
  TwoStageProblem p;
  p.c = vec(field(j, "c", ""), "/c");
  if (j.contains("x_points")) {
    const json& xp = j["x_points"];
    if (!xp.is_array() || xp.empty()) config_error("/x_points: expected a nonempty array");
    for (std::size_t i = 0; i < xp.size(); ++i) p.x_points.push_back(vec(xp[i], "/x_points/" + std::to_string(i)));
  } else {
    const json& S = field(j, "S", "");
    if (S.contains("lo")) {
      const Eigen::VectorXd lo = vec(S["lo"], "/S/lo"), hi = vec(field(S, "hi", "/S"), "/S/hi");
      require_dims(lo.size() == hi.size(), "/S/lo and /S/hi differ in length");
      p.S = Polytope::box(lo, hi);
    } else {
      p.S.A = mat(field(S, "A", "/S"), "/S/A");
      p.S.b = vec(field(S, "b", "/S"), "/S/b");
      p.S.nonneg.assign(static_cast<std::size_t>(p.S.A.cols()), false);
      require_dims(p.S.A.rows() == p.S.b.size(), "/S/A rows differ from /S/b length");
    }
  }
  p.W = mat(field(j, "W", ""), "/W");
  const json& sc = field(j, "scenarios", "");
  if (!sc.is_array() || sc.empty()) config_error("/scenarios: expected a nonempty array");
  for (std::size_t i = 0; i < sc.size(); ++i) {
    const std::string sp = "/scenarios/" + std::to_string(i);
    TwoStageScenario s;
    s.prob = number(field(sc[i], "prob", sp), sp + "/prob");
    s.q = vec(field(sc[i], "q", sp), sp + "/q");
    s.h = vec(field(sc[i], "h", sp), sp + "/h");
    s.T = mat(field(sc[i], "T", sp), sp + "/T");
    require_dims(s.q.size() == p.W.cols(), sp + "/q length differs from the number of /W columns");
    require_dims(s.h.size() == p.W.rows(), sp + "/h length differs from the number of /W rows");
    require_dims(s.T.rows() == p.W.rows() && s.T.cols() == p.c.size(), sp + "/T must be (rows of /W) x (length of /c)");
    p.scenarios.push_back(s);
  }
  p.kappa = num_or(j, "kappa", p.kappa, "");
  p.kappa_outer = num_or(j, "kappa_outer", p.kappa_outer, "");
  p.J = j.contains("J") ? integer(j["J"], "/J") : 1;
  p.validate();
  return p;
}

}  // namespace

const char* problem_kind_name(ProblemKind k) {
  switch (k) {
    case ProblemKind::Lp: return "lp";
    case ProblemKind::OneStage: return "one_stage";
    case ProblemKind::Portfolio: return "portfolio";
    case ProblemKind::Farmer: return "farmer";
    case ProblemKind::TwoStage: return "two_stage";
  }
  return "lp";
}

void LpProblem::dual_form(Eigen::VectorXd& z, Eigen::MatrixXd& W, Eigen::VectorXd& q, std::vector<bool>& nonneg) const {
  if (form == "pincus") {
    pincus_dual_form(pincus, z, W, q, nonneg);
    return;
  }
  // min b'pi s.t. A'pi >= c, pi >= 0, written as max (-b)'pi s.t. (-A)'pi <= -c.
  z = -b;
  W = -A;
  q = -c;
  nonneg.assign(static_cast<std::size_t>(b.size()), true);
}

void LpProblem::primal_form(Eigen::VectorXd& c_out, Eigen::MatrixXd& A_out, Eigen::VectorXd& b_out) const {
  if (form == "pincus") {
    c_out = Eigen::Vector2d(pincus.c1, pincus.c2);
    A_out.resize(3, 2);
    A_out << 1.0, pincus.b, 1.0, 0.0, 0.0, 1.0;
    b_out = Eigen::Vector3d(pincus.t, pincus.box, pincus.box);
    return;
  }
  c_out = c;
  A_out = A;
  b_out = b;
}

void OneStageSpec::validate() const {
  if (payoff != "quadratic") config_error("/payoff: unknown payoff '" + payoff + "' (available: quadratic)");
  if (scenarios.empty()) config_error("/scenarios: need at least one scenario");
  const Eigen::Index n = lo.size();
  if (n < 1 || hi.size() != n) config_error("/lo and /hi must be nonempty and of equal length");
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    if (scenarios[i].size() != n) config_error("/scenarios/" + std::to_string(i) + ": length differs from /lo");
  }
  if (!probs.empty()) {
    if (probs.size() != scenarios.size()) config_error("/probs: length differs from /scenarios");
    double s = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0)) config_error("/probs: must be nonnegative");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-9) config_error("/probs: must sum to 1");
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!(lo(k) < hi(k))) config_error("/lo must be below /hi");
  }
  // K must keep G positive on the whole box for every scenario.
  for (const auto& w : scenarios) {
    const double far = (lo - w).cwiseAbs().cwiseMax((hi - w).cwiseAbs()).squaredNorm();
    if (!(K > far)) config_error("/K: payoff is not positive on the box; need K > " + std::to_string(far));
  }
}

double OneStageSpec::expected_payoff(const Eigen::VectorXd& x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const double p = probs.empty() ? 1.0 / scenarios.size() : probs[i];
    s += p * (K - (x - scenarios[i]).squaredNorm());
  }
  return s;
}

OneStageProblem OneStageSpec::build() const {
  validate();
  OneStageProblem prob;
  const double K_ = K;
  prob.payoff = [K_](const Eigen::VectorXd& w, const Eigen::VectorXd& x) { return K_ - (x - w).squaredNorm(); };
  std::vector<double> cum;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    cum.push_back((cum.empty() ? 0.0 : cum.back()) + (probs.empty() ? 1.0 / scenarios.size() : probs[i]));
  }
  auto sc = scenarios;
  prob.scenario = [sc, cum](RngStream& rng) {
    const double u = rng.uniform() * cum.back();
    for (std::size_t i = 0; i < cum.size(); ++i) {
      if (u < cum[i]) return sc[i];
    }
    return sc.back();
  };
  prob.domain = Polytope::box(lo, hi);
  prob.J_ladder = J_ladder;
  return prob;
}

ProblemSpec parse_problem(const json& j) {
  if (!j.is_object()) config_error("problem file: top level must be an object");
  ProblemSpec p;
  p.schema_version = integer(field(j, "schema_version", ""), "/schema_version");
  if (p.schema_version != kSchemaVersion) {
    config_error("/schema_version: unsupported version " + std::to_string(p.schema_version) + " (expected " +
                 std::to_string(kSchemaVersion) + ")");
  }
  const json& t = field(j, "type", "");
  if (!t.is_string()) config_error("/type: expected a string");
  const std::string type = t.get<std::string>();
  p.name = j.value("name", type);
  if (type == "lp") {
    p.kind = ProblemKind::Lp;
    p.lp = parse_lp(j);
  } else if (type == "one_stage") {
    p.kind = ProblemKind::OneStage;
    p.one_stage = parse_one_stage(j);
  } else if (type == "portfolio") {
    p.kind = ProblemKind::Portfolio;
    p.portfolio = parse_portfolio(j);
  } else if (type == "farmer") {
    p.kind = ProblemKind::Farmer;
    p.farmer = parse_farmer(j);
  } else if (type == "two_stage") {
    p.kind = ProblemKind::TwoStage;
    p.two_stage = parse_two_stage(j);
  } else {
    config_error("/type: unknown problem type '" + type + "' (expected lp, one_stage, portfolio, farmer, two_stage)");
  }
  return p;
}

ProblemSpec parse_problem_text(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // Report a line number rather than a byte offset.
    const std::size_t pos = std::min<std::size_t>(e.byte, text.size());
    const long line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n');
    config_error(source + ":" + std::to_string(line) + ": invalid JSON: " + e.what());
  }
  try {
    return parse_problem(j);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Config) throw;
    config_error(source + ": " + e.what());
  }
}

ProblemSpec parse_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open problem file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem_text(ss.str(), path);
}

json serialize_problem(const ProblemSpec& p) {
  json j;
  j["schema_version"] = p.schema_version;
  j["type"] = problem_kind_name(p.kind);
  j["name"] = p.name;
  switch (p.kind) {
    case ProblemKind::Lp:
      j["form"] = p.lp.form;
      if (p.lp.form == "pincus") {
        j["c"] = {p.lp.pincus.c1, p.lp.pincus.c2};
        j["t"] = p.lp.pincus.t;
        j["b"] = p.lp.pincus.b;
        j["box"] = p.lp.pincus.box;
      } else {
        j["c"] = to_json(p.lp.c);
        j["A"] = to_json(p.lp.A);
        j["b"] = to_json(p.lp.b);
      }
      break;
    case ProblemKind::OneStage: {
      const auto& s = p.one_stage;
      j["payoff"] = s.payoff;
      j["K"] = s.K;
      j["scenarios"] = json::array();
      for (const auto& w : s.scenarios) j["scenarios"].push_back(to_json(w));
      if (!s.probs.empty()) j["probs"] = s.probs;
      j["lo"] = to_json(s.lo);
      j["hi"] = to_json(s.hi);
      j["J_ladder"] = s.J_ladder;
      break;
    }
    case ProblemKind::Portfolio: {
      const auto& s = p.portfolio;
      j["mu"] = to_json(s.mu);
      j["Sigma"] = to_json(s.Sigma);
      j["gamma"] = s.gamma;
      j["rf"] = s.rf;
      j["K"] = s.K;
      j["J"] = s.J;
      j["lo"] = to_json(s.lo);
      j["hi"] = to_json(s.hi);
      break;
    }
    case ProblemKind::Farmer: {
      const auto& f = p.farmer;
      j["k"] = f.inst.k;
      j["x_range"] = {f.inst.x_lo, f.inst.x_hi};
      j["omega1"] = {f.inst.w1_lo, f.inst.w1_hi};
      j["omega2"] = {f.inst.w2_lo, f.inst.w2_hi};
      j["prices"] = {f.inst.p1, f.inst.p2};
      j["inner"] = {{"x", f.inner_x}, {"omega", {f.inner_omega(0), f.inner_omega(1)}}};
      break;
    }
    case ProblemKind::TwoStage: {
      const auto& t = p.two_stage;
      j["c"] = to_json(t.c);
      if (t.discrete()) {
        j["x_points"] = json::array();
        for (const auto& x : t.x_points) j["x_points"].push_back(to_json(x));
      } else {
        j["S"] = {{"A", to_json(t.S.A)}, {"b", to_json(t.S.b)}};
      }
      j["W"] = to_json(t.W);
      j["scenarios"] = json::array();
      for (const auto& s : t.scenarios) {
        j["scenarios"].push_back({{"prob", s.prob}, {"q", to_json(s.q)}, {"h", to_json(s.h)}, {"T", to_json(s.T)}});
      }
      j["kappa"] = t.kappa;
      j["kappa_outer"] = t.kappa_outer;
      j["J"] = t.J;
      break;
    }
  }
  return j;
}

}  // namespace mc2
