#include "drmpc/scenario.hpp"

#include <algorithm>
#include <filesystem>

#include "drmpc/errors.hpp"
#include "drmpc/log.hpp"

namespace drmpc {

namespace {

ConstraintKind parse_kind(const std::string& s) {
  if (s == "state") return ConstraintKind::kState;
  if (s == "input") return ConstraintKind::kInput;
  throw InvalidArgument("constraint kind must be 'state' or 'input', got '" +
                        s + "'");
}

const char* kind_name(ConstraintKind k) {
  return k == ConstraintKind::kState ? "state" : "input";
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

StageHalfspace parse_halfspace(const Json& j) {
  StageHalfspace h;
  h.kind = parse_kind(get_or<std::string>(j, "kind", "state"));
  h.normal = vector_from_json(j.at("normal"), "constraint normal");
  if (j.contains("rhs")) {
    h.rhs = j.at("rhs").get<double>();
  } else {
    h.rhs = get_or<double>(j, "rhs_scale", 1.0);
  }
  h.level = j.at("probability").get<double>();
  if (j.contains("stage_range")) {
    const Json& r = j.at("stage_range");
    if (!r.is_array() || r.size() != 2) {
      throw InvalidArgument("stage_range must be [first, last]");
    }
    h.first_stage = r[0].get<int>();
    h.last_stage = r[1].get<int>();
  }
  h.name = get_or<std::string>(j, "name", kind_name(h.kind));
  return h;
}

Json halfspace_to_json(const StageHalfspace& h) {
  return {{"kind", kind_name(h.kind)},
          {"normal", vector_to_json(h.normal)},
          {"rhs", h.rhs},
          {"probability", h.level},
          {"stage_range", {h.first_stage, h.last_stage}},
          {"name", h.name}};
}

SamplingMode parse_sampling(const std::string& s) {
  if (s == "fresh") return SamplingMode::kFresh;
  if (s == "nested") return SamplingMode::kNested;
  throw InvalidArgument("sampling must be 'fresh' or 'nested'");
}

CovarianceDraw parse_draw(const std::string& s) {
  if (s == "wishart") return CovarianceDraw::kWishart;
  if (s == "explicit") return CovarianceDraw::kExplicit;
  throw InvalidArgument("draw must be 'wishart' or 'explicit'");
}

SampleRedraw parse_redraw(const std::string& s) {
  if (s == "per_run") return SampleRedraw::kPerRun;
  if (s == "per_experiment") return SampleRedraw::kPerExperiment;
  throw InvalidArgument("redraw must be 'per_run' or 'per_experiment'");
}

Stage0Gain parse_stage0(const std::string& s) {
  if (s == "toeplitz") return Stage0Gain::kToeplitz;
  if (s == "pseudo_inverse") return Stage0Gain::kPseudoInverse;
  throw InvalidArgument("stage0_gain must be 'toeplitz' or 'pseudo_inverse'");
}

EpsilonObjective parse_objective(const std::string& s) {
  if (s == "printed") return EpsilonObjective::kPrintedBeta;
  if (s == "half_beta") return EpsilonObjective::kHalfBeta;
  throw InvalidArgument("epsilon_objective must be 'printed' or 'half_beta'");
}

void check_psd(const Matrix& m, const std::string& what, bool strict) {
  if (m.rows() != m.cols() || !is_symmetric(m, 1e-12)) {
    throw InvalidArgument(what + " must be square and symmetric");
  }
  const double ev = min_eigenvalue(m);
  if (strict ? !(ev > 1e-10) : !(ev >= -1e-12)) {
    throw InvalidArgument(what + (strict ? " must be positive definite"
                                         : " must be positive semidefinite"));
  }
}

ScenarioConfig parse(const Json& j, const std::filesystem::path& base) {
  ScenarioConfig c;
  c.name = get_or<std::string>(j, "name", c.name);
  const Json& sys = j.at("system");
  c.system.A = matrix_from_json(sys.at("A"), "system.A");
  c.system.B = matrix_from_json(sys.at("B"), "system.B");
  c.system.E = sys.contains("E")
                   ? matrix_from_json(sys.at("E"), "system.E")
                   : Matrix::Identity(c.system.A.rows(), c.system.A.rows());
  const Json& w = j.at("weights");
  c.Q = matrix_from_json(w.at("Q"), "weights.Q");
  c.R = matrix_from_json(w.at("R"), "weights.R");
  if (w.contains("P") && !w.at("P").is_string()) {
    c.P = matrix_from_json(w.at("P"), "weights.P");
  }
  c.sigma_true =
      matrix_from_json(j.at("disturbance").at("covariance"), "covariance");
  c.x0 = vector_from_json(j.at("x0"), "x0");
  c.horizon = get_or(j, "horizon", c.horizon);
  c.steps = get_or(j, "steps", c.steps);
  c.runs = get_or(j, "runs", c.runs);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.threads = get_or(j, "threads", c.threads);

  if (j.contains("ambiguity")) {
    const Json& a = j.at("ambiguity");
    c.beta = get_or(a, "beta", c.beta);
    c.sigma2 = get_or(a, "sigma2", c.sigma2);
    if (a.contains("epsilon") && a.at("epsilon").is_number()) {
      c.epsilon = a.at("epsilon").get<double>();
    }
    c.epsilon_objective =
        parse_objective(get_or<std::string>(a, "epsilon_objective", "printed"));
    c.n_samples = get_or(a, "n_samples", c.n_samples);
    c.exact_moments = get_or(a, "exact_moments", c.exact_moments);
    if (a.contains("sample_sizes")) {
      c.sample_sizes = a.at("sample_sizes").get<std::vector<long>>();
    }
    c.sampling = parse_sampling(get_or<std::string>(a, "sampling", "fresh"));
    c.draw = parse_draw(get_or<std::string>(a, "draw", "wishart"));
    c.redraw = parse_redraw(get_or<std::string>(a, "redraw", "per_run"));
  }

  for (const Json& h : j.value("constraints", Json::array())) {
    c.constraints.push_back(parse_halfspace(h));
  }
  if (j.contains("probabilities")) {
    c.probabilities = j.at("probabilities").get<std::vector<double>>();
  }
  c.lambda_penalty = get_or(j, "lambda_penalty", c.lambda_penalty);
  if (j.contains("lambda_penalties")) {
    c.lambda_penalties = j.at("lambda_penalties").get<std::vector<double>>();
  }

  if (j.contains("terminal")) {
    const Json& t = j.at("terminal");
    if (t.contains("alpha") && t.at("alpha").is_number()) {
      c.alpha = t.at("alpha").get<double>();
    }
    if (t.contains("ingredients")) {
      std::filesystem::path p = t.at("ingredients").get<std::string>();
      if (p.is_relative()) p = base / p;
      c.terminal_file = terminal_from_json(load_json_file(p.string()));
    }
    for (const Json& h : t.value("halfspaces", Json::array())) {
      const StageHalfspace s = parse_halfspace(h);
      c.terminal_halfspaces.push_back(
          {s.kind, s.normal / s.rhs, s.level, s.name});
    }
  }
  if (j.contains("unmodeled") && !j.at("unmodeled").is_null()) {
    c.unmodeled.step = j.at("unmodeled").at("step").get<int>();
    c.unmodeled.multiplier = j.at("unmodeled").at("multiplier").get<double>();
  }
  c.report_step = get_or(j, "report_step", c.report_step);
  c.stage0 = parse_stage0(get_or<std::string>(j, "stage0_gain", "toeplitz"));
  if (j.contains("solver")) {
    c.solver.tolerance = get_or(j.at("solver"), "tolerance", c.solver.tolerance);
    c.solver.max_iterations =
        get_or(j.at("solver"), "max_iterations", c.solver.max_iterations);
  }
  c.check_cost_decrease = get_or(j, "check_cost_decrease", false);
  c.keep_trajectories = get_or(j, "keep_trajectories", true);
  if (j.contains("outputs")) {
    c.outputs.runs_csv = get_or<std::string>(j.at("outputs"), "runs_csv", "");
    c.outputs.summary = get_or<std::string>(j.at("outputs"), "summary", "");
  }
  c.validate();
  return c;
}

}  // namespace

void ScenarioConfig::validate() const {
  system.validate();
  const int nx = system.nx();
  if (Q.rows() != nx || R.rows() != system.nu()) {
    throw InvalidArgument("weights have the wrong shape");
  }
  check_psd(Q, "Q", true);
  check_psd(R, "R", true);
  if (P) {
    if (P->rows() != nx) throw InvalidArgument("P has the wrong shape");
    check_psd(*P, "P", true);
  }
  if (sigma_true.rows() != system.nw()) {
    throw InvalidArgument("disturbance covariance has the wrong shape");
  }
  check_psd(sigma_true, "disturbance covariance", false);
  if (x0.size() != nx) throw InvalidArgument("x0 has the wrong length");
  if (horizon < 1) throw InvalidArgument("horizon must be >= 1");
  if (steps < 1) throw InvalidArgument("steps must be >= 1");
  if (runs < 1) throw InvalidArgument("runs must be >= 1");
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("beta in (0, 1)");
  if (!(sigma2 > 0.0)) throw InvalidArgument("sigma2 must be positive");
  if (epsilon && !(*epsilon > 0.0 && *epsilon < 0.5)) {
    throw InvalidArgument("epsilon in (0, 0.5)");
  }
  if (n_samples < 1) throw InvalidArgument("n_samples must be positive");
  for (long n : sample_sizes) {
    if (n < 1) throw InvalidArgument("sample sizes must be positive");
  }
  for (double p : probabilities) tightening_factor(p);
  for (double c : lambda_penalties) {
    if (!(c >= 0.0)) throw InvalidArgument("lambda penalties must be >= 0");
  }
  if (!(lambda_penalty >= 0.0)) throw InvalidArgument("lambda_penalty >= 0");
  for (const StageHalfspace& h : constraints) {
    const int len = h.kind == ConstraintKind::kState ? nx : system.nu();
    if (h.normal.size() != len) {
      throw InvalidArgument("constraint '" + h.name + "' has wrong length");
    }
    if (!(h.rhs > 0.0)) {
      throw InvalidArgument("constraint '" + h.name +
                            "' needs a positive right-hand side");
    }
    tightening_factor(h.level);
  }
  if (alpha && !(*alpha > 0.0)) throw InvalidArgument("alpha must be > 0");
  if (unmodeled.enabled() &&
      (unmodeled.step >= steps || !(unmodeled.multiplier >= 0.0))) {
    throw InvalidArgument("unmodeled disturbance outside the simulation");
  }
  if (report_step < 0 || report_step > steps) {
    throw InvalidArgument("report_step outside 0..steps");
  }
  if (!(solver.tolerance > 0.0) || solver.max_iterations < 1) {
    throw InvalidArgument("invalid solver settings");
  }
}

ScenarioConfig scenario_from_json(const Json& j) {
  try {
    return parse(j, std::filesystem::current_path());
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("scenario: ") + e.what());
  }
}

ScenarioConfig load_scenario(const std::string& path) {
  const Json j = load_json_file(path);
  try {
    return parse(j, std::filesystem::path(path).parent_path());
  } catch (const Json::exception& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
}

Json scenario_to_json(const ScenarioConfig& c) {
  Json j;
  j["name"] = c.name;
  j["system"] = {{"A", matrix_to_json(c.system.A)},
                 {"B", matrix_to_json(c.system.B)},
                 {"E", matrix_to_json(c.system.E)}};
  j["weights"] = {{"Q", matrix_to_json(c.Q)}, {"R", matrix_to_json(c.R)}};
  if (c.P) j["weights"]["P"] = matrix_to_json(*c.P);
  j["disturbance"] = {{"covariance", matrix_to_json(c.sigma_true)}};
  j["x0"] = vector_to_json(c.x0);
  j["horizon"] = c.horizon;
  j["steps"] = c.steps;
  j["runs"] = c.runs;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  Json a = {{"beta", c.beta},
            {"sigma2", c.sigma2},
            {"epsilon_objective",
             c.epsilon_objective == EpsilonObjective::kPrintedBeta
                 ? "printed"
                 : "half_beta"},
            {"n_samples", c.n_samples},
            {"exact_moments", c.exact_moments},
            {"sample_sizes", c.sample_sizes},
            {"sampling", to_string(c.sampling)},
            {"draw", to_string(c.draw)},
            {"redraw",
             c.redraw == SampleRedraw::kPerRun ? "per_run" : "per_experiment"}};
  if (c.epsilon) {
    a["epsilon"] = *c.epsilon;
  } else {
    a["epsilon"] = "optimal";
  }
  j["ambiguity"] = a;
  Json cons = Json::array();
  for (const StageHalfspace& h : c.constraints) {
    cons.push_back(halfspace_to_json(h));
  }
  j["constraints"] = cons;
  j["probabilities"] = c.probabilities;
  j["lambda_penalty"] = c.lambda_penalty;
  j["lambda_penalties"] = c.lambda_penalties;
  Json t = Json::object();
  if (c.alpha) {
    t["alpha"] = *c.alpha;
  } else {
    t["alpha"] = "auto";
  }
  j["terminal"] = t;
  if (c.unmodeled.enabled()) {
    j["unmodeled"] = {{"step", c.unmodeled.step},
                      {"multiplier", c.unmodeled.multiplier}};
  } else {
    j["unmodeled"] = nullptr;
  }
  j["report_step"] = c.report_step;
  j["stage0_gain"] =
      c.stage0 == Stage0Gain::kToeplitz ? "toeplitz" : "pseudo_inverse";
  j["solver"] = {{"tolerance", c.solver.tolerance},
                 {"max_iterations", c.solver.max_iterations}};
  j["check_cost_decrease"] = c.check_cost_decrease;
  j["keep_trajectories"] = c.keep_trajectories;
  j["outputs"] = {{"runs_csv", c.outputs.runs_csv},
                  {"summary", c.outputs.summary}};
  return j;
}

ScenarioConfig double_integrator_scenario() {
  ScenarioConfig c;
  c.name = "double-integrator";
  c.system.A = Matrix{{1.0, 1.0}, {0.0, 1.0}};
  c.system.B = Matrix{{0.5}, {1.0}};
  c.system.E = Matrix::Identity(2, 2);
  c.Q = 10.0 * Matrix::Identity(2, 2);
  c.R = Matrix::Identity(1, 1);
  c.sigma_true = 1e-4 * Matrix::Identity(2, 2);
  c.x0 = Vector{{-6.0, 0.0}};
  c.horizon = 10;
  c.steps = 15;
  c.runs = 1000;
  c.seed = 20240607;
  c.beta = 0.05;
  c.sigma2 = 1.0;
  c.epsilon = 0.0428;
  c.n_samples = 550;
  c.sample_sizes = {550, 800, 1000, 3000, 10000, 100000, 1000000};
  StageHalfspace h;
  h.kind = ConstraintKind::kState;
  h.normal = Vector{{0.0, 1.0}};
  h.rhs = 1.0;
  h.level = 0.9;
  h.name = "x2";
  c.constraints = {h};
  c.probabilities = {0.7, 0.8, 0.9};
  c.lambda_penalties = {0.0, 10.0, 1e3, 1e6};
  c.alpha = 0.5293;
  c.report_step = 5;
  return c;
}

const char* to_string(SamplingMode m) {
  return m == SamplingMode::kFresh ? "fresh" : "nested";
}

const char* to_string(CovarianceDraw d) {
  return d == CovarianceDraw::kWishart ? "wishart" : "explicit";
}

AmbiguityCalibration scenario_calibration(const ScenarioConfig& cfg, long n) {
  if (cfg.exact_moments) return exact_moments();
  const double eps =
      cfg.epsilon ? *cfg.epsilon
                  : optimize_epsilon(cfg.beta, cfg.sub_gaussian(),
                                     cfg.epsilon_objective);
  return calibrate(cfg.beta, cfg.sub_gaussian(), n, eps);
}

TerminalIngredients scenario_terminal(const ScenarioConfig& cfg,
                                      const AmbiguityCalibration& calib,
                                      const Matrix& sigma_hat) {
  std::vector<TerminalHalfspace> hs = cfg.terminal_halfspaces;
  if (hs.empty()) hs = terminal_halfspaces(cfg.constraints);

  TerminalIngredients t;
  if (cfg.terminal_file) {
    t = *cfg.terminal_file;
    if (t.halfspaces.empty()) t.halfspaces = hs;
  } else {
    const LQRSolution lqr = synthesize_gain(cfg.system, cfg.Q, cfg.R);
    t.K = lqr.K;
    t.P = cfg.P ? *cfg.P : lqr.P;
    t.halfspaces = hs;
    t.sigma_inf =
        steady_state_cov(cfg.system, t.K, calib.kappa * sigma_hat);
    if (cfg.P) {
      const double res = lyapunov_residual(cfg.system.A, cfg.system.B, t.K,
                                           CostWeights{cfg.Q, cfg.R, t.P});
      if (res < -1e-8) {
        throw InvalidArgument(
            "configured P violates the Lyapunov inequality for the LQR gain "
            "(min eigenvalue " + std::to_string(res) + ")");
      }
    }
    if (!cfg.alpha) {
      t.alpha = max_alpha(t.P, t.K, t.sigma_inf, t.halfspaces);
    }
  }
  if (cfg.alpha) t.alpha = *cfg.alpha;
  return t;
}

ControllerConfig make_controller_config(const ScenarioConfig& cfg,
                                        const AmbiguityCalibration& calib,
                                        const EmpiricalCovariance& sigma_hat) {
  ControllerConfig c;
  c.model = build_stacked(cfg.system, cfg.horizon);
  c.terminal = scenario_terminal(cfg, calib, sigma_hat.sigma_hat);
  c.weights.Q = cfg.Q;
  c.weights.R = cfg.R;
  c.weights.P = c.terminal.P;
  c.calib = calib;
  c.sigma_hat = sigma_hat;
  c.constraints = lift_halfspaces(cfg.constraints, c.model);
  c.lambda_penalty = cfg.lambda_penalty;
  c.solver = cfg.solver;
  c.stage0 = cfg.stage0;
  return c;
}

}  // namespace drmpc
