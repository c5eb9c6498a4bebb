#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "drmpc/ambiguity.hpp"
#include "drmpc/errors.hpp"
#include "drmpc/harness.hpp"
#include "drmpc/json_io.hpp"
#include "drmpc/log.hpp"
#include "drmpc/scenario.hpp"

using namespace drmpc;

namespace {

struct Common {
  std::string config;
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out;
  std::string format = "csv";
  bool verbose = false;
};

void add_common(CLI::App* app, Common& c, bool need_config) {
  auto* opt = app->add_option("--config", c.config, "scenario JSON");
  if (need_config) opt->required()->check(CLI::ExistingFile);
  app->add_option("--runs", c.runs, "Monte-Carlo runs");
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--threads", c.threads, "worker threads (0: all cores)");
  app->add_option("--out", c.out, "output file (stdout when omitted)");
  app->add_option("--format", c.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  app->add_flag("--verbose", c.verbose, "per-step diagnostics as JSON lines");
}

ScenarioConfig load(const Common& c) {
  ScenarioConfig cfg = load_scenario(c.config);
  if (c.runs) cfg.runs = *c.runs;
  if (c.seed) cfg.seed = *c.seed;
  if (c.threads) cfg.threads = *c.threads;
  cfg.validate();
  return cfg;
}

// --out wins over the path named in the config; stdout if neither is set.
void emit(const Common& c, const std::string& text,
          const std::string& fallback = "") {
  const std::string path = c.out.empty() ? fallback : c.out;
  if (path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    write_text_file(path, text);
  }
}

void print_summary(const SimulationReport& r) {
  std::cerr << "runs " << r.runs << "  mean cost " << r.mean_cost << " +- "
            << r.cost_stderr << "  worst-case satisfaction "
            << r.worst_case_satisfaction << "  mean solve " << r.mean_solve_ms
            << " ms\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven distributionally robust MPC"};
  app.require_subcommand(1);

  Common common;
  double beta = 0.05;
  double sigma2 = 1.0;
  int nw = 2;
  std::optional<double> epsilon;
  std::optional<long> samples;

  auto* cal = app.add_subcommand("calibrate", "epsilon, minimum N_s and kappa");
  add_common(cal, common, false);
  cal->add_option("--beta", beta, "confidence parameter");
  cal->add_option("--sigma2", sigma2, "variance proxy");
  cal->add_option("--nw", nw, "disturbance dimension");
  cal->add_option("--epsilon", epsilon, "net parameter (optimal if omitted)");
  cal->add_option("--samples", samples, "N_s for kappa");

  auto* term = app.add_subcommand("terminal", "synthesize terminal ingredients");
  add_common(term, common, true);
  term->add_option("--samples", samples, "N_s of the fixture sample set");

  auto* run = app.add_subcommand("run", "Monte-Carlo runs of one scenario");
  add_common(run, common, true);
  auto* sns = app.add_subcommand("sweep-ns", "sweep over sample sizes");
  add_common(sns, common, true);
  auto* sc = app.add_subcommand("sweep-c", "sweep over lambda penalties");
  add_common(sc, common, true);
  auto* f1 = app.add_subcommand("fig1", "cost versus N_s with baseline");
  add_common(f1, common, true);
  auto* t1 = app.add_subcommand("table1", "satisfaction versus (p, N_s)");
  add_common(t1, common, true);
  auto* t2 = app.add_subcommand("table2", "penalty sweep, unmodeled noise");
  add_common(t2, common, true);

  CLI11_PARSE(app, argc, argv);
  set_log_level(common.verbose ? LogLevel::kDebug : LogLevel::kWarning);

  try {
    if (cal->parsed()) {
      if (!common.config.empty()) {
        const ScenarioConfig cfg = load(common);
        beta = cfg.beta;
        sigma2 = cfg.sigma2;
        nw = cfg.system.nw();
        if (!epsilon) epsilon = cfg.epsilon;
        if (!samples) samples = cfg.n_samples;
      }
      const SubGaussianSpec spec{sigma2, nw};
      const double eps_star = optimize_epsilon(beta, spec);
      const double eps = epsilon ? *epsilon : eps_star;
      Json j = {{"beta", beta},
                {"sigma2", sigma2},
                {"n_w", nw},
                {"epsilon_star", eps_star},
                {"epsilon", eps},
                {"n_samples_min", min_samples(beta, eps, spec)}};
      if (samples) {
        const AmbiguityCalibration c = calibrate(beta, spec, *samples, eps);
        j["n_samples"] = c.n_samples;
        j["gamma"] = c.gamma;
        j["kappa"] = c.kappa;
      }
      emit(common, j.dump(2));
    } else if (term->parsed()) {
      ScenarioConfig cfg = load(common);
      if (samples) cfg.n_samples = *samples;
      cfg.alpha.reset();
      cfg.terminal_file.reset();
      const AmbiguityCalibration calib =
          scenario_calibration(cfg, cfg.n_samples);
      const EmpiricalCovariance sh = scenario_sigma_hat(cfg, 0, cfg.n_samples);
      const TerminalIngredients t = scenario_terminal(cfg, calib, sh.sigma_hat);
      Json j = terminal_to_json(t);
      j["n_samples"] = cfg.n_samples;
      j["kappa"] = calib.kappa;
      j["sigma_hat"] = matrix_to_json(sh.sigma_hat);
      emit(common, j.dump(2));
    } else if (run->parsed()) {
      ScenarioConfig cfg = load(common);
      cfg.keep_trajectories = true;
      const SimulationReport r = monte_carlo(cfg);
      print_summary(r);
      emit(common,
           common.format == "json" ? report_to_json(r, true).dump(1)
                                   : runs_csv(r),
           cfg.outputs.runs_csv);
    } else {
      const ScenarioConfig cfg = load(common);
      if (f1->parsed()) {
        const Fig1Result res = fig1_experiment(cfg);
        if (common.format == "json") {
          Json j = {{"curve", sweep_to_json(res.curve)},
                    {"baseline", sweep_to_json({res.baseline}).front()}};
          emit(common, j.dump(1), cfg.outputs.summary);
        } else {
          emit(common, fig1_csv(res), cfg.outputs.summary);
        }
        return 0;
      }
      std::vector<SweepRow> rows;
      if (sns->parsed()) rows = sweep_samples(cfg);
      if (sc->parsed()) rows = sweep_penalty(cfg);
      if (t1->parsed()) rows = table1_experiment(cfg);
      if (t2->parsed()) rows = table2_experiment(cfg);
      emit(common,
           common.format == "json" ? sweep_to_json(rows).dump(1)
                                   : sweep_csv(rows),
           cfg.outputs.summary);
    }
  } catch (const ExperimentError& e) {
    std::cerr << "experiment failed: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
