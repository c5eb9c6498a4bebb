#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "drmpc/controller.hpp"
#include "drmpc/scenario.hpp"

namespace drmpc {

// Seeds. Every run r of an experiment with master seed m owns independent
// streams seeded by child_seed(m, r, stream); the disturbance stream does
// not depend on N_s or c, so sweeps share common random numbers.
inline constexpr std::uint64_t kSampleStream = 1;
inline constexpr std::uint64_t kNoiseStream = 2;
inline constexpr std::uint64_t kSharedSampleStream = 3;

std::uint64_t splitmix64(std::uint64_t x);

/// splitmix64(splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15) ^ stream)
std::uint64_t child_seed(std::uint64_t master, std::uint64_t index,
                         std::uint64_t stream);

using Rng = std::mt19937_64;

/// Sum of w w^T over n draws of w = L xi, xi standard normal.
Matrix gaussian_scatter(const Matrix& factor, long n, CovarianceDraw draw,
                        Rng& rng);

/// Empirical second moment of n Gaussian samples with covariance sigma.
EmpiricalCovariance draw_sigma_hat(const Matrix& sigma, long n,
                                   CovarianceDraw draw, Rng& rng);

/// The empirical covariance run `run` sees at sample size n, following the
/// scenario's redraw and sampling modes.
EmpiricalCovariance scenario_sigma_hat(const ScenarioConfig& cfg,
                                       std::uint64_t run, long n);

struct RunRecord {
  long run = 0;
  std::uint64_t seed = 0;  // disturbance stream
  long n_samples = 0;
  double kappa = 1.0;
  double alpha = 0.0;
  Matrix states;                // (T+1) x nx, row k = x(k)
  Matrix inputs;                // (T+1) x nu, row k = u(k)
  Vector lambdas;               // T+1
  std::vector<int> taus;        // T+1
  std::vector<int> iterations;  // T+1
  Vector solve_ms;              // T+1
  std::vector<char> satisfied;  // T+1, every state halfspace holds at x(k)
  double cost = 0.0;            // sum_{k=1}^{T} |x(k)|_Q^2 + |u(k)|_R^2
  int retries = 0;
  std::vector<CostDecreaseReport> decrease;  // k = 0..T-1 when enabled
};

/// Simulates x(k+1) = A x + B u + E w for k = 0..T with the controller in
/// the loop. The disturbance sequence depends only on `seed`.
RunRecord run_closed_loop(const ScenarioConfig& cfg, const Controller& ctl,
                          std::uint64_t seed);

/// Controller for Monte-Carlo run `run`.
using ControllerFactory = std::function<Controller(long run)>;

/// Draws sigma_hat for the run at cfg.n_samples and calibrates.
ControllerFactory default_factory(const ScenarioConfig& cfg);

struct SimulationReport {
  long runs = 0;
  int steps = 0;
  long n_samples = 0;
  double lambda_penalty = 0.0;
  std::vector<double> levels;
  std::vector<RunRecord> records;  // empty unless trajectories are kept

  double mean_cost = 0.0;
  double cost_stderr = 0.0;
  std::vector<double> step_satisfaction;  // k = 0..T
  double worst_case_satisfaction = 1.0;   // min over k
  double report_satisfaction = 1.0;       // at cfg.report_step
  // x(k), k >= 1, split by the tau of the solve at k - 1.
  double satisfaction_tau0 = 1.0;
  long count_tau0 = 0;
  double satisfaction_tau_pos = 1.0;
  long count_tau_pos = 0;

  std::array<long, 10> lambda_histogram{};  // bins of width 0.1 on [0, 1]
  double mean_lambda = 0.0;
  double mean_kappa = 0.0;
  double mean_alpha = 0.0;
  long solves = 0;
  long retries = 0;
  double mean_iterations = 0.0;
  double mean_solve_ms = 0.0;
  double p95_solve_ms = 0.0;
  double max_solve_ms = 0.0;

  bool decrease_checked = false;
  double max_decrease_residual = 0.0;      // candidate - bound
  double max_next_minus_candidate = 0.0;   // J*(k+1) - candidate
  double min_candidate_slack = 0.0;
};

/// Runs cfg.runs simulations in a worker pool and reduces them in run
/// order. Throws ExperimentError for the lowest failing run index.
SimulationReport monte_carlo(const ScenarioConfig& cfg,
                             const ControllerFactory& factory);
SimulationReport monte_carlo(const ScenarioConfig& cfg);

struct SweepRow {
  long n_samples = 0;
  double level = 0.0;
  double lambda_penalty = 0.0;
  double kappa = 1.0;
  SimulationReport report;
  std::string failure;  // set when the point could not be initialized
};

/// One experiment per entry of cfg.sample_sizes.
std::vector<SweepRow> sweep_samples(const ScenarioConfig& cfg);

/// One experiment per entry of cfg.lambda_penalties.
std::vector<SweepRow> sweep_penalty(const ScenarioConfig& cfg);

/// Worst-case satisfaction for every (level, N_s) pair; the level applies
/// to every state constraint. Cells whose first problem is infeasible come
/// back with `failure` set and NaN rates.
std::vector<SweepRow> table1_experiment(const ScenarioConfig& cfg);

/// Penalty sweep with the unmodeled disturbance; requires it configured.
std::vector<SweepRow> table2_experiment(const ScenarioConfig& cfg);

struct Fig1Result {
  std::vector<SweepRow> curve;
  SweepRow baseline;  // kappa = 1, sigma_hat = sigma_true
};

Fig1Result fig1_experiment(const ScenarioConfig& cfg);

// Output. CSV files have one header row, '.' decimals and full precision.
std::string runs_csv(const SimulationReport& report);
std::string summary_csv_header();
std::string summary_csv_row(const std::string& label, const SweepRow& row);
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string fig1_csv(const Fig1Result& result);
Json report_to_json(const SimulationReport& report, bool with_records);
Json sweep_to_json(const std::vector<SweepRow>& rows);

}  // namespace drmpc
