#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "drmpc/ambiguity.hpp"
#include "drmpc/controller.hpp"
#include "drmpc/json_io.hpp"
#include "drmpc/prediction_model.hpp"
#include "drmpc/terminal.hpp"
#include "drmpc/tightening.hpp"

namespace drmpc {

/// How sample sets relate across an N_s sweep within one run.
enum class SamplingMode {
  kFresh,   // independent samples for every N_s
  kNested,  // the set for a larger N_s extends the set for a smaller one
};

/// How an empirical covariance is produced from N_s Gaussian samples.
enum class CovarianceDraw {
  kWishart,   // Bartlett decomposition, exact in law and O(n_w^2)
  kExplicit,  // draw every sample
};

/// Whether each Monte-Carlo run sees its own sample set.
enum class SampleRedraw { kPerRun, kPerExperiment };

struct UnmodeledDisturbance {
  int step = -1;  // w(step) is drawn with multiplier * sigma_true
  double multiplier = 1.0;
  bool enabled() const { return step >= 0; }
};

struct ScenarioConfig {
  std::string name = "scenario";
  LTISystem system;
  Matrix Q;
  Matrix R;
  std::optional<Matrix> P;  // DARE solution when absent
  Matrix sigma_true;
  Vector x0;
  int horizon = 10;
  int steps = 15;  // T: inputs at k = 0..T, cost over k = 1..T
  int runs = 1000;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: hardware concurrency

  double beta = 0.05;
  double sigma2 = 1.0;
  std::optional<double> epsilon;  // optimal when absent
  EpsilonObjective epsilon_objective = EpsilonObjective::kPrintedBeta;
  long n_samples = 550;
  bool exact_moments = false;  // kappa = 1, sigma_hat = sigma_true
  std::vector<long> sample_sizes;
  SamplingMode sampling = SamplingMode::kFresh;
  CovarianceDraw draw = CovarianceDraw::kWishart;
  SampleRedraw redraw = SampleRedraw::kPerRun;

  std::vector<StageHalfspace> constraints;
  std::vector<double> probabilities;  // level sweep for state constraints
  double lambda_penalty = 0.0;
  std::vector<double> lambda_penalties;

  std::optional<double> alpha;  // synthesized from each sigma_hat if absent
  std::optional<TerminalIngredients> terminal_file;
  std::vector<TerminalHalfspace> terminal_halfspaces;  // derived if empty

  UnmodeledDisturbance unmodeled;
  int report_step = 5;  // P(constraint holds at x(report_step))
  Stage0Gain stage0 = Stage0Gain::kToeplitz;
  SolverSettings solver;
  bool check_cost_decrease = false;
  bool keep_trajectories = true;

  struct Outputs {
    std::string runs_csv;
    std::string summary;
  } outputs;

  SubGaussianSpec sub_gaussian() const { return {sigma2, system.nw()}; }

  /// Throws InvalidArgument on inconsistent fields.
  void validate() const;
};

ScenarioConfig scenario_from_json(const Json& j);
ScenarioConfig load_scenario(const std::string& path);
Json scenario_to_json(const ScenarioConfig& cfg);

/// Double integrator with B = [0.5; 1], x(0) = [-6, 0] and x2 <= 1.
ScenarioConfig double_integrator_scenario();

const char* to_string(SamplingMode m);
const char* to_string(CovarianceDraw d);

/// Calibration for n samples, or kappa = 1 when exact moments are used.
AmbiguityCalibration scenario_calibration(const ScenarioConfig& cfg, long n);

/// LQR pair (or the configured P with its LQR gain) and the terminal level
/// for a given calibration and empirical covariance.
TerminalIngredients scenario_terminal(const ScenarioConfig& cfg,
                                      const AmbiguityCalibration& calib,
                                      const Matrix& sigma_hat);

/// Assembles everything the controller needs for one sample realization.
ControllerConfig make_controller_config(const ScenarioConfig& cfg,
                                        const AmbiguityCalibration& calib,
                                        const EmpiricalCovariance& sigma_hat);

}  // namespace drmpc
