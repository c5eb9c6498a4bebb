#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "drmpc/ambiguity.hpp"
#include "drmpc/conic.hpp"
#include "drmpc/cost_model.hpp"
#include "drmpc/policy.hpp"
#include "drmpc/terminal.hpp"
#include "drmpc/tightening.hpp"

namespace drmpc {

struct ControllerConfig {
  StackedModel model;
  CostWeights weights;
  AmbiguityCalibration calib;
  EmpiricalCovariance sigma_hat;
  std::vector<HalfspaceSpec> constraints;  // stacked, stages 0..N-1
  TerminalIngredients terminal;
  double lambda_penalty = 0.0;  // c in c * lambda^2
  SolverSettings solver;
  Stage0Gain stage0 = Stage0Gain::kToeplitz;
  double lambda_zero_tol = 1e-6;
  std::shared_ptr<const ConicBackend> backend;  // default when null

  void validate() const;
};

/// What the controller carries from one sampling instant to the next.
struct ControllerState {
  int k = 0;
  SADFPolicy sadf;
  ErrorFeedbackPolicy ef;
  Vector nominal;  // optimal z at time k
  Vector z0;
  double lambda = 0.0;
  double objective = 0.0;  // J*(k), including c * lambda^2
  int tau = 0;             // steps since the last lambda = 0 solve
  ShiftedCandidate candidate;
};

struct ConstraintSlack {
  std::string name;
  double slack = 0.0;
};

struct StepDiagnostics {
  int k = 0;
  double lambda = 0.0;
  double objective = 0.0;
  SolveStatus status = SolveStatus::kOptimal;
  Vector u;
  Vector z0;
  Vector nominal;
  std::vector<ConstraintSlack> slacks;  // tightened rows and terminal set
  int tau = 0;
  int iterations = 0;
  double solve_time_ms = 0.0;
  double prediction_gap = 0.0;  // ||x(k) - z_{0|k}||
  bool retried = false;
};

struct StepResult {
  Vector u;
  ControllerState state;
  StepDiagnostics diagnostics;
};

/// Cost-decrease bookkeeping between two consecutive solves.
struct CostDecreaseReport {
  double candidate_cost = 0.0;   // shifted error-feedback candidate, lambda = 1
  double bound = 0.0;            // J*(k) - l(z0, g0) + kappa tr(P E S E') + c
  double residual = 0.0;         // candidate_cost - bound
  double next_optimal = 0.0;     // J*(k+1)
  double candidate_min_slack = 0.0;
  double toeplitz_candidate_cost = 0.0;
  double toeplitz_candidate_min_slack = 0.0;
};

class Controller {
 public:
  explicit Controller(ControllerConfig config);

  const ControllerConfig& config() const { return cfg_; }
  const Matrix& sigma_factor() const { return S_; }

  /// Problem at measured state x; state == nullptr means k = 0 (lambda
  /// fixed to zero, z0 = x).
  ConicProgram build_problem(const Vector& x,
                             const ControllerState* state) const;

  StepResult step(const Vector& x,
                  const std::optional<ControllerState>& state) const;

  /// Controller objective at an arbitrary (possibly non-Toeplitz) SADF
  /// pair with z0 given.
  double evaluate_cost(const StackedSADF& policy, const Vector& z0,
                       double lambda) const;

  /// Smallest slack over the tightened rows and the terminal set.
  double min_slack(const StackedSADF& policy, const Vector& z0) const;

  /// kappa tr(P E sigma_hat E^T)
  double steady_cost() const;

  CostDecreaseReport cost_decrease_check(const ControllerState& at_k,
                                         double next_optimal) const;

 private:
  ConicProgram make_template(bool with_lambda) const;
  std::vector<ConstraintSlack> slacks(const DecisionLayout& layout,
                                      const Vector& x) const;

  ControllerConfig cfg_;
  Matrix S_;
  std::vector<SOCRow> rows0_;
  std::vector<SOCRow> rows1_;
  ConicProgram template0_;
  ConicProgram template1_;
};

}  // namespace drmpc
