#pragma once

#include <string>
#include <vector>

#include "drmpc/ambiguity.hpp"
#include "drmpc/decision_layout.hpp"

namespace drmpc {

enum class ConstraintKind { kState, kInput };

/// Halfspace in stacked coordinates, normalized to normal^T (.) <= 1 and
/// required with probability `level`.
struct HalfspaceSpec {
  ConstraintKind kind = ConstraintKind::kState;
  Vector normal;  // length (N+1) nx for states, N nu for inputs
  double level = 0.5;
  int stage = 0;
  int index = 0;
  std::string name;
};

/// Per-stage halfspace a^T x <= b (or a^T u <= b) as written in a scenario.
struct StageHalfspace {
  ConstraintKind kind = ConstraintKind::kState;
  Vector normal;
  double rhs = 1.0;  // must be positive
  double level = 0.5;
  int first_stage = 0;
  int last_stage = -1;  // -1: up to N-1
  std::string name;
};

/// Lifts per-stage halfspaces into stacked specs, one per stage in range.
std::vector<HalfspaceSpec> lift_halfspaces(
    const std::vector<StageHalfspace>& stage_specs,
    const StackedModel& model);

/// sqrt(p / (1 - p)); rejects p outside (0, 1).
double tightening_factor(double level);

/// Block-diagonal factor S with S S^T = I_N kron sigma_hat.
Matrix sigma_n_factor(const Matrix& sigma_hat, int horizon);

/// scalar >= ||vec||_2 with scalar = c^T x + d and vec = D x + e, where x
/// follows a DecisionLayout.
struct SOCRow {
  HalfspaceSpec spec;
  Vector c;
  double d = 0.0;
  Matrix D;
  Vector e;
};

/// 1 - h^T (abar z0 + bbar vbar)
///   >= sqrt(kappa) sqrt(p / (1 - p)) ||S^T (bbar Mbar + ebar)^T h||.
SOCRow state_row(const HalfspaceSpec& h, const StackedModel& model,
                 const DecisionLayout& layout, double kappa, const Matrix& S);

/// 1 - l^T vbar >= sqrt(kappa) sqrt(p / (1 - p)) ||S^T Mbar^T l||.
SOCRow input_row(const HalfspaceSpec& l, const StackedModel& model,
                 const DecisionLayout& layout, double kappa, const Matrix& S);

/// Builds the row for either kind.
SOCRow tightened_row(const HalfspaceSpec& spec, const StackedModel& model,
                     const DecisionLayout& layout, double kappa,
                     const Matrix& S);

/// scalar - ||vec|| at a packed decision vector.
double row_slack(const SOCRow& row, const Vector& x);

/// Slack of the tightened constraint for an arbitrary (possibly
/// non-Toeplitz) SADF pair.
double tightened_slack(const HalfspaceSpec& spec, const StackedModel& model,
                       double kappa, const Matrix& S, const StackedSADF& policy,
                       const Vector& z0);

}  // namespace drmpc
