#pragma once

#include <string>
#include <vector>

#include "drmpc/prediction_model.hpp"
#include "drmpc/tightening.hpp"

namespace drmpc {

/// Terminal halfspace a^T z <= 1 in state (or input u = K z) coordinates.
struct TerminalHalfspace {
  ConstraintKind kind = ConstraintKind::kState;
  Vector normal;
  double level = 0.5;
  std::string name;
};

struct TerminalIngredients {
  Matrix K;          // u = K x
  Matrix P;
  Matrix sigma_inf;  // worst-case steady-state covariance
  double alpha = 0.0;
  std::vector<TerminalHalfspace> halfspaces;
};

struct LQRSolution {
  Matrix K;
  Matrix P;
  int iterations = 0;
};

/// Infinite-horizon LQR through the structure-preserving doubling
/// algorithm. Throws TerminalError if it fails to converge.
LQRSolution synthesize_gain(const LTISystem& sys, const Matrix& Q,
                            const Matrix& R, int max_iterations = 10000,
                            double tol = 1e-12);

/// Fixed point of X = (A+BK) X (A+BK)^T + E (kappa sigma_hat) E^T.
Matrix steady_state_cov(const LTISystem& sys, const Matrix& K,
                        const Matrix& kappa_sigma);

/// Right-hand side 1 - sqrt(p/(1-p)) sqrt(a^T sigma_inf a) for one row.
double tightened_terminal_rhs(const TerminalHalfspace& h, const Matrix& K,
                              const Matrix& sigma_inf);

/// Largest alpha such that {z : z^T P z <= alpha} satisfies every
/// tightened terminal row. Throws TerminalSetEmpty if a right-hand side is
/// not positive.
double max_alpha(const Matrix& P, const Matrix& K, const Matrix& sigma_inf,
                 const std::vector<TerminalHalfspace>& halfspaces);

/// (A+BK)^T P (A+BK) <= P, which makes every sublevel set invariant.
bool check_invariance(const LTISystem& sys, const Matrix& K, const Matrix& P,
                      double alpha, double tol = 1e-9);

/// Terminal halfspaces derived from the per-stage constraints.
std::vector<TerminalHalfspace> terminal_halfspaces(
    const std::vector<StageHalfspace>& stage_specs);

/// LQR pair, steady-state covariance and the largest admissible alpha.
TerminalIngredients synthesize_terminal(
    const LTISystem& sys, const Matrix& Q, const Matrix& R,
    const Matrix& kappa_sigma,
    const std::vector<TerminalHalfspace>& halfspaces);

}  // namespace drmpc
