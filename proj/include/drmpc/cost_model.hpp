#pragma once

#include "drmpc/decision_layout.hpp"

namespace drmpc {

struct CostWeights {
  Matrix Q;
  Matrix R;
  Matrix P;

  /// Symmetric positive definite checks. Throws InvalidArgument.
  void validate(int nx, int nu) const;

  Matrix qbar(int horizon) const;  // diag(I_N kron Q, P)
  Matrix rbar(int horizon) const;  // I_N kron R
};

/// Min eigenvalue of P - (A+BK)^T P (A+BK) - Q - K^T R K.
double lyapunov_residual(const Matrix& A, const Matrix& B, const Matrix& K,
                         const CostWeights& w);

/// diag(kappa I_N kron sigma_hat, 1)
struct WorstCaseSecondMoment {
  double kappa = 1.0;
  Matrix sigma_hat;
  int horizon = 0;

  Matrix sigma_d() const;
};

/// tr(Sigma_d [H^T Qbar H + F^T Rbar F]) with H = [bbar Mbar + ebar, z],
/// F = [Mbar, vbar], evaluated literally.
double trace_cost(const StackedSADF& policy, const Vector& z0,
                  const StackedModel& model, const CostWeights& weights,
                  const WorstCaseSecondMoment& moment);

/// Same value through squared Frobenius norms.
double frobenius_cost(const StackedSADF& policy, const Vector& z0,
                      const StackedModel& model, const CostWeights& weights,
                      const WorstCaseSecondMoment& moment);

/// Cost as a sum of squares ||F x + f||^2 in the packed decision vector.
struct SquaresObjective {
  Matrix F;
  Vector f;

  double value(const Vector& x) const { return (F * x + f).squaredNorm(); }
};

SquaresObjective trace_cost_squares(const StackedModel& model,
                                    const DecisionLayout& layout,
                                    const CostWeights& weights,
                                    const WorstCaseSecondMoment& moment);

struct MeanVarianceCost {
  double mean = 0.0;      // J^m, nominal trajectory
  double variance = 0.0;  // J^v, second moment of the error
  double cross = 0.0;     // 2 E{nominal^T W error}; zero unless e0 != 0
  double total() const { return mean + variance + cross; }
};

/// Mean part from the nominal trajectory, variance part from the exact
/// second-moment recursion of the stacked error
///   e_{t+1} = A e_t + B sum_{i<=t} K(t, i) e_i + E w_t,
/// started at E{e_0 e_0^T} = sigma_x0 + e0 e0^T. kbar may be any block
/// lower-triangular gain; cross-covariances between stages are kept.
MeanVarianceCost mean_variance_cost(const Vector& nominal, const Vector& gbar,
                                    const Matrix& kbar,
                                    const CostWeights& weights,
                                    const Matrix& kappa_sigma,
                                    const LTISystem& sys,
                                    const Matrix& sigma_x0,
                                    const Vector& e0);

MeanVarianceCost mean_variance_cost(const Vector& nominal, const Vector& gbar,
                                    const Matrix& kbar,
                                    const CostWeights& weights,
                                    const Matrix& kappa_sigma,
                                    const LTISystem& sys);

}  // namespace drmpc
