#include <gtest/gtest.h>

#include "drmpc/cost_model.hpp"
#include "drmpc/errors.hpp"
#include "drmpc/terminal.hpp"
#include "oracles.hpp"

using namespace drmpc;

namespace {

CostWeights reference_weights(const LTISystem& sys) {
  CostWeights w;
  w.Q = 10.0 * Matrix::Identity(2, 2);
  w.R = Matrix::Identity(1, 1);
  w.P = synthesize_gain(sys, w.Q, w.R).P;
  return w;
}

}  // namespace

TEST(CostModel, TraceFrobeniusAndSquaresAgree) {
  std::mt19937_64 rng(3);
  for (int horizon : {1, 2, 5, 10}) {
    const StackedModel model = build_stacked(oracle::double_integrator(), horizon);
    const CostWeights w = reference_weights(model.sys);
    const DecisionLayout layout(model, true);
    for (int trial = 0; trial < 5; ++trial) {
      const Matrix a = oracle::random_matrix(2, 2, rng, 0.01);
      WorstCaseSecondMoment m{1.0 + 10.0 * trial, a * a.transpose() +
                                                     1e-4 * Matrix::Identity(2, 2),
                              horizon};
      const SADFPolicy p = oracle::random_sadf(model, rng);
      const Vector z0 = oracle::random_vector(2, rng, 3.0);
      const StackedSADF s = to_stacked(p, model);
      const double t = trace_cost(s, z0, model, w, m);
      EXPECT_NEAR(frobenius_cost(s, z0, model, w, m), t, 1e-10 * t);
      const SquaresObjective obj = trace_cost_squares(model, layout, w, m);
      EXPECT_NEAR(obj.value(layout.pack(p, z0, 0.7)), t, 1e-10 * t);
    }
  }
}

TEST(CostModel, MatchesSimulatedExpectation) {
  std::mt19937_64 rng(5);
  const StackedModel model = build_stacked(oracle::double_integrator(), 6);
  const CostWeights w = reference_weights(model.sys);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = oracle::random_matrix(2, 2, rng, 0.3);
    const Matrix sigma = a * a.transpose();
    const double kappa = 1.0 + trial;
    // Arbitrary strictly lower-triangular Mbar, not only Toeplitz ones.
    StackedSADF s;
    s.vbar = oracle::random_vector(6, rng);
    s.mbar = Matrix::Zero(6, 12);
    for (int t = 1; t < 6; ++t) {
      s.mbar.block(t, 0, 1, 2 * t) = oracle::random_matrix(1, 2 * t, rng, 0.4);
    }
    const Vector z0 = oracle::random_vector(2, rng, 2.0);
    const double want = oracle::expected_cost_by_simulation(
        s, z0, model.sys, 6, w, kappa * sigma);
    const double got = trace_cost(s, z0, model, w, {kappa, sigma, 6});
    EXPECT_NEAR(got, want, 1e-9 * want);
  }
}

TEST(CostModel, MeanPlusVarianceEqualsTraceCost) {
  std::mt19937_64 rng(8);
  const StackedModel model = build_stacked(oracle::double_integrator(), 8);
  const CostWeights w = reference_weights(model.sys);
  for (int trial = 0; trial < 10; ++trial) {
    const SADFPolicy p = oracle::random_sadf(model, rng);
    const Vector z0 = oracle::random_vector(2, rng, 2.0);
    const Matrix a = oracle::random_matrix(2, 2, rng, 0.1);
    const Matrix sigma = a * a.transpose();
    const double kappa = 2.5;
    const StackedSADF s = to_stacked(p, model);
    const ErrorFeedbackPolicy ef = sadf_to_ef(p, model);
    const Vector nominal = nominal_trajectory(model, z0, p.vbar);
    const MeanVarianceCost mv = mean_variance_cost(
        nominal, ef.gbar, ef.kbar, w, kappa * sigma, model.sys);
    const double t = trace_cost(s, z0, model, w, {kappa, sigma, 8});
    EXPECT_NEAR(mv.total(), t, 1e-9 * t);
    EXPECT_DOUBLE_EQ(mv.cross, 0.0);
    EXPECT_GE(mv.variance, 0.0);
  }
}

TEST(CostModel, VarianceIsZeroWithoutNoise) {
  const StackedModel model = build_stacked(oracle::double_integrator(), 4);
  const CostWeights w = reference_weights(model.sys);
  std::mt19937_64 rng(2);
  const SADFPolicy p = oracle::random_sadf(model, rng);
  const Vector z0{{1.0, -2.0}};
  const StackedSADF s = to_stacked(p, model);
  const Vector z = nominal_trajectory(model, z0, p.vbar);
  double mean = 0.0;
  for (int t = 0; t < 4; ++t) {
    const Vector zt = z.segment(2 * t, 2);
    mean += zt.dot(w.Q * zt) + p.vbar(t) * p.vbar(t);
  }
  const Vector zn = z.tail(2);
  mean += zn.dot(w.P * zn);
  EXPECT_NEAR(trace_cost(s, z0, model, w, {1.0, Matrix::Zero(2, 2), 4}), mean,
              1e-10 * mean);
}

TEST(CostModel, LyapunovResidualOfLqrGain) {
  const LTISystem sys = oracle::double_integrator();
  CostWeights w = reference_weights(sys);
  const Matrix K = synthesize_gain(sys, w.Q, w.R).K;
  EXPECT_GE(lyapunov_residual(sys.A, sys.B, K, w), -1e-8);
  w.P = Matrix::Identity(2, 2);
  EXPECT_LT(lyapunov_residual(sys.A, sys.B, K, w), 0.0);
}

TEST(CostModel, WeightValidation) {
  CostWeights w;
  w.Q = Matrix::Identity(2, 2);
  w.R = Matrix::Identity(1, 1);
  w.P = Matrix::Identity(2, 2);
  EXPECT_NO_THROW(w.validate(2, 1));
  EXPECT_THROW(w.validate(3, 1), InvalidArgument);
  w.R(0, 0) = -1.0;
  EXPECT_THROW(w.validate(2, 1), InvalidArgument);
}
