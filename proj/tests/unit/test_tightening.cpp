#include <gtest/gtest.h>

#include <cmath>

#include "drmpc/errors.hpp"
#include "drmpc/tightening.hpp"
#include "oracles.hpp"

using namespace drmpc;

namespace {

class TighteningTest : public ::testing::Test {
 protected:
  StackedModel model = build_stacked(oracle::double_integrator(), 10);
  DecisionLayout layout{model, true};
  Matrix sigma = Matrix{{2e-4, 5e-5}, {5e-5, 1e-4}};
  Matrix S = sigma_n_factor(sigma, 10);
  std::mt19937_64 rng{13};

  HalfspaceSpec state_spec(int t, double level) const {
    HalfspaceSpec h;
    h.kind = ConstraintKind::kState;
    h.normal = Vector::Zero(model.n_states());
    h.normal(t * 2 + 1) = 1.0;
    h.normal(t * 2) = 0.3;
    h.level = level;
    h.stage = t;
    h.name = "s";
    return h;
  }

  HalfspaceSpec input_spec(int t, double level) const {
    HalfspaceSpec h;
    h.kind = ConstraintKind::kInput;
    h.normal = Vector::Zero(model.n_inputs());
    h.normal(t) = 0.5;
    h.level = level;
    h.stage = t;
    h.name = "u";
    return h;
  }
};

}  // namespace

TEST(Tightening, FactorValues) {
  EXPECT_NEAR(tightening_factor(0.9), 3.0, 1e-15);
  EXPECT_NEAR(tightening_factor(0.5), 1.0, 1e-15);
  EXPECT_NEAR(tightening_factor(0.7), std::sqrt(0.7 / 0.3), 1e-15);
  EXPECT_THROW(tightening_factor(0.0), InvalidArgument);
  EXPECT_THROW(tightening_factor(1.0), InvalidArgument);
}

TEST_F(TighteningTest, SigmaFactorReproducesBlockDiagonal) {
  const Matrix want = kron(Matrix::Identity(10, 10), sigma);
  EXPECT_LT((S * S.transpose() - want).cwiseAbs().maxCoeff(), 1e-15);
}

TEST_F(TighteningTest, StateRowMatchesDirectFormula) {
  for (int trial = 0; trial < 30; ++trial) {
    const int t = trial % 11 == 10 ? 9 : trial % 10;
    const double kappa = 1.0 + trial;
    const HalfspaceSpec h = state_spec(t, 0.8);
    const SADFPolicy p = oracle::random_sadf(model, rng);
    const Vector z0 = oracle::random_vector(2, rng);
    const Vector x = layout.pack(p, z0, 0.3);
    const SOCRow row = state_row(h, model, layout, kappa, S);
    const Matrix mbar = assemble_mbar(p, model);
    const Vector zbar = model.abar * z0 + model.bbar * p.vbar;
    const Vector g = (model.bbar * mbar + model.ebar).transpose() * h.normal;
    double var = 0.0;
    for (int i = 0; i < 10; ++i) {
      const Vector gi = g.segment(2 * i, 2);
      var += gi.dot(sigma * gi);
    }
    const double want = 1.0 - h.normal.dot(zbar) -
                        std::sqrt(kappa) * tightening_factor(0.8) * std::sqrt(var);
    EXPECT_NEAR(row_slack(row, x), want, 1e-12);
    EXPECT_NEAR(tightened_slack(h, model, kappa, S, to_stacked(p, model), z0),
                want, 1e-12);
  }
}

TEST_F(TighteningTest, InputRowMatchesDirectFormula) {
  for (int t = 0; t < 10; ++t) {
    const HalfspaceSpec l = input_spec(t, 0.9);
    const SADFPolicy p = oracle::random_sadf(model, rng);
    const Vector z0 = oracle::random_vector(2, rng);
    const Vector x = layout.pack(p, z0, 0.0);
    const Matrix mbar = assemble_mbar(p, model);
    const Vector g = mbar.transpose() * l.normal;
    double var = 0.0;
    for (int i = 0; i < 10; ++i) {
      const Vector gi = g.segment(2 * i, 2);
      var += gi.dot(sigma * gi);
    }
    const double want = 1.0 - l.normal.dot(p.vbar) - 2.0 * 3.0 * std::sqrt(var);
    EXPECT_NEAR(row_slack(input_row(l, model, layout, 4.0, S), x), want, 1e-12);
  }
}

TEST_F(TighteningTest, SlackIsNonincreasingInKappa) {
  const SADFPolicy p = oracle::random_sadf(model, rng);
  const Vector x = layout.pack(p, Vector{{0.1, 0.2}}, 0.0);
  for (int t = 0; t < 10; ++t) {
    double prev = row_slack(state_row(state_spec(t, 0.9), model, layout, 1.0, S), x);
    for (double kappa : {1.5, 3.0, 30.0, 500.0}) {
      const double s =
          row_slack(state_row(state_spec(t, 0.9), model, layout, kappa, S), x);
      EXPECT_LE(s, prev + 1e-15);
      prev = s;
    }
  }
}

TEST_F(TighteningTest, StageRowsDependOnEarlierBlocksOnly) {
  for (int t = 0; t <= 10; ++t) {
    HalfspaceSpec h = state_spec(std::min(t, 10), 0.9);
    const SOCRow row = state_row(h, model, layout, 2.0, S);
    for (int d = 1; d < 10; ++d) {
      for (int c = 0; c < 2; ++c) {
        const double col = row.D.col(layout.m_index(d, 0, c)).cwiseAbs().maxCoeff();
        // The state at stage t sees inputs up to t - 1, hence M_1..M_{t-1}.
        if (d >= t) {
          EXPECT_EQ(col, 0.0) << "t " << t << " d " << d;
        }
      }
    }
  }
  // Stage-0 rows are deterministic.
  const SOCRow r0 = state_row(state_spec(0, 0.9), model, layout, 2.0, S);
  EXPECT_EQ(r0.D.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(r0.e.cwiseAbs().maxCoeff(), 0.0);
}

TEST_F(TighteningTest, LiftHalfspaces) {
  StageHalfspace s;
  s.kind = ConstraintKind::kState;
  s.normal = Vector{{0.0, 2.0}};
  s.rhs = 2.0;
  s.level = 0.7;
  s.name = "x2";
  const std::vector<HalfspaceSpec> lifted = lift_halfspaces({s}, model);
  ASSERT_EQ(lifted.size(), 10u);
  for (int t = 0; t < 10; ++t) {
    EXPECT_EQ(lifted[t].stage, t);
    EXPECT_DOUBLE_EQ(lifted[t].normal(2 * t + 1), 1.0);
    EXPECT_DOUBLE_EQ(lifted[t].normal.sum(), 1.0);
    EXPECT_DOUBLE_EQ(lifted[t].level, 0.7);
  }
  s.first_stage = 2;
  s.last_stage = 4;
  EXPECT_EQ(lift_halfspaces({s}, model).size(), 3u);
  s.rhs = -1.0;
  EXPECT_THROW(lift_halfspaces({s}, model), InvalidArgument);
  s.rhs = 1.0;
  s.normal = Vector::Ones(3);
  EXPECT_THROW(lift_halfspaces({s}, model), InvalidArgument);
}
