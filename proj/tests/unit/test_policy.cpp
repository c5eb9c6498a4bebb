#include <gtest/gtest.h>

#include "drmpc/errors.hpp"
#include "drmpc/policy.hpp"
#include "oracles.hpp"

using namespace drmpc;

namespace {

class PolicyTest : public ::testing::Test {
 protected:
  StackedModel model = build_stacked(oracle::double_integrator(), 10);
  std::mt19937_64 rng{11};
};

// Random error-feedback gain with a zero stage-0 column.
Matrix random_kbar(const StackedModel& m, std::mt19937_64& rng) {
  const int nu = m.nu();
  const int nx = m.nx();
  Matrix k = Matrix::Zero(m.n_inputs(), m.n_states());
  for (int t = 0; t < m.horizon; ++t) {
    for (int i = 1; i <= t; ++i) {
      k.block(t * nu, i * nx, nu, nx) = oracle::random_matrix(nu, nx, rng, 0.3);
    }
  }
  return k;
}

}  // namespace

TEST_F(PolicyTest, SadfAndErrorFeedbackGiveSameTrajectories) {
  for (int trial = 0; trial < 50; ++trial) {
    const SADFPolicy p = oracle::random_sadf(model, rng);
    const StackedSADF s = to_stacked(p, model);
    const ErrorFeedbackPolicy ef = sadf_to_ef(p, model);
    const Vector z0 = oracle::random_vector(2, rng);
    const Vector w = oracle::random_vector(model.n_dist(), rng);
    const Trajectory a = simulate_sadf(s, model, z0, w);
    const Trajectory b = simulate_ef(ef, model, z0, z0, w);
    EXPECT_LT((a.x - b.x).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((a.u - b.u).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST_F(PolicyTest, SadfRoundTrip) {
  for (int trial = 0; trial < 50; ++trial) {
    const SADFPolicy p = oracle::random_sadf(model, rng);
    const StackedSADF s = to_stacked(p, model);
    const StackedSADF back = ef_to_sadf(sadf_to_ef(p, model), model);
    EXPECT_LT((back.mbar - s.mbar).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((back.vbar - s.vbar).cwiseAbs().maxCoeff(), 1e-9);
    const SADFPolicy t = to_toeplitz(back, model);
    for (std::size_t d = 0; d < p.m_blocks.size(); ++d) {
      EXPECT_LT((t.m_blocks[d] - p.m_blocks[d]).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST_F(PolicyTest, ErrorFeedbackRoundTrip) {
  for (int trial = 0; trial < 50; ++trial) {
    ErrorFeedbackPolicy ef;
    ef.kbar = random_kbar(model, rng);
    ef.gbar = oracle::random_vector(model.n_inputs(), rng);
    const ErrorFeedbackPolicy back = sadf_to_ef(ef_to_sadf(ef, model), model);
    EXPECT_LT((back.kbar - ef.kbar).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((back.gbar - ef.gbar).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST_F(PolicyTest, MbarIsBlockToeplitzAndStrictlyLower) {
  const SADFPolicy p = oracle::random_sadf(model, rng);
  const Matrix m = assemble_mbar(p, model);
  for (int t = 0; t < 10; ++t) {
    for (int j = 0; j < 10; ++j) {
      const Matrix blk = m.block(t, 2 * j, 1, 2);
      if (j >= t) {
        EXPECT_EQ(blk.cwiseAbs().maxCoeff(), 0.0);
      } else {
        EXPECT_EQ((blk - p.m_blocks[t - j - 1]).cwiseAbs().maxCoeff(), 0.0);
      }
    }
  }
}

TEST_F(PolicyTest, NonToeplitzIsRejected) {
  StackedSADF s = to_stacked(oracle::random_sadf(model, rng), model);
  s.mbar(5, 0) += 1e-3;
  EXPECT_THROW(to_toeplitz(s, model), TransformError);
}

TEST_F(PolicyTest, ToeplitzStageZeroGain) {
  const SADFPolicy p = oracle::random_sadf(model, rng);
  const ErrorFeedbackPolicy toep = sadf_to_ef(p, model, Stage0Gain::kToeplitz);
  const ErrorFeedbackPolicy pinv =
      sadf_to_ef(p, model, Stage0Gain::kPseudoInverse);
  // Only the stage-0 column differs.
  EXPECT_LT((toep.kbar.rightCols(20) - pinv.kbar.rightCols(20))
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
  EXPECT_LT(pinv.kbar.leftCols(2).cwiseAbs().maxCoeff(), 1e-12);
  // The completed gain is block Toeplitz: K(t, i) depends on t - i.
  for (int t = 0; t < 10; ++t) {
    for (int i = 0; i <= t; ++i) {
      const Matrix a = toep.kbar.block(t, 2 * i, 1, 2);
      const Matrix b = toep.kbar.block(t - i, 0, 1, 2);
      EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-9) << t << " " << i;
    }
  }
  // K_0 E = M_1.
  const Matrix k0 = toep.kbar.block(0, 0, 1, 2);
  EXPECT_LT((k0 * model.sys.E - p.m_blocks[0]).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_F(PolicyTest, StateFeedbackOffset) {
  for (int trial = 0; trial < 20; ++trial) {
    const StackedSADF s = to_stacked(oracle::random_sadf(model, rng), model);
    const ErrorFeedbackPolicy ef = sadf_to_ef(s, model);
    const Vector z0 = oracle::random_vector(2, rng);
    const Vector z = nominal_trajectory(model, z0, ef.gbar);
    const Vector gsf = state_feedback_offset(s, model, z0);
    EXPECT_LT((gsf - (ef.gbar - ef.kbar * z)).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((nominal_input_from_state_feedback(gsf, ef.kbar, model, z0) -
               ef.gbar)
                  .cwiseAbs()
                  .maxCoeff(),
              1e-9);
    // u = g_sf + K x reproduces the SADF inputs along a random realization.
    const Vector w = oracle::random_vector(model.n_dist(), rng);
    const Trajectory tr = simulate_sadf(s, model, z0, w);
    EXPECT_LT((gsf + ef.kbar * tr.x - tr.u).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST_F(PolicyTest, ShiftedCandidateStructure) {
  const SADFPolicy p = oracle::random_sadf(model, rng);
  const ErrorFeedbackPolicy ef = sadf_to_ef(p, model);
  const Vector z0 = oracle::random_vector(2, rng);
  const Vector z = nominal_trajectory(model, z0, ef.gbar);
  const Matrix kt{{-0.6, -1.2}};
  const ShiftedCandidate c = shift_candidate(ef, z, kt, model);
  EXPECT_LT((c.z0 - z.segment(2, 2)).norm(), 1e-15);
  EXPECT_LT((c.ef.gbar.head(9) - ef.gbar.tail(9)).norm(), 1e-15);
  EXPECT_NEAR(c.ef.gbar(9), (kt * z.tail(2))(0), 1e-14);
  EXPECT_LT((c.nominal - nominal_trajectory(model, c.z0, c.ef.gbar)).norm(),
            1e-12);
  EXPECT_LT((c.ef.kbar.topLeftCorner(9, 20) - ef.kbar.bottomRightCorner(9, 20))
                .cwiseAbs()
                .maxCoeff(),
            1e-15);
  EXPECT_LT((c.ef.kbar.block(9, 18, 1, 2) - kt).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_DOUBLE_EQ(c.lambda, 1.0);
}

TEST_F(PolicyTest, ToeplitzShiftKeepsBlocks) {
  const SADFPolicy p = oracle::random_sadf(model, rng);
  const Vector z0 = oracle::random_vector(2, rng);
  const Vector z = nominal_trajectory(model, z0, p.vbar);
  const Matrix kt{{-0.6, -1.2}};
  const SADFPolicy s = shift_toeplitz(p, z, kt, model);
  EXPECT_LT((s.vbar.head(9) - p.vbar.tail(9)).norm(), 1e-15);
  EXPECT_NEAR(s.vbar(9), (kt * z.tail(2))(0), 1e-14);
  for (std::size_t d = 0; d < p.m_blocks.size(); ++d) {
    EXPECT_EQ((s.m_blocks[d] - p.m_blocks[d]).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST_F(PolicyTest, AppliedInput) {
  const SADFPolicy p = oracle::random_sadf(model, rng);
  const ErrorFeedbackPolicy ef = sadf_to_ef(p, model);
  const Vector z0 = oracle::random_vector(2, rng);
  EXPECT_NEAR(applied_input(ef, z0, z0)(0), ef.gbar(0), 1e-15);
  const Vector x = z0 + Vector{{0.1, -0.2}};
  EXPECT_NEAR(applied_input(ef, x, z0)(0),
              ef.gbar(0) + (ef.kbar.block(0, 0, 1, 2) * (x - z0))(0), 1e-14);
}

TEST_F(PolicyTest, DimensionChecks) {
  StackedSADF s;
  s.vbar = Vector::Zero(3);
  s.mbar = Matrix::Zero(3, 3);
  EXPECT_THROW(sadf_to_ef(s, model), InvalidArgument);
}
