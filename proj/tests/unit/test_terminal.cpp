#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "drmpc/errors.hpp"
#include "drmpc/terminal.hpp"
#include "oracles.hpp"

using namespace drmpc;

namespace {

const Matrix kQ = 10.0 * Matrix::Identity(2, 2);
const Matrix kR = Matrix::Identity(1, 1);

TerminalHalfspace x2_row(double level) {
  TerminalHalfspace h;
  h.normal = Vector{{0.0, 1.0}};
  h.level = level;
  h.name = "x2";
  return h;
}

}  // namespace

TEST(Terminal, LqrMatchesValueIteration) {
  const LTISystem sys = oracle::double_integrator();
  const LQRSolution lqr = synthesize_gain(sys, kQ, kR);
  Matrix k_ref;
  const Matrix p_ref = oracle::riccati_iteration(sys.A, sys.B, kQ, kR, &k_ref);
  EXPECT_LT((lqr.P - p_ref).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((lqr.K - k_ref).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Terminal, FrozenLqrPair) {
  const LQRSolution lqr = synthesize_gain(oracle::double_integrator(), kQ, kR);
  const Matrix p{{20.59876904, 5.91607978}, {5.91607978, 14.22835622}};
  const Matrix k{{-0.61669526, -1.27031633}};
  EXPECT_LT((lqr.P - p).cwiseAbs().maxCoeff(), 1e-7);
  EXPECT_LT((lqr.K - k).cwiseAbs().maxCoeff(), 1e-7);
  const Matrix acl = Matrix{{1.0, 1.0}, {0.0, 1.0}} + Matrix{{0.5}, {1.0}} * lqr.K;
  EXPECT_LT(spectral_radius(acl), 1.0);
}

TEST(Terminal, LqrOnOtherSystems) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    LTISystem sys;
    sys.A = oracle::random_matrix(3, 3, rng, 0.8);
    sys.B = oracle::random_matrix(3, 2, rng);
    sys.E = Matrix::Identity(3, 3);
    const Matrix q = Matrix::Identity(3, 3);
    const Matrix r = 0.5 * Matrix::Identity(2, 2);
    Matrix k_ref;
    const Matrix p_ref = oracle::riccati_iteration(sys.A, sys.B, q, r, &k_ref);
    const LQRSolution lqr = synthesize_gain(sys, q, r);
    EXPECT_LT((lqr.P - p_ref).cwiseAbs().maxCoeff(), 1e-7 * p_ref.norm());
  }
}

TEST(Terminal, SteadyStateCovariance) {
  const LTISystem sys = oracle::double_integrator();
  const LQRSolution lqr = synthesize_gain(sys, kQ, kR);
  const Matrix ks = 550.4 * 1e-4 * Matrix::Identity(2, 2);
  const Matrix x = steady_state_cov(sys, lqr.K, ks);
  const Matrix acl = sys.A + sys.B * lqr.K;
  const Matrix ref = oracle::lyapunov_series(acl, sys.E * ks * sys.E.transpose());
  EXPECT_LT((x - ref).cwiseAbs().maxCoeff(), 1e-10 * ref.norm());
  const Matrix res = acl * x * acl.transpose() + ks - x;
  EXPECT_LT(res.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Terminal, MaxAlphaMatchesBisection) {
  const LTISystem sys = oracle::double_integrator();
  const LQRSolution lqr = synthesize_gain(sys, kQ, kR);
  for (double kappa : {1.0, 4.86, 29.6}) {
    for (double level : {0.7, 0.8, 0.9}) {
      const Matrix sinf =
          steady_state_cov(sys, lqr.K, kappa * 1e-4 * Matrix::Identity(2, 2));
      const TerminalHalfspace h = x2_row(level);
      const double rhs = tightened_terminal_rhs(h, lqr.K, sinf);
      EXPECT_NEAR(rhs,
                  1.0 - std::sqrt(level / (1.0 - level)) *
                            std::sqrt(sinf(1, 1)),
                  1e-14);
      const double a = max_alpha(lqr.P, lqr.K, sinf, {h});
      const double ref = oracle::alpha_bisection(lqr.P, h.normal, rhs);
      EXPECT_NEAR(a, ref, 1e-6 * ref) << kappa << " " << level;
    }
  }
}

TEST(Terminal, InputRowUsesTheGain) {
  const LTISystem sys = oracle::double_integrator();
  const LQRSolution lqr = synthesize_gain(sys, kQ, kR);
  const Matrix sinf = steady_state_cov(sys, lqr.K, 1e-4 * Matrix::Identity(2, 2));
  TerminalHalfspace u;
  u.kind = ConstraintKind::kInput;
  u.normal = Vector{{0.5}};
  u.level = 0.8;
  const Vector a = lqr.K.transpose() * u.normal;
  const double rhs = tightened_terminal_rhs(u, lqr.K, sinf);
  EXPECT_NEAR(rhs, 1.0 - 2.0 * std::sqrt(a.dot(sinf * a)), 1e-14);
  EXPECT_NEAR(max_alpha(lqr.P, lqr.K, sinf, {u}),
              oracle::alpha_bisection(lqr.P, a, rhs), 1e-6 * rhs * rhs);
  // The smallest of several rows wins.
  const double both = max_alpha(lqr.P, lqr.K, sinf, {u, x2_row(0.9)});
  EXPECT_DOUBLE_EQ(both, std::min(max_alpha(lqr.P, lqr.K, sinf, {u}),
                                  max_alpha(lqr.P, lqr.K, sinf, {x2_row(0.9)})));
}

TEST(Terminal, EmptySetIsReported) {
  const LTISystem sys = oracle::double_integrator();
  const LQRSolution lqr = synthesize_gain(sys, kQ, kR);
  const Matrix sinf = steady_state_cov(sys, lqr.K, 1.0 * Matrix::Identity(2, 2));
  EXPECT_THROW(max_alpha(lqr.P, lqr.K, sinf, {x2_row(0.9)}), TerminalSetEmpty);
  EXPECT_THROW(synthesize_terminal(sys, kQ, kR, Matrix::Identity(2, 2),
                                   {x2_row(0.9)}),
               TerminalSetEmpty);
}

TEST(Terminal, Invariance) {
  const LTISystem sys = oracle::double_integrator();
  const LQRSolution lqr = synthesize_gain(sys, kQ, kR);
  EXPECT_TRUE(check_invariance(sys, lqr.K, lqr.P, 0.5));
  EXPECT_FALSE(check_invariance(sys, Matrix::Zero(1, 2), lqr.P, 0.5));
  // Sublevel points stay inside under the nominal closed loop.
  std::mt19937_64 rng(4);
  const Matrix acl = sys.A + sys.B * lqr.K;
  for (int i = 0; i < 1000; ++i) {
    Vector z = oracle::random_vector(2, rng);
    z *= std::sqrt(0.5 / z.dot(lqr.P * z)) *
         std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const Vector n = acl * z;
    EXPECT_LE(n.dot(lqr.P * n), 0.5 + 1e-12);
  }
}

TEST(Terminal, DerivedHalfspaces) {
  StageHalfspace s;
  s.normal = Vector{{0.0, 2.0}};
  s.rhs = 4.0;
  s.level = 0.8;
  s.name = "x2";
  const std::vector<TerminalHalfspace> t = terminal_halfspaces({s});
  ASSERT_EQ(t.size(), 1u);
  EXPECT_DOUBLE_EQ(t[0].normal(1), 0.5);
  EXPECT_DOUBLE_EQ(t[0].level, 0.8);
}

TEST(Terminal, SynthesisBundle) {
  const LTISystem sys = oracle::double_integrator();
  const Matrix ks = 4.86 * 1e-4 * Matrix::Identity(2, 2);
  const TerminalIngredients t =
      synthesize_terminal(sys, kQ, kR, ks, {x2_row(0.9)});
  EXPECT_GT(t.alpha, 0.0);
  EXPECT_NEAR(t.alpha, max_alpha(t.P, t.K, t.sigma_inf, t.halfspaces), 1e-14);
  EXPECT_LT((t.sigma_inf - steady_state_cov(sys, t.K, ks)).norm(), 1e-14);
}

TEST(Terminal, ScalarRiccatiFixedPoint) {
  LTISystem sys;
  sys.A = Matrix::Constant(1, 1, 0.5);
  sys.B = Matrix::Ones(1, 1);
  sys.E = Matrix::Ones(1, 1);
  const Matrix one = Matrix::Ones(1, 1);
  double p = 1.0;
  for (int i = 0; i < 200; ++i) p = 1.0 + 0.25 * p / (1.0 + p);
  const LQRSolution lqr = synthesize_gain(sys, one, one);
  EXPECT_NEAR(lqr.P(0, 0), p, 1e-12);
  EXPECT_NEAR(lqr.K(0, 0), -0.5 * p / (1.0 + p), 1e-12);
}

TEST(Terminal, DeadbeatCases) {
  const LTISystem sys = oracle::double_integrator();
  // u = K x with A + B K = 0 needs B full rank; use an identity input map.
  LTISystem full = sys;
  full.B = Matrix::Identity(2, 2);
  const Matrix k = -full.A;
  CostWeights w;
  w.R = 0.3 * Matrix::Identity(2, 2);
  w.Q = Matrix::Identity(2, 2);
  w.P = w.Q + k.transpose() * w.R * k;
  EXPECT_GE(lyapunov_residual(full.A, full.B, k, w), -1e-12);
  EXPECT_TRUE(check_invariance(full, k, w.P, 1.0));
  const Matrix ks{{2.0, 0.3}, {0.3, 1.0}};
  EXPECT_LT((steady_state_cov(full, k, ks) - ks).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(steady_state_cov(sys, synthesize_gain(sys, kQ, kR).K,
                             Matrix::Zero(2, 2)),
            Matrix::Zero(2, 2));
}

TEST(Terminal, UntightenedAlphaIsSupportFunction) {
  const LQRSolution lqr = synthesize_gain(oracle::double_integrator(), kQ, kR);
  const Vector h{{0.3, 1.0}};
  TerminalHalfspace row;
  row.normal = h;
  row.level = 0.9;
  const double a = max_alpha(lqr.P, lqr.K, Matrix::Zero(2, 2), {row});
  EXPECT_NEAR(a, 1.0 / h.dot(lqr.P.inverse() * h), 1e-12);
}

TEST(Terminal, AlphaShrinksWithAmbiguity) {
  const LTISystem sys = oracle::double_integrator();
  const LQRSolution lqr = synthesize_gain(sys, kQ, kR);
  double prev = std::numeric_limits<double>::infinity();
  for (double kappa : {1.0, 1.02, 1.07, 3.4, 4.86, 29.6, 206.0}) {
    const Matrix sinf =
        steady_state_cov(sys, lqr.K, kappa * 1e-4 * Matrix::Identity(2, 2));
    const double a = max_alpha(lqr.P, lqr.K, sinf, {x2_row(0.9)});
    EXPECT_LE(a, prev);
    prev = a;
  }
}

TEST(Terminal, BoundaryPointsSatisfyTightenedRows) {
  const LTISystem sys = oracle::double_integrator();
  const Matrix ks = 29.6 * 1e-4 * Matrix::Identity(2, 2);
  TerminalHalfspace u;
  u.kind = ConstraintKind::kInput;
  u.normal = Vector{{0.4}};
  u.level = 0.8;
  const TerminalIngredients t =
      synthesize_terminal(sys, kQ, kR, ks, {x2_row(0.9), u});
  const Eigen::LLT<Matrix> llt(t.P);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 1000; ++i) {
    const Vector d = oracle::random_vector(2, rng);
    const Vector z = d * std::sqrt(t.alpha / d.dot(t.P * d));
    for (const TerminalHalfspace& h : t.halfspaces) {
      const Vector a =
          h.kind == ConstraintKind::kState ? h.normal : Vector(t.K.transpose() * h.normal);
      EXPECT_LE(a.dot(z), tightened_terminal_rhs(h, t.K, t.sigma_inf) + 1e-8);
    }
  }
}

TEST(Terminal, UnstableGainFailsInvariance) {
  const LTISystem sys = oracle::double_integrator();
  const LQRSolution lqr = synthesize_gain(sys, kQ, kR);
  const Matrix bad{{1.0, 1.0}};
  EXPECT_GE(spectral_radius(sys.A + sys.B * bad), 1.0);
  EXPECT_FALSE(check_invariance(sys, bad, lqr.P, 1.0));
}
