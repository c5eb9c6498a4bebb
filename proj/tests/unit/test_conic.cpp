#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "drmpc/conic.hpp"
#include "drmpc/controller.hpp"
#include "drmpc/errors.hpp"
#include "drmpc/json_io.hpp"
#include "drmpc/scenario.hpp"
#include "oracles.hpp"

using namespace drmpc;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector unit(int n, int i) {
  Vector v = Vector::Zero(n);
  v(i) = 1.0;
  return v;
}

}  // namespace

TEST(Conic, ClippedQuadratic) {
  // min (x - 1)^2  s.t.  x in [0, 0.3]
  ConicProgram p;
  p.add_variables("x", 1);
  p.add_squares(Matrix::Ones(1, 1), Vector{{-1.0}});
  p.set_bounds(0, 0.0, 0.3);
  const ConicSolution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::kOptimal) << s.message;
  EXPECT_NEAR(s.x(0), 0.3, 1e-7);
  EXPECT_NEAR(s.objective, 0.49, 1e-7);
  // Same with a general inequality row.
  ConicProgram q;
  q.add_variables("x", 1);
  q.add_squares(Matrix::Ones(1, 1), Vector{{-1.0}});
  q.add_inequality(Vector{{1.0}}, 0.3);
  EXPECT_NEAR(solve(q).x(0), 0.3, 1e-7);
}

TEST(Conic, BoxBounds) {
  ConicProgram p;
  p.add_variables("x", 2);
  p.add_squares(Matrix::Identity(2, 2), Vector{{-2.0, 0.5}});
  p.set_bounds(0, -1.0, 1.0);
  p.set_bounds(1, 0.0, kInf);
  const ConicSolution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::kOptimal) << s.message;
  EXPECT_NEAR(s.x(0), 1.0, 1e-7);
  EXPECT_NEAR(s.x(1), 0.0, 1e-7);
}

TEST(Conic, SecondOrderCone) {
  // min t  s.t.  t >= ||(x - 3, 4)||, x free
  ConicProgram p;
  p.add_variables("x", 1);
  p.add_variables("t", 1);
  p.add_linear(unit(2, 1));
  ConicProgram::SOC c;
  c.c = unit(2, 1);
  c.D = Matrix{{1.0, 0.0}, {0.0, 0.0}};
  c.e = Vector{{-3.0, 4.0}};
  p.add_soc(c);
  const ConicSolution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::kOptimal) << s.message;
  EXPECT_NEAR(s.x(0), 3.0, 1e-6);
  EXPECT_NEAR(s.x(1), 4.0, 1e-7);
}

TEST(Conic, BallProjection) {
  // Projection of (3, 4) onto the unit ball.
  ConicProgram p;
  p.add_variables("x", 2);
  p.add_squares(Matrix::Identity(2, 2), Vector{{-3.0, -4.0}});
  ConicProgram::SOC c;
  c.c = Vector::Zero(2);
  c.d = 1.0;
  c.D = Matrix::Identity(2, 2);
  c.e = Vector::Zero(2);
  p.add_soc(c);
  const ConicSolution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::kOptimal) << s.message;
  EXPECT_NEAR(s.x(0), 0.6, 1e-7);
  EXPECT_NEAR(s.x(1), 0.8, 1e-7);
  EXPECT_NEAR(s.objective, 16.0, 1e-6);
}

TEST(Conic, DetectsInfeasibility) {
  ConicProgram p;
  p.add_variables("x", 1);
  p.add_squares(Matrix::Ones(1, 1), Vector::Zero(1));
  p.add_inequality(Vector{{1.0}}, -1.0);
  p.add_inequality(Vector{{-1.0}}, -1.0);
  EXPECT_EQ(solve(p).status, SolveStatus::kInfeasible);

  ConicProgram q;
  q.add_variables("x", 2);
  q.add_squares(Matrix::Identity(2, 2), Vector::Zero(2));
  q.add_equality(Vector{{1.0, 1.0}}, 3.0);
  ConicProgram::SOC c;
  c.c = Vector::Zero(2);
  c.d = 1.0;
  c.D = Matrix::Identity(2, 2);
  c.e = Vector::Zero(2);
  q.add_soc(c);
  EXPECT_EQ(solve(q).status, SolveStatus::kInfeasible);
}

TEST(Conic, ObjectiveScaling) {
  std::mt19937_64 rng(21);
  const Matrix F = oracle::random_matrix(6, 4, rng);
  const Vector f = oracle::random_vector(6, rng);
  const Vector g = oracle::random_vector(4, rng);
  Vector ref;
  for (double scale : {1.0, 1e-4, 1e4}) {
    ConicProgram p;
    p.add_variables("x", 4);
    p.add_squares(std::sqrt(scale) * F, std::sqrt(scale) * f);
    p.add_inequality(g, 0.1);
    ConicProgram::SOC c;
    c.c = Vector::Zero(4);
    c.d = 0.5;
    c.D = Matrix::Identity(4, 4);
    c.e = Vector::Zero(4);
    p.add_soc(c);
    const ConicSolution s = solve(p, {1e-10, 100});
    ASSERT_EQ(s.status, SolveStatus::kOptimal) << scale << " " << s.message;
    if (ref.size() == 0) {
      ref = s.x;
    } else {
      EXPECT_LT((s.x - ref).cwiseAbs().maxCoeff(), 1e-6) << scale;
    }
  }
}

TEST(Conic, RandomProgramsAreSolvedFeasibly) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 3 + trial % 6;
    ConicProgram p;
    p.add_variables("x", n);
    p.add_squares(oracle::random_matrix(n + 2, n, rng),
                  oracle::random_vector(n + 2, rng, 3.0));
    // Every constraint holds strictly at the origin.
    p.add_equality(unit(n, 0), 0.0);
    for (int i = 0; i < 3; ++i) p.add_inequality(oracle::random_vector(n, rng), 0.5);
    for (int i = 0; i < 2; ++i) {
      ConicProgram::SOC c;
      c.c = oracle::random_vector(n, rng, 0.1);
      c.d = 1.0;
      c.D = oracle::random_matrix(3, n, rng);
      c.e = oracle::random_vector(3, rng, 0.2);
      p.add_soc(c);
    }
    p.set_bounds(n - 1, -2.0, 2.0);
    const ConicSolution s = solve(p);
    ASSERT_EQ(s.status, SolveStatus::kOptimal) << trial << " " << s.message;
    EXPECT_LE(p.max_violation(s.x), 1e-7);
    EXPECT_NEAR(p.objective(s.x), s.objective, 1e-7 * (1.0 + s.objective));
    // No feasible random perturbation improves on the solution.
    for (int i = 0; i < 200; ++i) {
      Vector y = s.x + oracle::random_vector(n, rng, 1e-2);
      y(0) = 0.0;
      if (p.max_violation(y) <= 0.0) {
        EXPECT_GE(p.objective(y), s.objective - 1e-7 * (1.0 + s.objective));
      }
    }
  }
}

TEST(Conic, OneStepControlProblemMatchesGridSearch) {
  ScenarioConfig sc = double_integrator_scenario();
  sc.horizon = 1;
  sc.lambda_penalty = 10.0;
  const AmbiguityCalibration calib = scenario_calibration(sc, 800);
  const Controller ctl(make_controller_config(sc, calib, {sc.sigma_true, 800}));
  ControllerState prev;
  prev.candidate.z0 = Vector{{0.1, -0.05}};
  const Vector x{{-0.05, 0.1}};
  const ConicProgram p = ctl.build_problem(x, &prev);
  ASSERT_EQ(p.num_variables(), 4);

  const ConicSolution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::kOptimal) << s.message;
  EXPECT_LE(p.max_violation(s.x), 1e-7);

  const oracle::GridResult g =
      oracle::one_step_grid(p, x, prev.candidate.z0, -1.0, 1.0);
  ASSERT_TRUE(std::isfinite(g.objective));
  EXPECT_LE(s.objective, g.objective + 1e-7);
  EXPECT_NEAR(s.objective, g.objective, 1e-4);
  EXPECT_NEAR(s.x(0), g.v0, 1e-3);
  EXPECT_NEAR(s.x(3), g.lambda, 1e-3);
}

TEST(Conic, JsonExport) {
  ConicProgram p;
  p.add_variables("a", 2);
  p.add_variables("b", 1);
  p.add_squares(Matrix::Identity(3, 3), Vector::Ones(3));
  p.set_bounds(2, 0.0, 1.0);
  const Json j = Json::parse(program_to_json(p));
  EXPECT_EQ(j["num_variables"], 3);
  EXPECT_EQ(j["blocks"][1]["name"], "b");
  EXPECT_EQ(j["blocks"][1]["offset"], 2);
  EXPECT_TRUE(j["bounds"]["lower"][0].is_null());
  EXPECT_DOUBLE_EQ(j["bounds"]["upper"][2].get<double>(), 1.0);
}

TEST(Conic, RejectsMalformedInput) {
  ConicProgram p;
  p.add_variables("x", 2);
  EXPECT_THROW(p.set_bounds(2, 0.0, 1.0), InvalidArgument);
  EXPECT_THROW(p.set_bounds(0, 1.0, 0.0), InvalidArgument);
  ConicProgram::SOC c;
  c.c = Vector::Zero(3);
  c.D = Matrix::Zero(1, 3);
  c.e = Vector::Zero(1);
  EXPECT_THROW(p.add_soc(c), InvalidArgument);
}
