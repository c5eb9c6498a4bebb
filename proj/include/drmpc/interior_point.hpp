#pragma once

#include "drmpc/conic.hpp"

namespace drmpc {

/// Primal-dual interior-point method for quadratic cone programs with
/// Nesterov-Todd scaling and Mehrotra predictor-corrector steps. When the
/// main iteration does not converge, a phase-I problem (smallest uniform
/// relaxation of every cone) decides between infeasibility and numerical
/// failure.
class InteriorPointSolver : public ConicBackend {
 public:
  ConicSolution solve(const ConicProgram& program,
                      const SolverSettings& settings) const override;
  std::string name() const override { return "interior-point"; }
};

namespace ipm {

/// Cone layout: `l` orthant rows followed by second-order cones.
struct Cones {
  int l = 0;
  std::vector<int> q;
  int size() const;
  int degree() const { return l + static_cast<int>(q.size()); }
};

/// Nesterov-Todd scaling W with W z = W^{-1} s = lambda.
struct Scaling {
  Vector d;                    // orthant: sqrt(s / z)
  std::vector<double> beta;    // per second-order cone
  std::vector<Vector> wbar;    // per second-order cone, J-normalized

  static Scaling compute(const Cones& cones, const Vector& s,
                         const Vector& z);
  Vector apply(const Cones& cones, const Vector& x) const;
  Vector apply_inverse(const Cones& cones, const Vector& x) const;
};

Vector jordan_product(const Cones& cones, const Vector& x, const Vector& y);

/// Solves lambda o x = r.
Vector jordan_divide(const Cones& cones, const Vector& lambda,
                     const Vector& r);

Vector identity(const Cones& cones);

/// Largest alpha with x + alpha d in the cone (x interior); +inf if none.
double max_step(const Cones& cones, const Vector& x, const Vector& d);

/// Smallest "eigenvalue" (s_i for the orthant, t - ||y|| for cones).
double min_eigenvalue(const Cones& cones, const Vector& x);

}  // namespace ipm

}  // namespace drmpc
