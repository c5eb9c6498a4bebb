#pragma once

#include "drmpc/linalg.hpp"

namespace drmpc {

/// x(k+1) = A x(k) + B u(k) + E w(k)
struct LTISystem {
  Matrix A;
  Matrix B;
  Matrix E;

  int nx() const { return static_cast<int>(A.rows()); }
  int nu() const { return static_cast<int>(B.cols()); }
  int nw() const { return static_cast<int>(E.cols()); }

  /// Checks shapes and that E has full column rank. Throws ModelError.
  void validate() const;
};

/// PBH test on the modes with |eig| >= 1.
bool is_stabilizable(const Matrix& a, const Matrix& b, double tol = 1e-9);

/// Horizon-stacked prediction matrices. State blocks are indexed 0..N,
/// input and disturbance blocks 0..N-1.
struct StackedModel {
  LTISystem sys;
  int horizon = 0;
  Matrix abar;       // (N+1)nx x nx
  Matrix bbar;       // (N+1)nx x N nu
  Matrix ebar;       // (N+1)nx x N nw
  Matrix ebar_pinv;  // N nw x (N+1)nx

  int nx() const { return sys.nx(); }
  int nu() const { return sys.nu(); }
  int nw() const { return sys.nw(); }
  int n_states() const { return (horizon + 1) * nx(); }
  int n_inputs() const { return horizon * nu(); }
  int n_dist() const { return horizon * nw(); }
};

StackedModel build_stacked(const LTISystem& sys, int horizon);

/// z = abar z0 + bbar vbar
Vector nominal_trajectory(const StackedModel& model, const Vector& z0,
                          const Vector& vbar);

/// Step-by-step propagation of x(t+1) = A x + B u + E w.
Vector simulate_stacked(const LTISystem& sys, const Vector& x0,
                        const Vector& ubar, const Vector& wbar);

}  // namespace drmpc
