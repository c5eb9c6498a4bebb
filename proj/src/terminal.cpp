#include "drmpc/terminal.hpp"

#include <cmath>
#include <limits>

#include "drmpc/errors.hpp"

namespace drmpc {

LQRSolution synthesize_gain(const LTISystem& sys, const Matrix& Q,
                            const Matrix& R, int max_iterations, double tol) {
  const Matrix& A = sys.A;
  const Matrix& B = sys.B;
  const Eigen::Index n = A.rows();
  if (!is_stabilizable(A, B)) {
    throw TerminalError("(A, B) is not stabilizable");
  }
  // Doubling iteration: A_k, G_k, H_k with H_k -> P.
  const Matrix I = Matrix::Identity(n, n);
  Matrix ak = A;
  Matrix gk = B * R.llt().solve(B.transpose());
  Matrix hk = Q;
  LQRSolution out;
  for (int it = 1; it <= max_iterations; ++it) {
    const Eigen::PartialPivLU<Matrix> lu(I + gk * hk);
    const Matrix w = lu.solve(ak);               // (I + G H)^-1 A
    const Matrix v = lu.solve(gk);               // (I + G H)^-1 G
    const Matrix h_next = hk + ak.transpose() * hk * w;
    const Matrix g_next = gk + ak * v * ak.transpose();
    const Matrix a_next = ak * w;
    const double rel = (h_next - hk).norm() / std::max(1.0, h_next.norm());
    hk = 0.5 * (h_next + h_next.transpose());
    gk = 0.5 * (g_next + g_next.transpose());
    ak = a_next;
    out.iterations = it;
    if (!hk.allFinite()) break;
    if (rel < tol) {
      out.P = hk;
      const Matrix s = R + B.transpose() * hk * B;
      out.K = -s.llt().solve(B.transpose() * hk * A);
      if (spectral_radius(A + B * out.K) >= 1.0) {
        throw TerminalError("Riccati gain does not stabilize the system");
      }
      return out;
    }
  }
  throw TerminalError("Riccati iteration did not converge");
}

Matrix steady_state_cov(const LTISystem& sys, const Matrix& K,
                        const Matrix& kappa_sigma) {
  const Matrix ak = sys.A + sys.B * K;
  if (spectral_radius(ak) >= 1.0) {
    throw TerminalError("closed loop A + BK is not Schur stable");
  }
  return solve_discrete_lyapunov(ak,
                                 sys.E * kappa_sigma * sys.E.transpose());
}

namespace {

Vector state_direction(const TerminalHalfspace& h, const Matrix& K) {
  return h.kind == ConstraintKind::kState ? h.normal
                                          : Vector(K.transpose() * h.normal);
}

}  // namespace

double tightened_terminal_rhs(const TerminalHalfspace& h, const Matrix& K,
                              const Matrix& sigma_inf) {
  const Vector a = state_direction(h, K);
  const double var = std::max(0.0, a.dot(sigma_inf * a));
  return 1.0 - tightening_factor(h.level) * std::sqrt(var);
}

double max_alpha(const Matrix& P, const Matrix& K, const Matrix& sigma_inf,
                 const std::vector<TerminalHalfspace>& halfspaces) {
  const Eigen::LLT<Matrix> llt(P);
  if (llt.info() != Eigen::Success) {
    throw TerminalError("terminal weight P is not positive definite");
  }
  double alpha = std::numeric_limits<double>::infinity();
  for (const TerminalHalfspace& h : halfspaces) {
    const double rhs = tightened_terminal_rhs(h, K, sigma_inf);
    if (!(rhs > 0.0)) throw TerminalSetEmpty(h.name, rhs);
    const Vector a = state_direction(h, K);
    const double support2 = a.dot(llt.solve(a));
    if (support2 <= 0.0) continue;  // a = 0 never binds
    alpha = std::min(alpha, rhs * rhs / support2);
  }
  return alpha;
}

bool check_invariance(const LTISystem& sys, const Matrix& K, const Matrix& P,
                      double alpha, double tol) {
  if (!(alpha > 0.0)) return false;
  const Matrix ak = sys.A + sys.B * K;
  const double scale = std::max(1.0, P.norm());
  return min_eigenvalue(P - ak.transpose() * P * ak) >= -tol * scale;
}

std::vector<TerminalHalfspace> terminal_halfspaces(
    const std::vector<StageHalfspace>& stage_specs) {
  std::vector<TerminalHalfspace> out;
  for (const StageHalfspace& s : stage_specs) {
    if (!(s.rhs > 0.0)) {
      throw InvalidArgument("halfspace '" + s.name +
                            "' needs a positive right-hand side");
    }
    out.push_back({s.kind, s.normal / s.rhs, s.level, s.name});
  }
  return out;
}

TerminalIngredients synthesize_terminal(
    const LTISystem& sys, const Matrix& Q, const Matrix& R,
    const Matrix& kappa_sigma,
    const std::vector<TerminalHalfspace>& halfspaces) {
  const LQRSolution lqr = synthesize_gain(sys, Q, R);
  TerminalIngredients t;
  t.K = lqr.K;
  t.P = lqr.P;
  t.sigma_inf = steady_state_cov(sys, t.K, kappa_sigma);
  t.halfspaces = halfspaces;
  t.alpha = max_alpha(t.P, t.K, t.sigma_inf, halfspaces);
  return t;
}

}  // namespace drmpc
