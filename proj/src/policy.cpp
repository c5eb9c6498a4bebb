#include "drmpc/policy.hpp"

#include <cmath>

#include "drmpc/errors.hpp"
#include "drmpc/log.hpp"

namespace drmpc {

namespace {

constexpr double kConditionWarning = 1e12;

Matrix checked_inverse(const Matrix& a, const char* what) {
  Eigen::PartialPivLU<Matrix> lu(a);
  const double rcond = lu.rcond();
  if (!(rcond > 0.0) || !std::isfinite(rcond)) {
    throw TransformError(std::string(what) + " is singular");
  }
  if (1.0 / rcond > kConditionWarning) {
    log_warning(std::string(what) + " is ill-conditioned (cond ~ " +
                std::to_string(1.0 / rcond) + ")");
  }
  return lu.inverse();
}

void check_sadf(const StackedSADF& p, const StackedModel& m) {
  if (p.vbar.size() != m.n_inputs() || p.mbar.rows() != m.n_inputs() ||
      p.mbar.cols() != m.n_dist()) {
    throw InvalidArgument("SADF policy: dimension mismatch");
  }
}

void check_ef(const ErrorFeedbackPolicy& p, const StackedModel& m) {
  if (p.gbar.size() != m.n_inputs() || p.kbar.rows() != m.n_inputs() ||
      p.kbar.cols() != m.n_states()) {
    throw InvalidArgument("EF policy: dimension mismatch");
  }
}

}  // namespace

Matrix assemble_mbar(const SADFPolicy& policy, const StackedModel& model) {
  const int n = model.horizon;
  const int nu = model.nu();
  const int nw = model.nw();
  if (static_cast<int>(policy.m_blocks.size()) != n - 1) {
    throw InvalidArgument("SADF policy needs N-1 feedback blocks");
  }
  Matrix mbar = Matrix::Zero(n * nu, n * nw);
  for (int i = 1; i < n; ++i) {
    for (int t = 0; t < i; ++t) {
      const Matrix& blk = policy.m_blocks[i - t - 1];
      if (blk.rows() != nu || blk.cols() != nw) {
        throw InvalidArgument("SADF block has wrong shape");
      }
      mbar.block(i * nu, t * nw, nu, nw) = blk;
    }
  }
  return mbar;
}

StackedSADF to_stacked(const SADFPolicy& policy, const StackedModel& model) {
  if (policy.vbar.size() != model.n_inputs()) {
    throw InvalidArgument("SADF policy: vbar has wrong length");
  }
  return {policy.vbar, assemble_mbar(policy, model)};
}

SADFPolicy to_toeplitz(const StackedSADF& policy, const StackedModel& model,
                       double tol) {
  check_sadf(policy, model);
  const int n = model.horizon;
  const int nu = model.nu();
  const int nw = model.nw();
  SADFPolicy out;
  out.vbar = policy.vbar;
  for (int d = 1; d < n; ++d) {
    out.m_blocks.push_back(policy.mbar.block(d * nu, 0, nu, nw));
  }
  const double scale = std::max(1.0, policy.mbar.cwiseAbs().maxCoeff());
  const double dev =
      (assemble_mbar(out, model) - policy.mbar).cwiseAbs().maxCoeff();
  if (dev > tol * scale) {
    throw TransformError("feedback matrix is not block-Toeplitz (deviation " +
                         std::to_string(dev) + ")");
  }
  return out;
}

std::vector<Matrix> toeplitz_gains(const SADFPolicy& policy,
                                   const StackedModel& model) {
  const LTISystem& s = model.sys;
  const int n = model.horizon;
  const Matrix e_pinv = pseudo_inverse(s.E);
  auto m_block = [&](int d) -> Matrix {
    if (d >= 1 && d <= n - 1) return policy.m_blocks[d - 1];
    return Matrix::Zero(s.nu(), s.nw());
  };
  // phi[m] maps w_j to the state error at lag m under the SADF policy.
  std::vector<Matrix> phi(n + 1);
  phi[1] = s.E;
  for (int m = 2; m <= n; ++m) {
    phi[m] = s.A * phi[m - 1] + s.B * m_block(m - 1);
  }
  std::vector<Matrix> k(n);
  for (int d = 1; d <= n; ++d) {
    Matrix rhs = m_block(d);
    for (int m = 2; m <= d; ++m) rhs -= k[d - m] * phi[m];
    k[d - 1] = rhs * e_pinv;
  }
  return k;
}

ErrorFeedbackPolicy sadf_to_ef(const StackedSADF& policy,
                               const StackedModel& model) {
  check_sadf(policy, model);
  const int nu_tot = model.n_inputs();
  const Matrix me = policy.mbar * model.ebar_pinv;
  const Matrix inv = checked_inverse(
      Matrix::Identity(nu_tot, nu_tot) + me * model.bbar, "I + M E^+ B");
  ErrorFeedbackPolicy out;
  out.kbar = inv * me;
  out.gbar = policy.vbar;
  return out;
}

ErrorFeedbackPolicy sadf_to_ef(const SADFPolicy& policy,
                               const StackedModel& model, Stage0Gain stage0) {
  ErrorFeedbackPolicy out = sadf_to_ef(to_stacked(policy, model), model);
  if (stage0 == Stage0Gain::kToeplitz) {
    const int nu = model.nu();
    const int nx = model.nx();
    const std::vector<Matrix> k = toeplitz_gains(policy, model);
    for (int t = 0; t < model.horizon; ++t) {
      out.kbar.block(t * nu, 0, nu, nx) = k[t];
    }
  }
  return out;
}

StackedSADF ef_to_sadf(const ErrorFeedbackPolicy& policy,
                       const StackedModel& model) {
  check_ef(policy, model);
  const int ns = model.n_states();
  const Matrix inv = checked_inverse(
      Matrix::Identity(ns, ns) - model.bbar * policy.kbar, "I - B K");
  StackedSADF out;
  out.mbar = policy.kbar * inv * model.ebar;
  out.vbar = policy.gbar;
  return out;
}

Vector state_feedback_offset(const StackedSADF& policy,
                             const StackedModel& model, const Vector& z0) {
  check_sadf(policy, model);
  const int nu_tot = model.n_inputs();
  const Matrix me = policy.mbar * model.ebar_pinv;
  const Matrix inv = checked_inverse(
      Matrix::Identity(nu_tot, nu_tot) + me * model.bbar, "I + M E^+ B");
  return inv * (policy.vbar - me * model.abar * z0);
}

Vector nominal_input_from_state_feedback(const Vector& g_sf,
                                         const Matrix& kbar,
                                         const StackedModel& model,
                                         const Vector& z0) {
  const int ns = model.n_states();
  const Matrix inv = checked_inverse(
      Matrix::Identity(ns, ns) - model.bbar * kbar, "I - B K");
  return kbar * inv * (model.abar * z0 + model.bbar * g_sf) + g_sf;
}

ShiftedCandidate shift_candidate(const ErrorFeedbackPolicy& prev,
                                 const Vector& prev_nominal,
                                 const Matrix& terminal_gain,
                                 const StackedModel& model) {
  check_ef(prev, model);
  const int n = model.horizon;
  const int nx = model.nx();
  const int nu = model.nu();
  const LTISystem& s = model.sys;
  const Vector zn = prev_nominal.segment(n * nx, nx);

  ShiftedCandidate c;
  c.ef.gbar.resize(n * nu);
  c.ef.gbar.head((n - 1) * nu) = prev.gbar.tail((n - 1) * nu);
  c.ef.gbar.tail(nu) = terminal_gain * zn;

  c.ef.kbar = Matrix::Zero(n * nu, (n + 1) * nx);
  if (n > 1) {
    c.ef.kbar.topLeftCorner((n - 1) * nu, n * nx) =
        prev.kbar.bottomRightCorner((n - 1) * nu, n * nx);
  }
  c.ef.kbar.block((n - 1) * nu, (n - 1) * nx, nu, nx) = terminal_gain;

  c.nominal.resize((n + 1) * nx);
  c.nominal.head(n * nx) = prev_nominal.tail(n * nx);
  c.nominal.tail(nx) = (s.A + s.B * terminal_gain) * zn;
  c.z0 = c.nominal.head(nx);
  c.lambda = 1.0;
  return c;
}

SADFPolicy shift_toeplitz(const SADFPolicy& prev, const Vector& prev_nominal,
                          const Matrix& terminal_gain,
                          const StackedModel& model) {
  const int n = model.horizon;
  const int nu = model.nu();
  const int nx = model.nx();
  SADFPolicy out;
  out.m_blocks = prev.m_blocks;
  out.vbar.resize(n * nu);
  out.vbar.head((n - 1) * nu) = prev.vbar.tail((n - 1) * nu);
  out.vbar.tail(nu) = terminal_gain * prev_nominal.segment(n * nx, nx);
  return out;
}

Vector applied_input(const ErrorFeedbackPolicy& policy, const Vector& x,
                     const Vector& z0) {
  const Eigen::Index nx = x.size();
  const Eigen::Index n = policy.kbar.cols() / nx - 1;
  const Eigen::Index nu = policy.gbar.size() / n;
  return policy.gbar.head(nu) + policy.kbar.topLeftCorner(nu, nx) * (x - z0);
}

Trajectory simulate_sadf(const StackedSADF& policy, const StackedModel& model,
                         const Vector& x0, const Vector& wbar) {
  check_sadf(policy, model);
  Trajectory out;
  out.u = policy.vbar + policy.mbar * wbar;
  out.x = simulate_stacked(model.sys, x0, out.u, wbar);
  return out;
}

Trajectory simulate_ef(const ErrorFeedbackPolicy& policy,
                       const StackedModel& model, const Vector& x0,
                       const Vector& z0, const Vector& wbar) {
  check_ef(policy, model);
  const LTISystem& s = model.sys;
  const int n = model.horizon;
  const int nx = s.nx();
  const int nu = s.nu();
  const int nw = s.nw();
  const Vector z = nominal_trajectory(model, z0, policy.gbar);
  Trajectory out;
  out.x.resize((n + 1) * nx);
  out.u.resize(n * nu);
  out.x.head(nx) = x0;
  for (int t = 0; t < n; ++t) {
    Vector u = policy.gbar.segment(t * nu, nu);
    for (int i = 0; i <= t; ++i) {
      u += policy.kbar.block(t * nu, i * nx, nu, nx) *
           (out.x.segment(i * nx, nx) - z.segment(i * nx, nx));
    }
    out.u.segment(t * nu, nu) = u;
    out.x.segment((t + 1) * nx, nx) = s.A * out.x.segment(t * nx, nx) +
                                      s.B * u + s.E * wbar.segment(t * nw, nw);
  }
  return out;
}

}  // namespace drmpc
