#include "drmpc/cost_model.hpp"

#include "drmpc/errors.hpp"

namespace drmpc {

namespace {

void check_pd(const Matrix& m, int dim, const char* what) {
  if (m.rows() != dim || m.cols() != dim) {
    throw InvalidArgument(std::string(what) + " has wrong shape");
  }
  if (!is_symmetric(m, 1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff()))) {
    throw InvalidArgument(std::string(what) + " is not symmetric");
  }
  if (min_eigenvalue(m) <= 1e-10) {
    throw InvalidArgument(std::string(what) + " is not positive definite");
  }
}

// Upper factor U with U^T U = m, so ||U y||^2 = y^T m y.
Matrix weight_root(const Matrix& m) {
  return psd_factor(m).transpose();
}

}  // namespace

void CostWeights::validate(int nx, int nu) const {
  check_pd(Q, nx, "Q");
  check_pd(R, nu, "R");
  check_pd(P, nx, "P");
}

Matrix CostWeights::qbar(int horizon) const {
  const Eigen::Index nx = Q.rows();
  Matrix out = Matrix::Zero((horizon + 1) * nx, (horizon + 1) * nx);
  for (int t = 0; t < horizon; ++t) out.block(t * nx, t * nx, nx, nx) = Q;
  out.bottomRightCorner(nx, nx) = P;
  return out;
}

Matrix CostWeights::rbar(int horizon) const {
  return block_diag_repeat(R, horizon);
}

double lyapunov_residual(const Matrix& A, const Matrix& B, const Matrix& K,
                         const CostWeights& w) {
  const Matrix ak = A + B * K;
  const Matrix res =
      w.P - ak.transpose() * w.P * ak - w.Q - K.transpose() * w.R * K;
  return min_eigenvalue(res);
}

Matrix WorstCaseSecondMoment::sigma_d() const {
  const Eigen::Index nw = sigma_hat.rows();
  Matrix out = Matrix::Zero(horizon * nw + 1, horizon * nw + 1);
  out.topLeftCorner(horizon * nw, horizon * nw) =
      kappa * block_diag_repeat(sigma_hat, horizon);
  out(horizon * nw, horizon * nw) = 1.0;
  return out;
}

double trace_cost(const StackedSADF& policy, const Vector& z0,
                  const StackedModel& model, const CostWeights& weights,
                  const WorstCaseSecondMoment& moment) {
  const int n = model.horizon;
  const Vector z = nominal_trajectory(model, z0, policy.vbar);
  Matrix h(model.n_states(), model.n_dist() + 1);
  h.leftCols(model.n_dist()) = model.bbar * policy.mbar + model.ebar;
  h.rightCols(1) = z;
  Matrix f(model.n_inputs(), model.n_dist() + 1);
  f.leftCols(model.n_dist()) = policy.mbar;
  f.rightCols(1) = policy.vbar;
  const Matrix inner = h.transpose() * weights.qbar(n) * h +
                       f.transpose() * weights.rbar(n) * f;
  return (moment.sigma_d() * inner).trace();
}

double frobenius_cost(const StackedSADF& policy, const Vector& z0,
                      const StackedModel& model, const CostWeights& weights,
                      const WorstCaseSecondMoment& moment) {
  const int n = model.horizon;
  const Matrix qr = weight_root(weights.qbar(n));
  const Matrix rr = weight_root(weights.rbar(n));
  const Matrix S = std::sqrt(moment.kappa) *
                   block_diag_repeat(psd_factor(moment.sigma_hat), n);
  const Vector z = nominal_trajectory(model, z0, policy.vbar);
  return (qr * (model.bbar * policy.mbar + model.ebar) * S).squaredNorm() +
         (qr * z).squaredNorm() + (rr * policy.mbar * S).squaredNorm() +
         (rr * policy.vbar).squaredNorm();
}

SquaresObjective trace_cost_squares(const StackedModel& model,
                                    const DecisionLayout& layout,
                                    const CostWeights& weights,
                                    const WorstCaseSecondMoment& moment) {
  const int n = model.horizon;
  const int ns = model.n_states();
  const int ni = model.n_inputs();
  const int nd = model.n_dist();
  const Matrix qr = weight_root(weights.qbar(n));
  const Matrix rr = weight_root(weights.rbar(n));
  const Matrix S = std::sqrt(moment.kappa) *
                   block_diag_repeat(psd_factor(moment.sigma_hat), n);

  const int rows = ns + ni + nd * (ns + ni);
  SquaresObjective obj;
  obj.F = Matrix::Zero(rows, layout.size());
  obj.f = Vector::Zero(rows);

  // Nominal state and input.
  obj.F.block(0, layout.z0_offset(), ns, layout.nx) = qr * model.abar;
  obj.F.block(0, layout.v_offset(), ns, layout.v_size()) = qr * model.bbar;
  obj.F.block(ns, layout.v_offset(), ni, layout.v_size()) = rr;

  // One column of S at a time: Qbar^(1/2) (bbar Mbar + ebar) s_j and
  // Rbar^(1/2) Mbar s_j.
  int row = ns + ni;
  const Matrix qb = qr * model.bbar;
  for (int j = 0; j < nd; ++j) {
    const Vector s = S.col(j);
    const Matrix ms = layout.mbar_times_map(s);
    obj.F.block(row, layout.m_offset(), ns, layout.m_size()) = qb * ms;
    obj.f.segment(row, ns) = qr * (model.ebar * s);
    row += ns;
    obj.F.block(row, layout.m_offset(), ni, layout.m_size()) = rr * ms;
    row += ni;
  }
  return obj;
}

MeanVarianceCost mean_variance_cost(const Vector& nominal, const Vector& gbar,
                                    const Matrix& kbar,
                                    const CostWeights& weights,
                                    const Matrix& kappa_sigma,
                                    const LTISystem& sys) {
  const int nx = sys.nx();
  return mean_variance_cost(nominal, gbar, kbar, weights, kappa_sigma, sys,
                            Matrix::Zero(nx, nx), Vector::Zero(nx));
}

MeanVarianceCost mean_variance_cost(const Vector& nominal, const Vector& gbar,
                                    const Matrix& kbar,
                                    const CostWeights& weights,
                                    const Matrix& kappa_sigma,
                                    const LTISystem& sys,
                                    const Matrix& sigma_x0,
                                    const Vector& e0) {
  const int nx = sys.nx();
  const int nu = sys.nu();
  const int n = static_cast<int>(gbar.size()) / nu;
  if (nominal.size() != (n + 1) * nx || kbar.rows() != n * nu ||
      kbar.cols() != (n + 1) * nx) {
    throw InvalidArgument("mean_variance_cost: dimension mismatch");
  }
  MeanVarianceCost out;
  for (int t = 0; t < n; ++t) {
    const Vector z = nominal.segment(t * nx, nx);
    const Vector g = gbar.segment(t * nu, nu);
    out.mean += z.dot(weights.Q * z) + g.dot(weights.R * g);
  }
  const Vector zn = nominal.tail(nx);
  out.mean += zn.dot(weights.P * zn);

  const Matrix ew = sys.E * kappa_sigma * sys.E.transpose();
  // c holds E{eps eps^T} and mu holds E{eps} for eps = (e_0, ..., e_t).
  Matrix c = sigma_x0 + e0 * e0.transpose();
  Vector mu = e0;
  for (int t = 0; t < n; ++t) {
    const int dim = (t + 1) * nx;
    const Matrix k_row = kbar.block(t * nu, 0, nu, dim);
    const Matrix cu = k_row * c * k_row.transpose();
    out.variance += (weights.Q * c.bottomRightCorner(nx, nx)).trace() +
                    (weights.R * cu).trace();
    out.cross += 2.0 * nominal.segment(t * nx, nx).dot(weights.Q * mu.tail(nx)) +
                 2.0 * gbar.segment(t * nu, nu).dot(weights.R * (k_row * mu));
    Matrix g = sys.B * k_row;
    g.rightCols(nx) += sys.A;
    const Matrix gc = g * c;
    Matrix next(dim + nx, dim + nx);
    next.topLeftCorner(dim, dim) = c;
    next.topRightCorner(dim, nx) = gc.transpose();
    next.bottomLeftCorner(nx, dim) = gc;
    next.bottomRightCorner(nx, nx) = gc * g.transpose() + ew;
    c = std::move(next);
    Vector mu_next(dim + nx);
    mu_next.head(dim) = mu;
    mu_next.tail(nx) = g * mu;
    mu = std::move(mu_next);
  }
  out.cross += 2.0 * zn.dot(weights.P * mu.tail(nx));
  out.variance += (weights.P * c.bottomRightCorner(nx, nx)).trace();
  return out;
}

}  // namespace drmpc
