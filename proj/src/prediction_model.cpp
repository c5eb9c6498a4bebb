#include "drmpc/prediction_model.hpp"

#include <Eigen/Eigenvalues>
#include <complex>
#include <vector>

#include "drmpc/errors.hpp"

namespace drmpc {

void LTISystem::validate() const {
  if (A.rows() == 0 || A.rows() != A.cols()) {
    throw ModelError("A must be square and non-empty");
  }
  if (B.rows() != A.rows() || B.cols() == 0) {
    throw ModelError("B must have as many rows as A");
  }
  if (E.rows() != A.rows() || E.cols() == 0) {
    throw ModelError("E must have as many rows as A");
  }
  if (numerical_rank(E) != E.cols()) {
    throw ModelError("E must have full column rank");
  }
}

bool is_stabilizable(const Matrix& a, const Matrix& b, double tol) {
  using Complex = std::complex<double>;
  const Eigen::Index n = a.rows();
  Eigen::EigenSolver<Matrix> eig(a, false);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex lambda = eig.eigenvalues()(i);
    if (std::abs(lambda) < 1.0) continue;
    Eigen::MatrixXcd pbh(n, n + b.cols());
    pbh.leftCols(n) = lambda * Eigen::MatrixXcd::Identity(n, n) -
                      a.cast<Complex>();
    pbh.rightCols(b.cols()) = b.cast<Complex>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
    const auto& s = svd.singularValues();
    if (s(n - 1) <= tol * std::max(1.0, s(0))) return false;
  }
  return true;
}

StackedModel build_stacked(const LTISystem& sys, int horizon) {
  if (horizon < 1) throw InvalidArgument("horizon must be at least 1");
  sys.validate();
  const int nx = sys.nx();
  const int nu = sys.nu();
  const int nw = sys.nw();
  const int n = horizon;

  StackedModel m;
  m.sys = sys;
  m.horizon = n;
  m.abar = Matrix::Zero((n + 1) * nx, nx);
  m.bbar = Matrix::Zero((n + 1) * nx, n * nu);
  m.ebar = Matrix::Zero((n + 1) * nx, n * nw);

  // powers[i] = A^i
  std::vector<Matrix> powers(n + 1);
  powers[0] = Matrix::Identity(nx, nx);
  for (int i = 1; i <= n; ++i) powers[i] = sys.A * powers[i - 1];

  for (int t = 0; t <= n; ++t) {
    m.abar.block(t * nx, 0, nx, nx) = powers[t];
    for (int j = 0; j < t; ++j) {
      m.bbar.block(t * nx, j * nu, nx, nu) = powers[t - 1 - j] * sys.B;
      m.ebar.block(t * nx, j * nw, nx, nw) = powers[t - 1 - j] * sys.E;
    }
  }
  m.ebar_pinv = pseudo_inverse(m.ebar);
  return m;
}

Vector nominal_trajectory(const StackedModel& model, const Vector& z0,
                          const Vector& vbar) {
  if (z0.size() != model.nx() || vbar.size() != model.n_inputs()) {
    throw InvalidArgument("nominal_trajectory: dimension mismatch");
  }
  return model.abar * z0 + model.bbar * vbar;
}

Vector simulate_stacked(const LTISystem& sys, const Vector& x0,
                        const Vector& ubar, const Vector& wbar) {
  const int nx = sys.nx();
  const int nu = sys.nu();
  const int nw = sys.nw();
  const int n = static_cast<int>(ubar.size()) / nu;
  if (wbar.size() != n * nw) {
    throw InvalidArgument("simulate_stacked: dimension mismatch");
  }
  Vector x((n + 1) * nx);
  x.head(nx) = x0;
  for (int t = 0; t < n; ++t) {
    x.segment((t + 1) * nx, nx) = sys.A * x.segment(t * nx, nx) +
                                  sys.B * ubar.segment(t * nu, nu) +
                                  sys.E * wbar.segment(t * nw, nw);
  }
  return x;
}

}  // namespace drmpc
