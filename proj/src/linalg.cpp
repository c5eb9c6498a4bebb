#include "drmpc/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "drmpc/errors.hpp"

namespace drmpc {

Matrix pseudo_inverse(const Matrix& a, double rel_tol) {
  if (a.size() == 0) return Matrix::Zero(a.cols(), a.rows());
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cutoff = rel_tol * s(0);
  Vector inv = Vector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

int numerical_rank(const Matrix& a, double rel_tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector& s = svd.singularValues();
  const double cutoff = rel_tol * s(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) ++rank;
  }
  return rank;
}

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> checked_eig(const Matrix& a,
                                                  double tol) {
  if (a.rows() != a.cols()) throw InvalidArgument("matrix is not square");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (!is_symmetric(a, 1e-9 * scale)) {
    throw InvalidArgument("matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (a + a.transpose()));
  if (eig.info() != Eigen::Success) {
    throw InvalidArgument("eigendecomposition failed");
  }
  if (a.rows() > 0 && eig.eigenvalues()(0) < -tol * scale) {
    throw InvalidArgument("matrix is not positive semidefinite (min eig " +
                          std::to_string(eig.eigenvalues()(0)) + ")");
  }
  return eig;
}

}  // namespace

Matrix psd_sqrt(const Matrix& a, double tol) {
  auto eig = checked_eig(a, tol);
  Vector d = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * d.asDiagonal() *
         eig.eigenvectors().transpose();
}

Matrix psd_factor(const Matrix& a, double tol) {
  Eigen::LLT<Matrix> llt(0.5 * (a + a.transpose()));
  if (llt.info() == Eigen::Success) {
    Matrix l = llt.matrixL();
    if (l.allFinite() && l.diagonal().minCoeff() > 1e-150) return l;
  }
  return psd_sqrt(a, tol);
}

double min_eigenvalue(const Matrix& symmetric) {
  if (symmetric.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(
      0.5 * (symmetric + symmetric.transpose()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

double spectral_radius(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> eig(a, false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix block_diag_repeat(const Matrix& block, int count) {
  Matrix out = Matrix::Zero(block.rows() * count, block.cols() * count);
  for (int i = 0; i < count; ++i) {
    out.block(i * block.rows(), i * block.cols(), block.rows(),
              block.cols()) = block;
  }
  return out;
}

Matrix solve_discrete_lyapunov(const Matrix& f, const Matrix& w) {
  const Eigen::Index n = f.rows();
  if (f.cols() != n || w.rows() != n || w.cols() != n) {
    throw InvalidArgument("lyapunov: dimension mismatch");
  }
  if (spectral_radius(f) >= 1.0) {
    throw InvalidArgument("lyapunov: matrix is not Schur stable");
  }
  // vec(X) = (I - F kron F)^{-1} vec(W)
  Matrix lhs = Matrix::Identity(n * n, n * n) - kron(f, f);
  Vector rhs = Eigen::Map<const Vector>(w.data(), n * n);
  Vector x = lhs.partialPivLu().solve(rhs);
  Matrix out = Eigen::Map<Matrix>(x.data(), n, n);
  return 0.5 * (out + out.transpose());
}

bool is_symmetric(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  if (a.size() == 0) return true;
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace drmpc
