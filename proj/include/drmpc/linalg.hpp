#pragma once

#include <Eigen/Dense>

namespace drmpc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Moore-Penrose pseudo-inverse via SVD. Singular values below
/// rel_tol * sigma_max are treated as zero.
Matrix pseudo_inverse(const Matrix& a, double rel_tol = 1e-10);

/// Numerical rank with the same cutoff rule as pseudo_inverse.
int numerical_rank(const Matrix& a, double rel_tol = 1e-10);

/// Symmetric PSD square root through an eigendecomposition. Small negative
/// eigenvalues (>= -tol * scale) are clipped; larger ones throw.
Matrix psd_sqrt(const Matrix& a, double tol = 1e-12);

/// Any factor L with L L^T = a. Cholesky when a is positive definite,
/// the symmetric root otherwise.
Matrix psd_factor(const Matrix& a, double tol = 1e-12);

double min_eigenvalue(const Matrix& symmetric);
double spectral_radius(const Matrix& a);

Matrix kron(const Matrix& a, const Matrix& b);

/// Block-diagonal matrix with `count` copies of `block`.
Matrix block_diag_repeat(const Matrix& block, int count);

/// Solves X = F X F^T + W for Schur-stable F.
Matrix solve_discrete_lyapunov(const Matrix& f, const Matrix& w);

bool is_symmetric(const Matrix& a, double tol);

}  // namespace drmpc
