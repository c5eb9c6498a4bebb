#pragma once

#include "drmpc/policy.hpp"

namespace drmpc {

/// Position of the MPC decision variables in a flat vector:
/// [vbar | M_1 .. M_{N-1} (column-major) | z0 | lambda (optional)].
struct DecisionLayout {
  int horizon = 0;
  int nx = 0;
  int nu = 0;
  int nw = 0;
  bool has_lambda = false;

  DecisionLayout() = default;
  DecisionLayout(const StackedModel& model, bool with_lambda)
      : horizon(model.horizon),
        nx(model.nx()),
        nu(model.nu()),
        nw(model.nw()),
        has_lambda(with_lambda) {}

  int v_offset() const { return 0; }
  int v_size() const { return horizon * nu; }
  int m_offset() const { return v_size(); }
  int m_size() const { return (horizon - 1) * nu * nw; }
  int z0_offset() const { return m_offset() + m_size(); }
  int lambda_offset() const { return z0_offset() + nx; }
  int size() const { return lambda_offset() + (has_lambda ? 1 : 0); }

  /// Index of entry (r, c) of M_d.
  int m_index(int d, int r, int c) const {
    return m_offset() + (d - 1) * nu * nw + c * nu + r;
  }

  Vector pack(const SADFPolicy& policy, const Vector& z0,
              double lambda = 0.0) const {
    Vector x = Vector::Zero(size());
    x.segment(v_offset(), v_size()) = policy.vbar;
    for (int d = 1; d < horizon; ++d) {
      for (int c = 0; c < nw; ++c) {
        for (int r = 0; r < nu; ++r) {
          x(m_index(d, r, c)) = policy.m_blocks[d - 1](r, c);
        }
      }
    }
    x.segment(z0_offset(), nx) = z0;
    if (has_lambda) x(lambda_offset()) = lambda;
    return x;
  }

  SADFPolicy policy(const Vector& x) const {
    SADFPolicy p;
    p.vbar = x.segment(v_offset(), v_size());
    for (int d = 1; d < horizon; ++d) {
      Matrix m(nu, nw);
      for (int c = 0; c < nw; ++c) {
        for (int r = 0; r < nu; ++r) m(r, c) = x(m_index(d, r, c));
      }
      p.m_blocks.push_back(m);
    }
    return p;
  }

  Vector z0(const Vector& x) const { return x.segment(z0_offset(), nx); }
  double lambda(const Vector& x) const {
    return has_lambda ? x(lambda_offset()) : 0.0;
  }

  /// Linear map m -> Mbar^T a, for a fixed a of length N nu.
  Matrix mbar_transpose_map(const Vector& a) const {
    Matrix out = Matrix::Zero(horizon * nw, m_size());
    for (int d = 1; d < horizon; ++d) {
      for (int t = 0; t + d < horizon; ++t) {
        for (int c = 0; c < nw; ++c) {
          for (int r = 0; r < nu; ++r) {
            out(t * nw + c, m_index(d, r, c) - m_offset()) +=
                a((t + d) * nu + r);
          }
        }
      }
    }
    return out;
  }

  /// Linear map m -> Mbar s, for a fixed s of length N nw.
  Matrix mbar_times_map(const Vector& s) const {
    Matrix out = Matrix::Zero(horizon * nu, m_size());
    for (int d = 1; d < horizon; ++d) {
      for (int t = 0; t + d < horizon; ++t) {
        for (int c = 0; c < nw; ++c) {
          for (int r = 0; r < nu; ++r) {
            out((t + d) * nu + r, m_index(d, r, c) - m_offset()) +=
                s(t * nw + c);
          }
        }
      }
    }
    return out;
  }
};

}  // namespace drmpc
