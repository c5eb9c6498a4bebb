#include "drmpc/interior_point.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <limits>
#include <vector>

#include "drmpc/errors.hpp"
#include "drmpc/log.hpp"

namespace drmpc {

namespace ipm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sqrt(x0^2 - ||x1||^2) without cancellation.
double j_norm(double x0, double nrm1) {
  return std::sqrt(std::max(0.0, (x0 - nrm1) * (x0 + nrm1)));
}

// wbar^T-structured product: [w0 x0 + w1.x1; x0 w1 + x1 + (w1.x1)/(1+w0) w1]
void apply_wbar(const Vector& w, const double* x, double* y, int dim) {
  const double w0 = w(0);
  double w1x1 = 0.0;
  for (int i = 1; i < dim; ++i) w1x1 += w(i) * x[i];
  y[0] = w0 * x[0] + w1x1;
  const double a = x[0] + w1x1 / (1.0 + w0);
  for (int i = 1; i < dim; ++i) y[i] = x[i] + a * w(i);
}

}  // namespace

int Cones::size() const {
  int m = l;
  for (int d : q) m += d;
  return m;
}

Scaling Scaling::compute(const Cones& cones, const Vector& s,
                         const Vector& z) {
  Scaling w;
  w.d = (s.head(cones.l).array() / z.head(cones.l).array()).sqrt();
  int off = cones.l;
  for (int dim : cones.q) {
    const auto sb = s.segment(off, dim);
    const auto zb = z.segment(off, dim);
    const double sn = j_norm(sb(0), sb.tail(dim - 1).norm());
    const double zn = j_norm(zb(0), zb.tail(dim - 1).norm());
    const Vector sbar = sb / sn;
    const Vector zbar = zb / zn;
    const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
    Vector wb(dim);
    wb(0) = (sbar(0) + zbar(0)) / (2.0 * gamma);
    wb.tail(dim - 1) =
        (sbar.tail(dim - 1) - zbar.tail(dim - 1)) / (2.0 * gamma);
    // Renormalize so that wb^T J wb = 1 exactly.
    wb(0) = std::sqrt(1.0 + wb.tail(dim - 1).squaredNorm());
    w.beta.push_back(std::sqrt(sn / zn));
    w.wbar.push_back(std::move(wb));
    off += dim;
  }
  return w;
}

Vector Scaling::apply(const Cones& cones, const Vector& x) const {
  Vector y(x.size());
  y.head(cones.l) = d.cwiseProduct(x.head(cones.l));
  int off = cones.l;
  for (std::size_t k = 0; k < cones.q.size(); ++k) {
    const int dim = cones.q[k];
    apply_wbar(wbar[k], x.data() + off, y.data() + off, dim);
    y.segment(off, dim) *= beta[k];
    off += dim;
  }
  return y;
}

Vector Scaling::apply_inverse(const Cones& cones, const Vector& x) const {
  Vector y(x.size());
  y.head(cones.l) = x.head(cones.l).cwiseQuotient(d);
  int off = cones.l;
  for (std::size_t k = 0; k < cones.q.size(); ++k) {
    const int dim = cones.q[k];
    // W^{-1} = J Wbar J / beta
    Vector xj = x.segment(off, dim);
    xj.tail(dim - 1) *= -1.0;
    apply_wbar(wbar[k], xj.data(), y.data() + off, dim);
    y.segment(off + 1, dim - 1) *= -1.0;
    y.segment(off, dim) /= beta[k];
    off += dim;
  }
  return y;
}

Vector jordan_product(const Cones& cones, const Vector& x, const Vector& y) {
  Vector out(x.size());
  out.head(cones.l) = x.head(cones.l).cwiseProduct(y.head(cones.l));
  int off = cones.l;
  for (int dim : cones.q) {
    const auto xb = x.segment(off, dim);
    const auto yb = y.segment(off, dim);
    out(off) = xb.dot(yb);
    out.segment(off + 1, dim - 1) =
        xb(0) * yb.tail(dim - 1) + yb(0) * xb.tail(dim - 1);
    off += dim;
  }
  return out;
}

Vector jordan_divide(const Cones& cones, const Vector& lambda,
                     const Vector& r) {
  Vector out(r.size());
  out.head(cones.l) = r.head(cones.l).cwiseQuotient(lambda.head(cones.l));
  int off = cones.l;
  for (int dim : cones.q) {
    const auto lb = lambda.segment(off, dim);
    const auto rb = r.segment(off, dim);
    const double l0 = lb(0);
    const double l1n = lb.tail(dim - 1).norm();
    const double det = (l0 - l1n) * (l0 + l1n);
    const double x0 = (l0 * rb(0) - lb.tail(dim - 1).dot(rb.tail(dim - 1))) /
                      det;
    out(off) = x0;
    out.segment(off + 1, dim - 1) =
        (rb.tail(dim - 1) - x0 * lb.tail(dim - 1)) / l0;
    off += dim;
  }
  return out;
}

Vector identity(const Cones& cones) {
  Vector e = Vector::Zero(cones.size());
  e.head(cones.l).setOnes();
  int off = cones.l;
  for (int dim : cones.q) {
    e(off) = 1.0;
    off += dim;
  }
  return e;
}

double max_step(const Cones& cones, const Vector& x, const Vector& d) {
  double alpha = kInf;
  for (int i = 0; i < cones.l; ++i) {
    if (d(i) < 0.0) alpha = std::min(alpha, -x(i) / d(i));
  }
  int off = cones.l;
  for (int dim : cones.q) {
    const auto xb = x.segment(off, dim);
    const auto db = d.segment(off, dim);
    // f(a) = (x0 + a d0)^2 - ||x1 + a d1||^2 = qa a^2 + qb a + qc
    const double qa = db(0) * db(0) - db.tail(dim - 1).squaredNorm();
    const double qb =
        2.0 * (xb(0) * db(0) - xb.tail(dim - 1).dot(db.tail(dim - 1)));
    const double x1n = xb.tail(dim - 1).norm();
    const double qc = (xb(0) - x1n) * (xb(0) + x1n);
    double root = kInf;
    if (std::abs(qa) <= 1e-300) {
      if (qb < 0.0) root = -qc / qb;
    } else {
      const double disc = qb * qb - 4.0 * qa * qc;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        const double t = -0.5 * (qb + (qb >= 0.0 ? sq : -sq));
        const double r1 = t / qa;
        const double r2 = t != 0.0 ? qc / t : kInf;
        if (r1 > 0.0) root = std::min(root, r1);
        if (r2 > 0.0) root = std::min(root, r2);
      }
    }
    // The scalar part must stay nonnegative as well.
    if (db(0) < 0.0) root = std::min(root, -xb(0) / db(0));
    alpha = std::min(alpha, root);
    off += dim;
  }
  return alpha;
}

double min_eigenvalue(const Cones& cones, const Vector& x) {
  double m = kInf;
  for (int i = 0; i < cones.l; ++i) m = std::min(m, x(i));
  int off = cones.l;
  for (int dim : cones.q) {
    m = std::min(m, x(off) - x.segment(off + 1, dim - 1).norm());
    off += dim;
  }
  return m;
}

}  // namespace ipm

namespace {

using ipm::Cones;
using ipm::Scaling;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Standard form: min 0.5 x'Px + q'x  s.t.  A x = b,  G x + s = h,  s in K.
struct StandardForm {
  Matrix P;
  Vector q;
  Matrix A;
  Vector b;
  Matrix G;
  Vector h;
  Cones cones;
  double r = 0.0;  // objective constant
};

constexpr double kGapFloor = 1e-6;

StandardForm lower(const ConicProgram& p) {
  const int n = p.num_variables();
  std::vector<Vector> lin_g;
  std::vector<double> lin_h;
  for (Eigen::Index i = 0; i < p.ineq_matrix().rows(); ++i) {
    lin_g.push_back(p.ineq_matrix().row(i).transpose());
    lin_h.push_back(p.ineq_rhs()(i));
  }
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(p.lower()(i))) {
      Vector g = Vector::Zero(n);
      g(i) = -1.0;
      lin_g.push_back(g);
      lin_h.push_back(-p.lower()(i));
    }
    if (std::isfinite(p.upper()(i))) {
      Vector g = Vector::Zero(n);
      g(i) = 1.0;
      lin_g.push_back(g);
      lin_h.push_back(p.upper()(i));
    }
  }
  // Keep only the norm rows that can be nonzero; a cone with none left is
  // the linear inequality c'x + d >= ||e||.
  struct Reduced {
    Vector c;
    double d;
    Matrix D;
    Vector e;
  };
  std::vector<Reduced> socs;
  for (const auto& s : p.socs()) {
    std::vector<int> keep;
    double const_norm2 = 0.0;
    for (Eigen::Index r = 0; r < s.D.rows(); ++r) {
      if (s.D.row(r).cwiseAbs().maxCoeff() > 0.0) {
        keep.push_back(static_cast<int>(r));
      } else {
        const_norm2 += s.e(r) * s.e(r);
      }
    }
    if (keep.empty()) {
      lin_g.push_back(-s.c);
      lin_h.push_back(s.d - std::sqrt(const_norm2));
      continue;
    }
    Reduced red;
    red.c = s.c;
    red.d = s.d;
    const int extra = const_norm2 > 0.0 ? 1 : 0;
    red.D = Matrix::Zero(static_cast<Eigen::Index>(keep.size()) + extra, n);
    red.e = Vector::Zero(static_cast<Eigen::Index>(keep.size()) + extra);
    for (std::size_t k = 0; k < keep.size(); ++k) {
      red.D.row(static_cast<Eigen::Index>(k)) = s.D.row(keep[k]);
      red.e(static_cast<Eigen::Index>(k)) = s.e(keep[k]);
    }
    if (extra) red.e(red.e.size() - 1) = std::sqrt(const_norm2);
    socs.push_back(std::move(red));
  }

  StandardForm f;
  f.P = p.hessian();
  f.q = p.linear();
  f.A = p.eq_matrix();
  f.b = p.eq_rhs();
  f.r = p.constant();
  f.cones.l = static_cast<int>(lin_g.size());
  for (const auto& s : socs) f.cones.q.push_back(static_cast<int>(s.D.rows()) + 1);
  const int m = f.cones.size();
  f.G = Matrix::Zero(m, n);
  f.h = Vector::Zero(m);
  for (int i = 0; i < f.cones.l; ++i) {
    f.G.row(i) = lin_g[i].transpose();
    f.h(i) = lin_h[i];
  }
  int off = f.cones.l;
  for (const auto& s : socs) {
    const int dim = static_cast<int>(s.D.rows()) + 1;
    f.G.row(off) = -s.c.transpose();
    f.h(off) = s.d;
    f.G.block(off + 1, 0, dim - 1, n) = -s.D;
    f.h.segment(off + 1, dim - 1) = s.e;
    off += dim;
  }
  return f;
}

struct CoreResult {
  bool converged = false;
  Vector x;
  int iterations = 0;
  double pres = kInf;
  double dres = kInf;
  double gap = kInf;
  std::string message;
};

class KKTSolver {
 public:
  KKTSolver(const StandardForm& f, const Matrix& gs) {
    const Eigen::Index n = f.P.rows();
    const Eigen::Index p = f.A.rows();
    kkt_ = Matrix::Zero(n + p, n + p);
    kkt_.topLeftCorner(n, n) = f.P;
    if (gs.rows() > 0) kkt_.topLeftCorner(n, n).noalias() += gs.transpose() * gs;
    kkt_.topRightCorner(n, p) = f.A.transpose();
    kkt_.bottomLeftCorner(p, n) = f.A;
    // Symmetric Ruiz equilibration, D K D with unit row maxima. Near the
    // boundary the diagonal spans many decades and the unscaled LU would
    // look singular.
    d_ = Vector::Ones(n + p);
    Matrix scaled = kkt_;
    for (int pass = 0; pass < 8; ++pass) {
      Vector r(n + p);
      for (Eigen::Index i = 0; i < n + p; ++i) {
        const double mx = scaled.row(i).cwiseAbs().maxCoeff();
        r(i) = mx > 0.0 ? 1.0 / std::sqrt(mx) : 1.0;
      }
      if ((r.array() - 1.0).abs().maxCoeff() < 1e-3) break;
      scaled = r.asDiagonal() * scaled * r.asDiagonal();
      d_ = d_.cwiseProduct(r);
    }
    lu_.compute(scaled);
    if (!(lu_.rcond() > 1e-15)) {
      // Singular reduced system: solve a slightly regularized one and let
      // the refinement steps recover accuracy.
      scaled.topLeftCorner(n, n).diagonal().array() += 1e-12;
      scaled.bottomRightCorner(p, p).diagonal().array() -= 1e-12;
      lu_.compute(scaled);
    }
  }

  // Solves [H A'; A 0] [dx; dy] = [r1; r2] with iterative refinement.
  void solve(const Vector& r1, const Vector& r2, Vector& dx, Vector& dy) const {
    const Eigen::Index n = r1.size();
    const Eigen::Index p = r2.size();
    Vector rhs(n + p);
    rhs << r1, r2;
    Vector sol = scaled_solve(rhs);
    const double rhs_norm = std::max(rhs.norm(), 1e-300);
    for (int k = 0; k < 3; ++k) {
      const Vector res = rhs - kkt_ * sol;
      if (res.norm() <= 1e-14 * rhs_norm) break;
      sol += scaled_solve(res);
    }
    dx = sol.head(n);
    dy = sol.tail(p);
  }

 private:
  Vector scaled_solve(const Vector& rhs) const {
    return d_.cwiseProduct(lu_.solve(d_.cwiseProduct(rhs)));
  }

  Matrix kkt_;
  Vector d_;
  Eigen::PartialPivLU<Matrix> lu_;
};

CoreResult run_core(const StandardForm& f, const SolverSettings& settings) {
  const Cones& cones = f.cones;
  const Eigen::Index n = f.P.rows();
  const Eigen::Index m = cones.size();
  const Vector e = ipm::identity(cones);
  CoreResult out;

  // Starting point from the W = I system.
  Vector x, y;
  {
    KKTSolver kkt(f, f.G);
    kkt.solve(-f.q + f.G.transpose() * f.h, f.b, x, y);
  }
  Vector s = f.h - f.G * x;
  Vector z = -s;
  if (m > 0) {
    const double ts = -ipm::min_eigenvalue(cones, s);
    if (ts >= -1e-8 * std::max(1.0, s.norm())) s += (1.0 + ts) * e;
    const double tz = -ipm::min_eigenvalue(cones, z);
    if (tz >= -1e-8 * std::max(1.0, z.norm())) z += (1.0 + tz) * e;
  }

  const double bnorm = std::max(1.0, f.b.size() ? f.b.norm() : 0.0);
  const double hnorm = std::max(1.0, m ? f.h.norm() : 0.0);
  const double qnorm = std::max(1.0, f.q.norm());
  const double tol = settings.tolerance;

  for (int it = 0; it <= settings.max_iterations; ++it) {
    out.iterations = it;
    const Vector rx = f.P * x + f.q + f.A.transpose() * y + f.G.transpose() * z;
    const Vector ry = f.A * x - f.b;
    const Vector rz = f.G * x + s - f.h;
    const double gap = m ? s.dot(z) : 0.0;
    const double pcost = 0.5 * x.dot(f.P * x) + f.q.dot(x);
    out.pres = std::max(ry.size() ? ry.norm() / bnorm : 0.0,
                        m ? rz.norm() / hnorm : 0.0);
    out.dres = rx.norm() / qnorm;
    out.gap = gap;
    out.x = x;
    if (log_level() >= LogLevel::kDebug) {
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "ipm it %d pres %.3e dres %.3e gap %.3e pcost %.9e", it,
                    out.pres, out.dres, gap, pcost);
      log_debug(buf);
    }
    if (!x.allFinite() || !z.allFinite()) {
      out.message = "non-finite iterate";
      return out;
    }
    // The gap is measured against the full objective value. The floor is
    // small because the objective was normalized by its largest
    // coefficient, so the optimal value can be tiny in these units.
    if (out.pres <= tol && out.dres <= tol &&
        gap <= tol * std::max(kGapFloor, std::abs(pcost + f.r))) {
      out.converged = true;
      return out;
    }
    if (it == settings.max_iterations) break;
    if (x.norm() > 1e14 || z.norm() > 1e14) {
      out.message = "iterates diverged";
      return out;
    }
    if (m == 0) {
      // Equality-constrained QP: a single Newton step is exact.
      KKTSolver kkt(f, Matrix(0, n));
      Vector dx, dy;
      kkt.solve(-rx, -ry, dx, dy);
      x += dx;
      y += dy;
      continue;
    }

    const Scaling w = Scaling::compute(cones, s, z);
    const Vector lambda = w.apply(cones, z);
    const double mu = gap / cones.degree();

    // Scaled G: W^{-1} G, so that G' W^{-2} G = Gs' Gs.
    Matrix gs(m, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      gs.col(j) = w.apply_inverse(cones, f.G.col(j));
    }
    const KKTSolver kkt(f, gs);

    // Newton direction for a given complementarity target u, where
    // W^{-1} ds + W dz = u.
    //
    // The full system in (dx, dy, dz) is
    //   P dx + A' dy + G' dz = b1,  A dx = b2,  G dx - W^2 dz = b3.
    // It is solved through the reduced matrix P + Gs' Gs, then refined
    // against the full residual: near the boundary W^{-2} swamps P in the
    // reduced matrix and a single solve loses most of its digits.
    auto solve_full = [&](const Vector& b1, const Vector& b2, const Vector& b3,
                          Vector& dx, Vector& dy, Vector& dz) {
      const Vector t = -w.apply_inverse(cones, b3);
      kkt.solve(b1 - gs.transpose() * t, b2, dx, dy);
      dz = w.apply_inverse(cones, gs * dx + t);
    };
    auto direction = [&](const Vector& u, Vector& dx, Vector& dy, Vector& ds,
                         Vector& dz, Vector& ds_t, Vector& dz_t) {
      const Vector b1 = -rx;
      const Vector b2 = -ry;
      const Vector b3 = -rz - w.apply(cones, u);
      solve_full(b1, b2, b3, dx, dy, dz);
      const double bnorm_full =
          std::max({b1.norm(), b2.size() ? b2.norm() : 0.0, b3.norm(), 1e-300});
      for (int k = 0; k < 3; ++k) {
        const Vector e1 = b1 - f.P * dx - f.A.transpose() * dy - f.G.transpose() * dz;
        const Vector e2 = b2 - f.A * dx;
        const Vector e3 = b3 - f.G * dx + w.apply(cones, w.apply(cones, dz));
        const double enorm =
            std::max({e1.norm(), e2.size() ? e2.norm() : 0.0, e3.norm()});
        if (enorm <= 1e-14 * bnorm_full) break;
        Vector cx, cy, cz;
        solve_full(e1, e2, e3, cx, cy, cz);
        dx += cx;
        dy += cy;
        dz += cz;
      }
      dz_t = w.apply(cones, dz);
      // ds from the linearized primal equation keeps rz from drifting when
      // the scaling is badly conditioned near the boundary.
      ds = -rz - f.G * dx;
      ds_t = w.apply_inverse(cones, ds);
    };

    Vector dx, dy, ds, dz, ds_t, dz_t;
    direction(-lambda, dx, dy, ds, dz, ds_t, dz_t);
    const double a_aff = std::min(
        1.0, std::min(ipm::max_step(cones, lambda, ds_t),
                      ipm::max_step(cones, lambda, dz_t)));
    const double gap_aff = (s + a_aff * ds).dot(z + a_aff * dz);
    const double sigma = std::clamp(std::pow(std::max(0.0, gap_aff) / gap, 3),
                                    0.0, 1.0);

    Vector rc = -ipm::jordan_product(cones, lambda, lambda) + sigma * mu * e -
                ipm::jordan_product(cones, ds_t, dz_t);
    direction(ipm::jordan_divide(cones, lambda, rc), dx, dy, ds, dz, ds_t,
              dz_t);
    const double a_max = std::min(ipm::max_step(cones, lambda, ds_t),
                                  ipm::max_step(cones, lambda, dz_t));
    const double alpha = std::min(1.0, 0.99 * a_max);
    if (!(alpha > 1e-14)) {
      out.message = "step length collapsed";
      return out;
    }
    x += alpha * dx;
    y += alpha * dy;
    s += alpha * ds;
    z += alpha * dz;
  }
  out.message = "iteration limit reached";
  return out;
}

// min tau  s.t.  A x = b,  G x + s = h + tau e,  tau >= -1.
StandardForm phase_one(const StandardForm& f) {
  const Eigen::Index n = f.P.rows();
  const Eigen::Index m = f.cones.size();
  StandardForm p;
  p.P = 1e-9 * Matrix::Identity(n + 1, n + 1);
  p.q = Vector::Zero(n + 1);
  p.q(n) = 1.0;
  p.A = Matrix::Zero(f.A.rows(), n + 1);
  p.A.leftCols(n) = f.A;
  p.b = f.b;
  p.cones = f.cones;
  p.cones.l += 1;
  p.G = Matrix::Zero(m + 1, n + 1);
  p.h = Vector::Zero(m + 1);
  p.G(0, n) = -1.0;
  p.h(0) = 1.0;
  const Vector e = ipm::identity(f.cones);
  p.G.bottomLeftCorner(m, n) = f.G;
  p.G.bottomRightCorner(m, 1) = -e;
  p.h.tail(m) = f.h;
  return p;
}

}  // namespace

ConicSolution InteriorPointSolver::solve(const ConicProgram& program,
                                         const SolverSettings& settings) const {
  const auto start = std::chrono::steady_clock::now();
  program.validate();
  StandardForm f = lower(program);
  // Power-of-two objective normalization: tolerances then mean the same
  // thing for any positive multiple of the objective.
  double mag = f.P.size() ? f.P.cwiseAbs().maxCoeff() : 0.0;
  if (f.q.size()) mag = std::max(mag, f.q.cwiseAbs().maxCoeff());
  if (mag > 0.0 && std::isfinite(mag)) {
    const double scale = std::exp2(std::round(std::log2(mag)));
    f.P /= scale;
    f.q /= scale;
    f.r /= scale;
  }
  ConicSolution sol;

  const CoreResult core = run_core(f, settings);
  sol.iterations = core.iterations;
  sol.primal_residual = core.pres;
  sol.dual_residual = core.dres;
  sol.gap = core.gap;
  const Vector& x = core.x;
  if (core.converged) {
    sol.status = SolveStatus::kOptimal;
    sol.x = x;
    sol.objective = program.objective(x);
    sol.message = "converged";
  } else {
    const StandardForm p1 = phase_one(f);
    SolverSettings s1 = settings;
    s1.tolerance = std::max(settings.tolerance, 1e-9);
    const CoreResult r1 = run_core(p1, s1);
    sol.iterations += r1.iterations;
    const double feas_tol = std::max(1e-7, 10.0 * settings.tolerance);
    if (r1.converged && r1.x(r1.x.size() - 1) > feas_tol) {
      sol.status = SolveStatus::kInfeasible;
      sol.message = "phase-I: smallest uniform cone relaxation is " +
                    std::to_string(r1.x(r1.x.size() - 1));
    } else {
      sol.status = SolveStatus::kNumericalFailure;
      sol.x = x;
      sol.message = core.message + " (primal residual " +
                    std::to_string(core.pres) + ", dual residual " +
                    std::to_string(core.dres) + ", gap " +
                    std::to_string(core.gap) + ")";
    }
  }
  sol.solve_time_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  return sol;
}

}  // namespace drmpc
