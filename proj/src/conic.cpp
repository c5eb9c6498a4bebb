#include "drmpc/conic.hpp"

#include <cmath>
#include <json.hpp>

#include "drmpc/errors.hpp"
#include "drmpc/interior_point.hpp"

namespace drmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix grow_cols(const Matrix& m, int cols) {
  Matrix out = Matrix::Zero(m.rows(), cols);
  out.leftCols(m.cols()) = m;
  return out;
}

}  // namespace

void ConicProgram::grow(int extra) {
  const int n = n_ + extra;
  Matrix h = Matrix::Zero(n, n);
  h.topLeftCorner(n_, n_) = H_;
  H_ = std::move(h);
  q_.conservativeResize(n);
  q_.tail(extra).setZero();
  lower_.conservativeResize(n);
  lower_.tail(extra).setConstant(-kInf);
  upper_.conservativeResize(n);
  upper_.tail(extra).setConstant(kInf);
  A_ = grow_cols(A_, n);
  G_ = grow_cols(G_, n);
  for (SOC& s : socs_) {
    s.c.conservativeResize(n);
    s.c.tail(extra).setZero();
    s.D = grow_cols(s.D, n);
  }
  n_ = n;
}

int ConicProgram::add_variables(const std::string& name, int size) {
  if (size <= 0) throw InvalidArgument("variable block must be non-empty");
  for (const Block& b : blocks_) {
    if (b.name == name) throw InvalidArgument("duplicate block " + name);
  }
  const int offset = n_;
  grow(size);
  blocks_.push_back({name, offset, size});
  return offset;
}

const ConicProgram::Block& ConicProgram::block(const std::string& name) const {
  for (const Block& b : blocks_) {
    if (b.name == name) return b;
  }
  throw InvalidArgument("unknown variable block " + name);
}

void ConicProgram::add_squares(const Matrix& F, const Vector& f) {
  if (F.cols() != n_ || F.rows() != f.size()) {
    throw InvalidArgument("add_squares: dimension mismatch");
  }
  H_ += 2.0 * F.transpose() * F;
  q_ += 2.0 * F.transpose() * f;
  r_ += f.squaredNorm();
}

void ConicProgram::add_linear(const Vector& q) {
  if (q.size() != n_) throw InvalidArgument("add_linear: dimension mismatch");
  q_ += q;
}

void ConicProgram::add_equality(const Vector& a, double b) {
  if (a.size() != n_) throw InvalidArgument("add_equality: dimension mismatch");
  A_.conservativeResize(A_.rows() + 1, n_);
  A_.bottomRows(1) = a.transpose();
  b_.conservativeResize(b_.size() + 1);
  b_(b_.size() - 1) = b;
}

void ConicProgram::add_inequality(const Vector& g, double h) {
  if (g.size() != n_) {
    throw InvalidArgument("add_inequality: dimension mismatch");
  }
  G_.conservativeResize(G_.rows() + 1, n_);
  G_.bottomRows(1) = g.transpose();
  h_.conservativeResize(h_.size() + 1);
  h_(h_.size() - 1) = h;
}

void ConicProgram::set_bounds(int index, double lower, double upper) {
  if (index < 0 || index >= n_) throw InvalidArgument("bound index");
  if (lower > upper) throw InvalidArgument("empty bound interval");
  lower_(index) = lower;
  upper_(index) = upper;
}

void ConicProgram::add_soc(SOC soc) {
  if (soc.c.size() != n_ || soc.D.cols() != n_ ||
      soc.D.rows() != soc.e.size()) {
    throw InvalidArgument("add_soc: dimension mismatch");
  }
  socs_.push_back(std::move(soc));
}

void ConicProgram::set_equalities(Matrix A, Vector b) {
  if (A.cols() != n_ || A.rows() != b.size()) {
    throw InvalidArgument("set_equalities: dimension mismatch");
  }
  A_ = std::move(A);
  b_ = std::move(b);
}

double ConicProgram::objective(const Vector& x) const {
  return 0.5 * x.dot(H_ * x) + q_.dot(x) + r_;
}

double ConicProgram::max_violation(const Vector& x) const {
  double v = 0.0;
  if (A_.rows() > 0) v = std::max(v, (A_ * x - b_).cwiseAbs().maxCoeff());
  if (G_.rows() > 0) v = std::max(v, (G_ * x - h_).maxCoeff());
  for (int i = 0; i < n_; ++i) {
    v = std::max(v, lower_(i) - x(i));
    v = std::max(v, x(i) - upper_(i));
  }
  for (const SOC& s : socs_) {
    v = std::max(v, (s.D * x + s.e).norm() - s.c.dot(x) - s.d);
  }
  return v;
}

void ConicProgram::validate() const {
  if (H_.rows() != n_ || H_.cols() != n_ || q_.size() != n_ ||
      A_.cols() != n_ || G_.cols() != n_ || A_.rows() != b_.size() ||
      G_.rows() != h_.size()) {
    throw InvalidArgument("conic program: inconsistent dimensions");
  }
  if (!H_.allFinite() || !q_.allFinite()) {
    throw InvalidArgument("conic program: non-finite objective data");
  }
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kNumericalFailure:
      return "numerical-failure";
  }
  return "unknown";
}

std::shared_ptr<const ConicBackend> default_backend() {
  static const auto backend = std::make_shared<const InteriorPointSolver>();
  return backend;
}

ConicSolution solve(const ConicProgram& program,
                    const SolverSettings& settings) {
  return default_backend()->solve(program, settings);
}

namespace {

nlohmann::json to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json to_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v(i))) {
      out.push_back(v(i));
    } else {
      out.push_back(nullptr);
    }
  }
  return out;
}

}  // namespace

std::string program_to_json(const ConicProgram& p) {
  nlohmann::json j;
  j["num_variables"] = p.num_variables();
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : p.blocks()) {
    blocks.push_back({{"name", b.name}, {"offset", b.offset}, {"size", b.size}});
  }
  j["blocks"] = blocks;
  j["objective"] = {{"H", to_json(p.hessian())},
                    {"q", to_json(p.linear())},
                    {"r", p.constant()}};
  j["equalities"] = {{"A", to_json(p.eq_matrix())}, {"b", to_json(p.eq_rhs())}};
  j["inequalities"] = {{"G", to_json(p.ineq_matrix())},
                       {"h", to_json(p.ineq_rhs())}};
  j["bounds"] = {{"lower", to_json(p.lower())}, {"upper", to_json(p.upper())}};
  nlohmann::json socs = nlohmann::json::array();
  for (const auto& s : p.socs()) {
    socs.push_back({{"name", s.name},
                    {"c", to_json(s.c)},
                    {"d", s.d},
                    {"D", to_json(s.D)},
                    {"e", to_json(s.e)}});
  }
  j["socs"] = socs;
  return j.dump(1);
}

}  // namespace drmpc
