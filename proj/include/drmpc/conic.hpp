#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "drmpc/linalg.hpp"

namespace drmpc {

/// minimize   0.5 x^T H x + q^T x + r
/// subject to A x = b
///            G x <= h
///            lower <= x <= upper
///            c_i^T x + d_i >= ||D_i x + e_i||_2
class ConicProgram {
 public:
  struct Block {
    std::string name;
    int offset = 0;
    int size = 0;
  };

  struct SOC {
    std::string name;
    Vector c;
    double d = 0.0;
    Matrix D;
    Vector e;
  };

  /// Registers a named block of variables and returns its offset.
  int add_variables(const std::string& name, int size);
  int num_variables() const { return n_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  const Block& block(const std::string& name) const;

  /// Adds ||F x + f||^2 to the objective.
  void add_squares(const Matrix& F, const Vector& f);
  void add_linear(const Vector& q);
  void add_constant(double r) { r_ += r; }

  void add_equality(const Vector& a, double b);
  void add_inequality(const Vector& g, double h);
  void set_bounds(int index, double lower, double upper);
  void add_soc(SOC soc);

  /// Sets the equality rows wholesale; used to patch a cached program.
  void set_equalities(Matrix A, Vector b);

  const Matrix& hessian() const { return H_; }
  const Vector& linear() const { return q_; }
  double constant() const { return r_; }
  const Matrix& eq_matrix() const { return A_; }
  const Vector& eq_rhs() const { return b_; }
  const Matrix& ineq_matrix() const { return G_; }
  const Vector& ineq_rhs() const { return h_; }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  const std::vector<SOC>& socs() const { return socs_; }

  double objective(const Vector& x) const;

  /// Largest violation over all constraints (0 when feasible).
  double max_violation(const Vector& x) const;

  /// Throws InvalidArgument if dimensions are inconsistent.
  void validate() const;

 private:
  void grow(int extra);

  int n_ = 0;
  std::vector<Block> blocks_;
  Matrix H_;
  Vector q_;
  double r_ = 0.0;
  Matrix A_;
  Vector b_;
  Matrix G_;
  Vector h_;
  Vector lower_;
  Vector upper_;
  std::vector<SOC> socs_;
};

enum class SolveStatus { kOptimal, kInfeasible, kNumericalFailure };

const char* to_string(SolveStatus status);

struct ConicSolution {
  SolveStatus status = SolveStatus::kNumericalFailure;
  Vector x;
  double objective = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  double solve_time_ms = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  std::string message;
};

struct SolverSettings {
  double tolerance = 1e-8;
  int max_iterations = 100;
};

/// Interface every conic backend implements.
class ConicBackend {
 public:
  virtual ~ConicBackend() = default;
  virtual ConicSolution solve(const ConicProgram& program,
                              const SolverSettings& settings) const = 0;
  virtual std::string name() const = 0;
};

/// Default backend (the embedded interior-point solver).
std::shared_ptr<const ConicBackend> default_backend();

/// Convenience wrapper around default_backend().
ConicSolution solve(const ConicProgram& program,
                    const SolverSettings& settings = {});

/// JSON interchange form of a program (for cross-checking with external
/// tools). Infinite bounds are written as null.
std::string program_to_json(const ConicProgram& program);

}  // namespace drmpc
