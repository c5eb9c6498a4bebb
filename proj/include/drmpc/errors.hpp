#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace drmpc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (ranges, dimensions, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Too few disturbance samples for the requested confidence level.
class CalibrationInfeasible : public Error {
 public:
  CalibrationInfeasible(long required, long provided)
      : Error("calibration infeasible: " + std::to_string(provided) +
              " samples provided, at least " + std::to_string(required) +
              " required"),
        required_(required),
        provided_(provided) {}

  long required() const { return required_; }
  long provided() const { return provided_; }

 private:
  long required_;
  long provided_;
};

/// The LTI model cannot be stacked (e.g. rank-deficient E).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// A policy transform hit a singular or structurally inconsistent matrix.
class TransformError : public Error {
 public:
  using Error::Error;
};

/// Terminal ingredients could not be synthesized.
class TerminalError : public Error {
 public:
  using Error::Error;
};

/// Some terminal halfspace is tightened to a non-positive right-hand side.
class TerminalSetEmpty : public TerminalError {
 public:
  TerminalSetEmpty(const std::string& constraint, double rhs)
      : TerminalError("terminal set empty: constraint '" + constraint +
                      "' has tightened right-hand side " +
                      std::to_string(rhs)),
        constraint_(constraint) {}

  const std::string& constraint() const { return constraint_; }

 private:
  std::string constraint_;
};

/// The conic backend failed to produce a usable answer.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// The first MPC problem (lambda fixed to zero) is infeasible.
class InitializationError : public Error {
 public:
  using Error::Error;
};

/// A solve after initialization reported infeasibility. Recursive
/// feasibility rules this out, so it always indicates a defect.
class RecursiveFeasibilityViolation : public Error {
 public:
  using Error::Error;
};

/// A Monte-Carlo run failed; carries the run index and its seed.
class ExperimentError : public Error {
 public:
  ExperimentError(long run, std::uint64_t seed, const std::string& what,
                  bool initialization = false)
      : Error("run " + std::to_string(run) + " (seed " +
              std::to_string(seed) + "): " + what),
        run_(run),
        seed_(seed),
        initialization_(initialization) {}

  long run() const { return run_; }
  std::uint64_t seed() const { return seed_; }
  /// The run failed because its first problem was infeasible.
  bool initialization() const { return initialization_; }

 private:
  long run_;
  std::uint64_t seed_;
  bool initialization_;
};

}  // namespace drmpc
