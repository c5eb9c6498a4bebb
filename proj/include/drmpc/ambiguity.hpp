#pragma once

#include <optional>
#include <vector>

#include "drmpc/linalg.hpp"

namespace drmpc {

struct SubGaussianSpec {
  double sigma2 = 1.0;  // variance proxy
  int dim = 1;          // n_w
};

struct EmpiricalCovariance {
  Matrix sigma_hat;
  long n_samples = 0;
};

struct AmbiguityCalibration {
  double beta = 0.05;
  double epsilon = 0.0;
  long n_samples = 0;
  double gamma = 0.0;  // evaluated at beta / 2
  double kappa = 1.0;
};

/// Which confidence argument enters c2 in the sample-size objective that
/// is minimized over epsilon.
enum class EpsilonObjective {
  kPrintedBeta,  // log(2 / beta), as the objective is printed
  kHalfBeta,     // log(4 / beta), consistent with the sample bound
};

/// Second moment without mean subtraction. `samples` holds one sample per
/// column.
EmpiricalCovariance estimate_covariance(const Matrix& samples);
EmpiricalCovariance estimate_covariance(const std::vector<Vector>& samples);

/// Concentration radius c1 (sqrt(32 c2 / N) + 2 c2 / N).
double concentration_gamma(long n_samples, double beta_arg, double epsilon,
                           const SubGaussianSpec& spec);

/// Closed-form right-hand side of the sample bound, c2 taken at beta_arg.
double sample_bound(double beta_arg, double epsilon,
                    const SubGaussianSpec& spec);

/// Smallest N with gamma(N, beta / 2) < 1.
long min_samples(double beta, double epsilon, const SubGaussianSpec& spec);

/// Golden-section minimizer of the sample bound over (1e-4, 0.5 - 1e-4).
double optimize_epsilon(
    double beta, const SubGaussianSpec& spec,
    EpsilonObjective objective = EpsilonObjective::kPrintedBeta,
    double tol = 1e-6);

/// kappa = 1 / (1 - gamma(N, beta / 2)). Uses the optimal epsilon unless one
/// is given. Throws CalibrationInfeasible if n_samples is too small.
AmbiguityCalibration calibrate(double beta, const SubGaussianSpec& spec,
                               long n_samples,
                               std::optional<double> epsilon = std::nullopt);

/// Calibration with kappa = 1 (exact moment information).
AmbiguityCalibration exact_moments();

}  // namespace drmpc
