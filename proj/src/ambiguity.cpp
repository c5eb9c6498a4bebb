#include "drmpc/ambiguity.hpp"

#include <cmath>
#include <limits>

#include "drmpc/errors.hpp"

namespace drmpc {

namespace {

void check_beta(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw InvalidArgument("beta must lie in (0, 1)");
  }
}

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw InvalidArgument("epsilon must lie in (0, 0.5)");
  }
}

void check_spec(const SubGaussianSpec& spec) {
  if (!(spec.sigma2 > 0.0)) throw InvalidArgument("sigma2 must be positive");
  if (spec.dim < 1) throw InvalidArgument("dim must be at least 1");
}

double c1_of(double epsilon, const SubGaussianSpec& spec) {
  return spec.sigma2 / (1.0 - 2.0 * epsilon);
}

double c2_of(double beta_arg, double epsilon, const SubGaussianSpec& spec) {
  return spec.dim * std::log(1.0 + 2.0 / epsilon) + std::log(2.0 / beta_arg);
}

}  // namespace

EmpiricalCovariance estimate_covariance(const Matrix& samples) {
  if (samples.cols() == 0) throw InvalidArgument("empty sample set");
  EmpiricalCovariance out;
  out.n_samples = samples.cols();
  out.sigma_hat = samples * samples.transpose() /
                  static_cast<double>(samples.cols());
  out.sigma_hat = 0.5 * (out.sigma_hat + out.sigma_hat.transpose());
  return out;
}

EmpiricalCovariance estimate_covariance(const std::vector<Vector>& samples) {
  if (samples.empty()) throw InvalidArgument("empty sample set");
  const Eigen::Index n = samples.front().size();
  Matrix stacked(n, static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].size() != n) {
      throw InvalidArgument("inconsistent sample dimensions");
    }
    stacked.col(static_cast<Eigen::Index>(i)) = samples[i];
  }
  return estimate_covariance(stacked);
}

double concentration_gamma(long n_samples, double beta_arg, double epsilon,
                           const SubGaussianSpec& spec) {
  check_beta(beta_arg);
  check_epsilon(epsilon);
  check_spec(spec);
  if (n_samples < 1) throw InvalidArgument("n_samples must be at least 1");
  const double c1 = c1_of(epsilon, spec);
  const double c2 = c2_of(beta_arg, epsilon, spec);
  const double n = static_cast<double>(n_samples);
  return c1 * (std::sqrt(32.0 * c2 / n) + 2.0 * c2 / n);
}

double sample_bound(double beta_arg, double epsilon,
                    const SubGaussianSpec& spec) {
  check_beta(beta_arg);
  check_epsilon(epsilon);
  check_spec(spec);
  const double c1 = c1_of(epsilon, spec);
  const double c2 = c2_of(beta_arg, epsilon, spec);
  return 2.0 * c1 * c2 * (8.0 * c1 + 4.0 * std::sqrt(4.0 * c1 * c1 + c1) + 1.0);
}

long min_samples(double beta, double epsilon, const SubGaussianSpec& spec) {
  const double bound = sample_bound(beta / 2.0, epsilon, spec);
  long n = std::max(1L, static_cast<long>(std::ceil(bound)));
  // The closed form is the exact root of gamma = 1; guard against rounding.
  while (concentration_gamma(n, beta / 2.0, epsilon, spec) >= 1.0) ++n;
  while (n > 1 &&
         concentration_gamma(n - 1, beta / 2.0, epsilon, spec) < 1.0) {
    --n;
  }
  return n;
}

double optimize_epsilon(double beta, const SubGaussianSpec& spec,
                        EpsilonObjective objective, double tol) {
  check_beta(beta);
  check_spec(spec);
  const double beta_arg =
      objective == EpsilonObjective::kHalfBeta ? beta / 2.0 : beta;
  auto f = [&](double e) { return sample_bound(beta_arg, e, spec); };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 1e-4;
  double b = 0.5 - 1e-4;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

AmbiguityCalibration calibrate(double beta, const SubGaussianSpec& spec,
                               long n_samples,
                               std::optional<double> epsilon) {
  check_beta(beta);
  check_spec(spec);
  const double eps = epsilon ? *epsilon : optimize_epsilon(beta, spec);
  check_epsilon(eps);
  const long required = min_samples(beta, eps, spec);
  if (n_samples < required) throw CalibrationInfeasible(required, n_samples);

  AmbiguityCalibration out;
  out.beta = beta;
  out.epsilon = eps;
  out.n_samples = n_samples;
  out.gamma = concentration_gamma(n_samples, beta / 2.0, eps, spec);
  out.kappa = 1.0 / (1.0 - out.gamma);
  return out;
}

AmbiguityCalibration exact_moments() {
  AmbiguityCalibration out;
  out.beta = 0.0;
  out.epsilon = 0.0;
  out.n_samples = std::numeric_limits<long>::max();
  out.gamma = 0.0;
  out.kappa = 1.0;
  return out;
}

}  // namespace drmpc
