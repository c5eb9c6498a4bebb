#pragma once

#include <vector>

#include "drmpc/prediction_model.hpp"

namespace drmpc {

/// u = vbar + Mbar wbar with block-Toeplitz Mbar built from M_1..M_{N-1}.
struct SADFPolicy {
  Vector vbar;
  std::vector<Matrix> m_blocks;  // m_blocks[d - 1] = M_d
};

/// SADF pair with an arbitrary strictly block-lower-triangular Mbar.
struct StackedSADF {
  Vector vbar;
  Matrix mbar;  // N nu x N nw
};

/// u_t = g_t + sum_{i<=t} K(t, i) (x_i - z_i). `gbar` is the nominal input,
/// so z = abar z0 + bbar gbar. `kbar` is N nu x (N+1) nx with a zero last
/// block column; it is block-Toeplitz when produced from an SADF policy.
struct ErrorFeedbackPolicy {
  Vector gbar;
  Matrix kbar;
};

/// How the stage-0 gain K_0 is chosen. It multiplies x_0 - z_0, which is
/// zero in prediction, so both choices give the same predicted trajectories
/// and only differ in the input applied to the plant.
enum class Stage0Gain {
  kToeplitz,       // complete the Toeplitz pattern: K_0 = M_1 E^+
  kPseudoInverse,  // literal Moore-Penrose transform, first column zero
};

Matrix assemble_mbar(const SADFPolicy& policy, const StackedModel& model);
StackedSADF to_stacked(const SADFPolicy& policy, const StackedModel& model);

/// Extracts M_1..M_{N-1} from the first block column. Throws
/// TransformError if Mbar deviates from the Toeplitz pattern by more than
/// tol.
SADFPolicy to_toeplitz(const StackedSADF& policy, const StackedModel& model,
                       double tol = 1e-9);

/// Toeplitz gains K_0..K_{N-1} that reproduce the disturbance response of
/// the SADF blocks.
std::vector<Matrix> toeplitz_gains(const SADFPolicy& policy,
                                   const StackedModel& model);

ErrorFeedbackPolicy sadf_to_ef(const SADFPolicy& policy,
                               const StackedModel& model,
                               Stage0Gain stage0 = Stage0Gain::kToeplitz);
ErrorFeedbackPolicy sadf_to_ef(const StackedSADF& policy,
                               const StackedModel& model);

/// Mbar = K (I - bbar K)^{-1} ebar, vbar = gbar.
StackedSADF ef_to_sadf(const ErrorFeedbackPolicy& policy,
                       const StackedModel& model);

/// Offset of the equivalent state-feedback law u = g_sf + K xbar:
/// (I + Mbar E^+ B)^{-1} (vbar - Mbar E^+ abar z0).
Vector state_feedback_offset(const StackedSADF& policy,
                             const StackedModel& model, const Vector& z0);

/// Nominal input of the error-feedback law that corresponds to the
/// state-feedback offset g_sf: K (I - bbar K)^{-1} (abar z0 + bbar g_sf) + g_sf.
Vector nominal_input_from_state_feedback(const Vector& g_sf,
                                         const Matrix& kbar,
                                         const StackedModel& model,
                                         const Vector& z0);

/// Shifted candidate for the next time step, lambda = 1.
struct ShiftedCandidate {
  ErrorFeedbackPolicy ef;
  Vector z0;
  Vector nominal;
  double lambda = 1.0;
};

/// Drops stage 0 of the previous error-feedback policy and appends the
/// terminal controller u = K x.
ShiftedCandidate shift_candidate(const ErrorFeedbackPolicy& prev,
                                 const Vector& prev_nominal,
                                 const Matrix& terminal_gain,
                                 const StackedModel& model);

/// Shift that keeps the Toeplitz blocks: v = (v_1, ..., v_{N-1}, K z_N),
/// M unchanged. Representable in the optimization problem.
SADFPolicy shift_toeplitz(const SADFPolicy& prev, const Vector& prev_nominal,
                          const Matrix& terminal_gain,
                          const StackedModel& model);

/// u = g_0 + K_0 (x - z0)
Vector applied_input(const ErrorFeedbackPolicy& policy, const Vector& x,
                     const Vector& z0);

/// State and input trajectories of the SADF policy for a disturbance
/// sequence, from x_0 = z0.
struct Trajectory {
  Vector x;
  Vector u;
};
Trajectory simulate_sadf(const StackedSADF& policy, const StackedModel& model,
                         const Vector& x0, const Vector& wbar);
Trajectory simulate_ef(const ErrorFeedbackPolicy& policy,
                       const StackedModel& model, const Vector& x0,
                       const Vector& z0, const Vector& wbar);

}  // namespace drmpc
