#include "drmpc/tightening.hpp"

#include <cmath>

#include "drmpc/errors.hpp"

namespace drmpc {

std::vector<HalfspaceSpec> lift_halfspaces(
    const std::vector<StageHalfspace>& stage_specs,
    const StackedModel& model) {
  const int n = model.horizon;
  std::vector<HalfspaceSpec> out;
  for (std::size_t r = 0; r < stage_specs.size(); ++r) {
    const StageHalfspace& s = stage_specs[r];
    const bool state = s.kind == ConstraintKind::kState;
    const int dim = state ? model.nx() : model.nu();
    if (s.normal.size() != dim) {
      throw InvalidArgument("halfspace '" + s.name + "' has wrong dimension");
    }
    if (!(s.rhs > 0.0)) {
      throw InvalidArgument("halfspace '" + s.name +
                            "' needs a positive right-hand side");
    }
    tightening_factor(s.level);
    const int last = s.last_stage < 0 ? n - 1 : std::min(s.last_stage, n - 1);
    for (int t = std::max(0, s.first_stage); t <= last; ++t) {
      HalfspaceSpec h;
      h.kind = s.kind;
      h.level = s.level;
      h.stage = t;
      h.index = static_cast<int>(r);
      h.name = s.name + "@" + std::to_string(t);
      h.normal = Vector::Zero(state ? model.n_states() : model.n_inputs());
      h.normal.segment(t * dim, dim) = s.normal / s.rhs;
      out.push_back(std::move(h));
    }
  }
  return out;
}

double tightening_factor(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw InvalidArgument("probability level must lie in (0, 1)");
  }
  return std::sqrt(level / (1.0 - level));
}

Matrix sigma_n_factor(const Matrix& sigma_hat, int horizon) {
  return block_diag_repeat(psd_factor(sigma_hat), horizon);
}

SOCRow state_row(const HalfspaceSpec& h, const StackedModel& model,
                 const DecisionLayout& layout, double kappa, const Matrix& S) {
  if (h.kind != ConstraintKind::kState) {
    throw InvalidArgument("state_row needs a state halfspace");
  }
  const double scale = std::sqrt(kappa) * tightening_factor(h.level);
  SOCRow row;
  row.spec = h;
  row.c = Vector::Zero(layout.size());
  row.c.segment(layout.v_offset(), layout.v_size()) =
      -(model.bbar.transpose() * h.normal);
  row.c.segment(layout.z0_offset(), layout.nx) =
      -(model.abar.transpose() * h.normal);
  row.d = 1.0;

  const Vector a = model.bbar.transpose() * h.normal;
  row.D = Matrix::Zero(S.cols(), layout.size());
  row.D.middleCols(layout.m_offset(), layout.m_size()) =
      scale * S.transpose() * layout.mbar_transpose_map(a);
  row.e = scale * S.transpose() * (model.ebar.transpose() * h.normal);
  return row;
}

SOCRow input_row(const HalfspaceSpec& l, const StackedModel& model,
                 const DecisionLayout& layout, double kappa, const Matrix& S) {
  (void)model;
  if (l.kind != ConstraintKind::kInput) {
    throw InvalidArgument("input_row needs an input halfspace");
  }
  const double scale = std::sqrt(kappa) * tightening_factor(l.level);
  SOCRow row;
  row.spec = l;
  row.c = Vector::Zero(layout.size());
  row.c.segment(layout.v_offset(), layout.v_size()) = -l.normal;
  row.d = 1.0;
  row.D = Matrix::Zero(S.cols(), layout.size());
  row.D.middleCols(layout.m_offset(), layout.m_size()) =
      scale * S.transpose() * layout.mbar_transpose_map(l.normal);
  row.e = Vector::Zero(S.cols());
  return row;
}

SOCRow tightened_row(const HalfspaceSpec& spec, const StackedModel& model,
                     const DecisionLayout& layout, double kappa,
                     const Matrix& S) {
  return spec.kind == ConstraintKind::kState
             ? state_row(spec, model, layout, kappa, S)
             : input_row(spec, model, layout, kappa, S);
}

double row_slack(const SOCRow& row, const Vector& x) {
  return row.c.dot(x) + row.d - (row.D * x + row.e).norm();
}

double tightened_slack(const HalfspaceSpec& spec, const StackedModel& model,
                       double kappa, const Matrix& S, const StackedSADF& policy,
                       const Vector& z0) {
  const double scale = std::sqrt(kappa) * tightening_factor(spec.level);
  if (spec.kind == ConstraintKind::kState) {
    const Vector z = nominal_trajectory(model, z0, policy.vbar);
    const Matrix resp = model.bbar * policy.mbar + model.ebar;
    return 1.0 - spec.normal.dot(z) -
           scale * (S.transpose() * (resp.transpose() * spec.normal)).norm();
  }
  return 1.0 - spec.normal.dot(policy.vbar) -
         scale *
             (S.transpose() * (policy.mbar.transpose() * spec.normal)).norm();
}

}  // namespace drmpc
