#include "drmpc/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "drmpc/errors.hpp"
#include "drmpc/log.hpp"

namespace drmpc {

namespace {

// Terminal set z_N' P z_N <= alpha as sqrt(alpha) >= ||U z_N||.
ConicProgram::SOC terminal_soc(const ControllerConfig& cfg,
                               const DecisionLayout& layout) {
  const StackedModel& m = cfg.model;
  const int nx = m.nx();
  const int n = m.horizon;
  const Matrix u = psd_factor(cfg.terminal.P).transpose();
  ConicProgram::SOC soc;
  soc.name = "terminal";
  soc.c = Vector::Zero(layout.size());
  soc.d = std::sqrt(cfg.terminal.alpha);
  soc.D = Matrix::Zero(nx, layout.size());
  soc.D.middleCols(layout.z0_offset(), nx) = u * m.abar.bottomRows(nx);
  soc.D.middleCols(layout.v_offset(), layout.v_size()) =
      u * m.bbar.middleRows(n * nx, nx);
  soc.e = Vector::Zero(nx);
  return soc;
}

ConicProgram::SOC to_soc(const SOCRow& row) {
  ConicProgram::SOC soc;
  soc.name = row.spec.name;
  soc.c = row.c;
  soc.d = row.d;
  soc.D = row.D;
  soc.e = row.e;
  return soc;
}

}  // namespace

void ControllerConfig::validate() const {
  weights.validate(model.nx(), model.nu());
  if (!(lambda_penalty >= 0.0)) {
    throw InvalidArgument("lambda penalty must be nonnegative");
  }
  if (!(calib.kappa >= 1.0)) throw InvalidArgument("kappa must be >= 1");
  if (sigma_hat.sigma_hat.rows() != model.nw() ||
      sigma_hat.sigma_hat.cols() != model.nw()) {
    throw InvalidArgument("sigma_hat has wrong shape");
  }
  if (terminal.P.rows() != model.nx() || terminal.K.rows() != model.nu() ||
      terminal.K.cols() != model.nx()) {
    throw InvalidArgument("missing or malformed terminal ingredients");
  }
  if (!(terminal.alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  for (const HalfspaceSpec& h : constraints) {
    const int len = h.kind == ConstraintKind::kState ? model.n_states()
                                                     : model.n_inputs();
    if (h.normal.size() != len) {
      throw InvalidArgument("constraint '" + h.name + "' has wrong length");
    }
  }
}

Controller::Controller(ControllerConfig config) : cfg_(std::move(config)) {
  cfg_.validate();
  if (!cfg_.backend) cfg_.backend = default_backend();
  if (!is_stabilizable(cfg_.model.sys.A, cfg_.model.sys.B)) {
    log_warning("(A, B) does not look stabilizable");
  }
  S_ = sigma_n_factor(cfg_.sigma_hat.sigma_hat, cfg_.model.horizon);
  const DecisionLayout l0(cfg_.model, false);
  const DecisionLayout l1(cfg_.model, true);
  for (const HalfspaceSpec& h : cfg_.constraints) {
    rows0_.push_back(tightened_row(h, cfg_.model, l0, cfg_.calib.kappa, S_));
    rows1_.push_back(tightened_row(h, cfg_.model, l1, cfg_.calib.kappa, S_));
  }
  template0_ = make_template(false);
  template1_ = make_template(true);
}

ConicProgram Controller::make_template(bool with_lambda) const {
  const DecisionLayout layout(cfg_.model, with_lambda);
  ConicProgram p;
  p.add_variables("vbar", layout.v_size());
  if (layout.m_size() > 0) p.add_variables("m", layout.m_size());
  p.add_variables("z0", layout.nx);
  if (with_lambda) p.add_variables("lambda", 1);

  WorstCaseSecondMoment moment{cfg_.calib.kappa, cfg_.sigma_hat.sigma_hat,
                               cfg_.model.horizon};
  const SquaresObjective obj =
      trace_cost_squares(cfg_.model, layout, cfg_.weights, moment);
  p.add_squares(obj.F, obj.f);
  if (with_lambda) {
    p.set_bounds(layout.lambda_offset(), 0.0, 1.0);
    if (cfg_.lambda_penalty > 0.0) {
      Matrix f = Matrix::Zero(1, layout.size());
      f(0, layout.lambda_offset()) = std::sqrt(cfg_.lambda_penalty);
      p.add_squares(f, Vector::Zero(1));
    }
  }
  for (const SOCRow& row : with_lambda ? rows1_ : rows0_) p.add_soc(to_soc(row));
  p.add_soc(terminal_soc(cfg_, layout));
  // Equalities are patched per step; register placeholders of the right size.
  p.set_equalities(Matrix::Zero(layout.nx, layout.size()),
                   Vector::Zero(layout.nx));
  return p;
}

ConicProgram Controller::build_problem(const Vector& x,
                                       const ControllerState* state) const {
  const int nx = cfg_.model.nx();
  if (x.size() != nx) throw InvalidArgument("state has wrong dimension");
  const bool with_lambda = state != nullptr;
  const DecisionLayout layout(cfg_.model, with_lambda);
  ConicProgram p = with_lambda ? template1_ : template0_;
  Matrix A = Matrix::Zero(nx, layout.size());
  A.middleCols(layout.z0_offset(), nx).setIdentity();
  if (with_lambda) {
    // z0 = (1 - lambda) x + lambda z1  <=>  z0 + lambda (x - z1) = x
    A.col(layout.lambda_offset()) = x - state->candidate.z0;
  }
  p.set_equalities(std::move(A), x);
  return p;
}

std::vector<ConstraintSlack> Controller::slacks(const DecisionLayout& layout,
                                                const Vector& x) const {
  std::vector<ConstraintSlack> out;
  const auto& rows = layout.has_lambda ? rows1_ : rows0_;
  for (const SOCRow& row : rows) {
    out.push_back({row.spec.name, row_slack(row, x)});
  }
  const ConicProgram::SOC t = terminal_soc(cfg_, layout);
  out.push_back({"terminal", t.c.dot(x) + t.d - (t.D * x + t.e).norm()});
  return out;
}

StepResult Controller::step(const Vector& x,
                            const std::optional<ControllerState>& state) const {
  const ControllerState* prev = state ? &*state : nullptr;
  const int k = prev ? prev->k + 1 : 0;
  const DecisionLayout layout(cfg_.model, prev != nullptr);
  const ConicProgram program = build_problem(x, prev);

  ConicSolution sol = cfg_.backend->solve(program, cfg_.solver);
  bool retried = false;
  if (sol.status == SolveStatus::kNumericalFailure) {
    SolverSettings loose = cfg_.solver;
    loose.tolerance *= 10.0;
    sol = cfg_.backend->solve(program, loose);
    retried = true;
  }
  if (sol.status == SolveStatus::kInfeasible) {
    if (!prev) {
      throw InitializationError("initial problem infeasible with lambda = 0: " +
                                sol.message);
    }
    const StackedSADF cand = ef_to_sadf(prev->candidate.ef, cfg_.model);
    throw RecursiveFeasibilityViolation(
        "problem infeasible at k = " + std::to_string(k) + " (" +
        sol.message + "); shifted candidate min slack " +
        std::to_string(min_slack(cand, prev->candidate.z0)));
  }
  if (sol.status != SolveStatus::kOptimal) {
    throw SolverError("solver failed at k = " + std::to_string(k) + ": " +
                      sol.message);
  }

  StepResult out;
  ControllerState& st = out.state;
  st.k = k;
  st.sadf = layout.policy(sol.x);
  st.z0 = layout.z0(sol.x);
  st.lambda = std::clamp(layout.lambda(sol.x), 0.0, 1.0);
  st.objective = sol.objective;
  st.ef = sadf_to_ef(st.sadf, cfg_.model, cfg_.stage0);
  st.nominal = nominal_trajectory(cfg_.model, st.z0, st.sadf.vbar);
  if (st.lambda <= cfg_.lambda_zero_tol) {
    st.tau = 0;
  } else {
    st.tau = prev ? prev->tau + 1 : 0;
  }
  st.candidate =
      shift_candidate(st.ef, st.nominal, cfg_.terminal.K, cfg_.model);
  out.u = applied_input(st.ef, x, st.z0);

  StepDiagnostics& d = out.diagnostics;
  d.k = k;
  d.lambda = st.lambda;
  d.objective = st.objective;
  d.status = sol.status;
  d.u = out.u;
  d.z0 = st.z0;
  d.nominal = st.nominal;
  d.slacks = slacks(layout, sol.x);
  d.tau = st.tau;
  d.iterations = sol.iterations;
  d.solve_time_ms = sol.solve_time_ms;
  d.prediction_gap = (x - st.z0).norm();
  d.retried = retried;
  return out;
}

double Controller::evaluate_cost(const StackedSADF& policy, const Vector& z0,
                                 double lambda) const {
  WorstCaseSecondMoment moment{cfg_.calib.kappa, cfg_.sigma_hat.sigma_hat,
                               cfg_.model.horizon};
  return frobenius_cost(policy, z0, cfg_.model, cfg_.weights, moment) +
         cfg_.lambda_penalty * lambda * lambda;
}

double Controller::min_slack(const StackedSADF& policy,
                             const Vector& z0) const {
  double best = std::numeric_limits<double>::infinity();
  for (const HalfspaceSpec& h : cfg_.constraints) {
    best = std::min(best, tightened_slack(h, cfg_.model, cfg_.calib.kappa, S_,
                                          policy, z0));
  }
  const int nx = cfg_.model.nx();
  const Vector zn = nominal_trajectory(cfg_.model, z0, policy.vbar).tail(nx);
  const double term = std::sqrt(cfg_.terminal.alpha) -
                      std::sqrt(std::max(0.0, zn.dot(cfg_.terminal.P * zn)));
  return std::min(best, term);
}

double Controller::steady_cost() const {
  const LTISystem& s = cfg_.model.sys;
  return cfg_.calib.kappa *
         (cfg_.terminal.P * s.E * cfg_.sigma_hat.sigma_hat * s.E.transpose())
             .trace();
}

CostDecreaseReport Controller::cost_decrease_check(const ControllerState& at_k,
                                                   double next_optimal) const {
  const int nx = cfg_.model.nx();
  const int nu = cfg_.model.nu();
  CostDecreaseReport r;
  const StackedSADF cand = ef_to_sadf(at_k.candidate.ef, cfg_.model);
  r.candidate_cost = evaluate_cost(cand, at_k.candidate.z0, 1.0);
  r.candidate_min_slack = min_slack(cand, at_k.candidate.z0);

  const Vector z0 = at_k.nominal.head(nx);
  const Vector g0 = at_k.ef.gbar.head(nu);
  const double stage =
      z0.dot(cfg_.weights.Q * z0) + g0.dot(cfg_.weights.R * g0);
  r.bound = at_k.objective - stage + steady_cost() + cfg_.lambda_penalty;
  r.residual = r.candidate_cost - r.bound;
  r.next_optimal = next_optimal;

  const SADFPolicy toep = shift_toeplitz(at_k.sadf, at_k.nominal,
                                         cfg_.terminal.K, cfg_.model);
  const StackedSADF toep_stacked = to_stacked(toep, cfg_.model);
  r.toeplitz_candidate_cost =
      evaluate_cost(toep_stacked, at_k.candidate.z0, 1.0);
  r.toeplitz_candidate_min_slack =
      min_slack(toep_stacked, at_k.candidate.z0);
  return r;
}

}  // namespace drmpc
