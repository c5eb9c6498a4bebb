#include "drmpc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "drmpc/errors.hpp"
#include "drmpc/log.hpp"

namespace drmpc {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t child_seed(std::uint64_t master, std::uint64_t index,
                         std::uint64_t stream) {
  return splitmix64(splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15ULL) ^
                    stream);
}

Matrix gaussian_scatter(const Matrix& factor, long n, CovarianceDraw draw,
                        Rng& rng) {
  const Eigen::Index d = factor.cols();
  if (n <= 0) return Matrix::Zero(factor.rows(), factor.rows());
  std::normal_distribution<double> normal;
  if (draw == CovarianceDraw::kExplicit || n < d) {
    Matrix xi(d, n);
    for (long j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < d; ++i) xi(i, j) = normal(rng);
    }
    const Matrix w = factor * xi;
    return w * w.transpose();
  }
  // Bartlett: sum xi xi^T ~ Wishart(I, n) = T T^T with T lower triangular,
  // T_ii^2 ~ chi2(n - i) and standard normal entries below the diagonal.
  Matrix t = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    std::chi_squared_distribution<double> chi2(static_cast<double>(n - i));
    t(i, i) = std::sqrt(chi2(rng));
    for (Eigen::Index j = 0; j < i; ++j) t(i, j) = normal(rng);
  }
  const Matrix lt = factor * t;
  return lt * lt.transpose();
}

EmpiricalCovariance draw_sigma_hat(const Matrix& sigma, long n,
                                   CovarianceDraw draw, Rng& rng) {
  if (n < 1) throw InvalidArgument("need at least one sample");
  const Matrix s = gaussian_scatter(psd_factor(sigma), n, draw, rng);
  return {s / static_cast<double>(n), n};
}

EmpiricalCovariance scenario_sigma_hat(const ScenarioConfig& cfg,
                                       std::uint64_t run, long n) {
  if (cfg.exact_moments) return {cfg.sigma_true, n};
  const Matrix factor = psd_factor(cfg.sigma_true);
  const std::uint64_t base =
      cfg.redraw == SampleRedraw::kPerRun
          ? child_seed(cfg.seed, run, kSampleStream)
          : child_seed(cfg.seed, 0, kSharedSampleStream);
  if (cfg.sampling == SamplingMode::kFresh) {
    Rng rng(child_seed(base, static_cast<std::uint64_t>(n), kSampleStream));
    return {gaussian_scatter(factor, n, cfg.draw, rng) /
                static_cast<double>(n),
            n};
  }
  std::set<long> sizes(cfg.sample_sizes.begin(), cfg.sample_sizes.end());
  sizes.insert(n);
  Rng rng(base);
  Matrix sum = Matrix::Zero(factor.rows(), factor.rows());
  long have = 0;
  for (long s : sizes) {
    if (s > n) break;
    sum += gaussian_scatter(factor, s - have, cfg.draw, rng);
    have = s;
  }
  return {sum / static_cast<double>(n), n};
}

namespace {

template <typename E>
[[noreturn]] void rethrow_at(const E& e, int k) {
  throw E("step " + std::to_string(k) + ": " + e.what());
}

StepResult checked_step(const Controller& ctl, const Vector& x,
                        const std::optional<ControllerState>& st, int k) {
  try {
    return ctl.step(x, st);
  } catch (const RecursiveFeasibilityViolation& e) {
    rethrow_at(e, k);
  } catch (const InitializationError& e) {
    rethrow_at(e, k);
  } catch (const SolverError& e) {
    rethrow_at(e, k);
  }
}

}  // namespace

RunRecord run_closed_loop(const ScenarioConfig& cfg, const Controller& ctl,
                          std::uint64_t seed) {
  const LTISystem& sys = cfg.system;
  const int nx = sys.nx();
  const int nu = sys.nu();
  const int nw = sys.nw();
  const int t_end = cfg.steps;

  RunRecord rec;
  rec.seed = seed;
  rec.kappa = ctl.config().calib.kappa;
  rec.n_samples = ctl.config().calib.n_samples;
  rec.alpha = ctl.config().terminal.alpha;
  rec.states = Matrix::Zero(t_end + 1, nx);
  rec.inputs = Matrix::Zero(t_end + 1, nu);
  rec.lambdas = Vector::Zero(t_end + 1);
  rec.taus.assign(t_end + 1, 0);
  rec.iterations.assign(t_end + 1, 0);
  rec.solve_ms = Vector::Zero(t_end + 1);
  rec.satisfied.assign(t_end + 1, 1);

  Rng rng(seed);
  std::normal_distribution<double> normal;
  const Matrix factor = psd_factor(cfg.sigma_true);

  Vector x = cfg.x0;
  std::optional<ControllerState> st;
  for (int k = 0; k <= t_end; ++k) {
    rec.states.row(k) = x.transpose();
    for (const StageHalfspace& h : cfg.constraints) {
      if (h.kind == ConstraintKind::kState && h.normal.dot(x) > h.rhs) {
        rec.satisfied[k] = 0;
      }
    }
    StepResult r = checked_step(ctl, x, st, k);
    if (cfg.check_cost_decrease && st) {
      rec.decrease.push_back(ctl.cost_decrease_check(*st, r.state.objective));
    }
    rec.inputs.row(k) = r.u.transpose();
    rec.lambdas(k) = r.state.lambda;
    rec.taus[k] = r.state.tau;
    rec.iterations[k] = r.diagnostics.iterations;
    rec.solve_ms(k) = r.diagnostics.solve_time_ms;
    rec.retries += r.diagnostics.retried ? 1 : 0;
    if (k >= 1) {
      rec.cost += x.dot(cfg.Q * x) + r.u.dot(cfg.R * r.u);
    }
    if (log_level() >= LogLevel::kDebug) {
      Json line = {{"k", k},
                   {"x", vector_to_json(x)},
                   {"u", vector_to_json(r.u)},
                   {"lambda", r.state.lambda},
                   {"tau", r.state.tau},
                   {"objective", r.state.objective},
                   {"iterations", r.diagnostics.iterations},
                   {"solve_ms", r.diagnostics.solve_time_ms}};
      log_debug(line.dump());
    }
    st = std::move(r.state);
    if (k == t_end) break;

    Vector xi(nw);
    for (int i = 0; i < nw; ++i) xi(i) = normal(rng);
    Vector w = factor * xi;
    if (cfg.unmodeled.enabled() && k == cfg.unmodeled.step) {
      w *= std::sqrt(cfg.unmodeled.multiplier);
    }
    x = sys.A * x + sys.B * rec.inputs.row(k).transpose() + sys.E * w;
  }
  return rec;
}

ControllerFactory default_factory(const ScenarioConfig& cfg) {
  const AmbiguityCalibration calib = scenario_calibration(cfg, cfg.n_samples);
  if (cfg.exact_moments || cfg.redraw == SampleRedraw::kPerExperiment) {
    const auto shared = std::make_shared<const Controller>(make_controller_config(
        cfg, calib, scenario_sigma_hat(cfg, 0, cfg.n_samples)));
    return [shared](long) { return *shared; };
  }
  return [cfg, calib](long run) {
    return Controller(make_controller_config(
        cfg, calib,
        scenario_sigma_hat(cfg, static_cast<std::uint64_t>(run),
                           cfg.n_samples)));
  };
}

namespace {

void reduce(const ScenarioConfig& cfg, std::vector<RunRecord>& records,
            SimulationReport& rep) {
  const int t_end = cfg.steps;
  const double runs = static_cast<double>(records.size());
  rep.runs = static_cast<long>(records.size());
  rep.steps = t_end;
  rep.n_samples = cfg.exact_moments ? 0 : cfg.n_samples;
  rep.lambda_penalty = cfg.lambda_penalty;
  for (const StageHalfspace& h : cfg.constraints) rep.levels.push_back(h.level);

  std::vector<long> sat(t_end + 1, 0);
  long sat0 = 0;
  long satp = 0;
  double sum = 0.0;
  double sum2 = 0.0;
  double lam = 0.0;
  double iters = 0.0;
  double ms = 0.0;
  std::vector<double> times;
  rep.decrease_checked = cfg.check_cost_decrease;
  rep.max_decrease_residual = -std::numeric_limits<double>::infinity();
  rep.max_next_minus_candidate = -std::numeric_limits<double>::infinity();
  rep.min_candidate_slack = std::numeric_limits<double>::infinity();
  for (const RunRecord& r : records) {
    sum += r.cost;
    sum2 += r.cost * r.cost;
    rep.mean_kappa += r.kappa / runs;
    rep.mean_alpha += r.alpha / runs;
    rep.retries += r.retries;
    for (int k = 0; k <= t_end; ++k) {
      sat[k] += r.satisfied[k];
      if (k >= 1) {
        if (r.taus[k - 1] == 0) {
          ++rep.count_tau0;
          sat0 += r.satisfied[k];
        } else {
          ++rep.count_tau_pos;
          satp += r.satisfied[k];
        }
      }
      const double l = std::clamp(r.lambdas(k), 0.0, 1.0);
      rep.lambda_histogram[std::min(9, static_cast<int>(l * 10.0))] += 1;
      lam += l;
      iters += r.iterations[k];
      ms += r.solve_ms(k);
      times.push_back(r.solve_ms(k));
      rep.max_solve_ms = std::max(rep.max_solve_ms, r.solve_ms(k));
      ++rep.solves;
    }
    for (const CostDecreaseReport& d : r.decrease) {
      rep.max_decrease_residual = std::max(rep.max_decrease_residual, d.residual);
      rep.max_next_minus_candidate = std::max(
          rep.max_next_minus_candidate, d.next_optimal - d.candidate_cost);
      rep.min_candidate_slack =
          std::min(rep.min_candidate_slack, d.candidate_min_slack);
    }
  }
  rep.mean_cost = sum / runs;
  if (records.size() > 1) {
    const double var = std::max(0.0, (sum2 - runs * rep.mean_cost * rep.mean_cost) /
                                         (runs - 1.0));
    rep.cost_stderr = std::sqrt(var / runs);
  }
  rep.step_satisfaction.resize(t_end + 1);
  rep.worst_case_satisfaction = 1.0;
  for (int k = 0; k <= t_end; ++k) {
    rep.step_satisfaction[k] = static_cast<double>(sat[k]) / runs;
    rep.worst_case_satisfaction =
        std::min(rep.worst_case_satisfaction, rep.step_satisfaction[k]);
  }
  rep.report_satisfaction = rep.step_satisfaction[cfg.report_step];
  if (rep.count_tau0 > 0) {
    rep.satisfaction_tau0 = static_cast<double>(sat0) / rep.count_tau0;
  }
  if (rep.count_tau_pos > 0) {
    rep.satisfaction_tau_pos = static_cast<double>(satp) / rep.count_tau_pos;
  }
  const double solves = static_cast<double>(std::max(1L, rep.solves));
  rep.mean_lambda = lam / solves;
  rep.mean_iterations = iters / solves;
  rep.mean_solve_ms = ms / solves;
  if (!times.empty()) {
    const std::size_t idx = static_cast<std::size_t>(
        std::ceil(0.95 * static_cast<double>(times.size()))) - 1;
    std::nth_element(times.begin(), times.begin() + idx, times.end());
    rep.p95_solve_ms = times[idx];
  }
  if (cfg.keep_trajectories) rep.records = std::move(records);
}

}  // namespace

SimulationReport monte_carlo(const ScenarioConfig& cfg,
                             const ControllerFactory& factory) {
  cfg.validate();
  const long runs = cfg.runs;
  int threads = cfg.threads > 0
                    ? cfg.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, static_cast<int>(std::min(runs, 256L)));

  std::vector<RunRecord> records(static_cast<std::size_t>(runs));
  std::vector<std::string> errors(static_cast<std::size_t>(runs));
  std::vector<char> at_init(static_cast<std::size_t>(runs), 0);
  std::atomic<long> next{0};
  std::atomic<bool> failed{false};

  auto worker = [&]() {
    for (;;) {
      if (failed.load()) return;
      const long r = next.fetch_add(1);
      if (r >= runs) return;
      const std::uint64_t seed =
          child_seed(cfg.seed, static_cast<std::uint64_t>(r), kNoiseStream);
      try {
        const Controller ctl = factory(r);
        RunRecord rec = run_closed_loop(cfg, ctl, seed);
        rec.run = r;
        records[static_cast<std::size_t>(r)] = std::move(rec);
      } catch (const InitializationError& e) {
        errors[static_cast<std::size_t>(r)] = e.what();
        at_init[static_cast<std::size_t>(r)] = 1;
        failed.store(true);
      } catch (const std::exception& e) {
        errors[static_cast<std::size_t>(r)] = e.what();
        failed.store(true);
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failed.load()) {
    for (long r = 0; r < runs; ++r) {
      if (!errors[static_cast<std::size_t>(r)].empty()) {
        throw ExperimentError(
            r, child_seed(cfg.seed, static_cast<std::uint64_t>(r), kNoiseStream),
            errors[static_cast<std::size_t>(r)],
            at_init[static_cast<std::size_t>(r)] != 0);
      }
    }
  }
  SimulationReport rep;
  reduce(cfg, records, rep);
  return rep;
}

SimulationReport monte_carlo(const ScenarioConfig& cfg) {
  return monte_carlo(cfg, default_factory(cfg));
}

namespace {

double first_state_level(const ScenarioConfig& cfg) {
  for (const StageHalfspace& h : cfg.constraints) {
    if (h.kind == ConstraintKind::kState) return h.level;
  }
  return 0.0;
}

void set_state_level(ScenarioConfig& cfg, double level) {
  for (StageHalfspace& h : cfg.constraints) {
    if (h.kind == ConstraintKind::kState) h.level = level;
  }
  for (TerminalHalfspace& h : cfg.terminal_halfspaces) {
    if (h.kind == ConstraintKind::kState) h.level = level;
  }
}

SweepRow run_point(const ScenarioConfig& cfg) {
  SweepRow row;
  row.n_samples = cfg.exact_moments ? 0 : cfg.n_samples;
  row.level = first_state_level(cfg);
  row.lambda_penalty = cfg.lambda_penalty;
  row.kappa = scenario_calibration(cfg, cfg.n_samples).kappa;
  log_info("experiment point: N_s = " + std::to_string(row.n_samples) +
           ", p = " + std::to_string(row.level) +
           ", c = " + std::to_string(row.lambda_penalty));
  row.report = monte_carlo(cfg);
  return row;
}

}  // namespace

std::vector<SweepRow> sweep_samples(const ScenarioConfig& cfg) {
  if (cfg.sample_sizes.empty()) throw InvalidArgument("no sample sizes");
  std::vector<SweepRow> rows;
  for (long n : cfg.sample_sizes) {
    ScenarioConfig c = cfg;
    c.n_samples = n;
    c.keep_trajectories = false;
    rows.push_back(run_point(c));
  }
  return rows;
}

std::vector<SweepRow> sweep_penalty(const ScenarioConfig& cfg) {
  if (cfg.lambda_penalties.empty()) throw InvalidArgument("no penalties");
  std::vector<SweepRow> rows;
  for (double pen : cfg.lambda_penalties) {
    ScenarioConfig c = cfg;
    c.lambda_penalty = pen;
    c.keep_trajectories = false;
    rows.push_back(run_point(c));
  }
  return rows;
}

std::vector<SweepRow> table1_experiment(const ScenarioConfig& cfg) {
  std::vector<double> levels = cfg.probabilities;
  if (levels.empty()) levels.push_back(first_state_level(cfg));
  if (cfg.sample_sizes.empty()) throw InvalidArgument("no sample sizes");
  // A cell whose first problem is infeasible is recorded, not fatal: small
  // N_s with a high level can tighten x(0) out of the feasible set.
  std::vector<SweepRow> rows;
  for (double p : levels) {
    for (long n : cfg.sample_sizes) {
      ScenarioConfig c = cfg;
      set_state_level(c, p);
      c.n_samples = n;
      c.keep_trajectories = false;
      try {
        rows.push_back(run_point(c));
      } catch (const ExperimentError& e) {
        if (!e.initialization()) throw;
        log_warning(std::string("table cell skipped: ") + e.what());
        SweepRow row;
        row.n_samples = n;
        row.level = p;
        row.lambda_penalty = c.lambda_penalty;
        row.kappa = scenario_calibration(c, n).kappa;
        row.failure = e.what();
        row.report.runs = 0;
        row.report.mean_cost = std::numeric_limits<double>::quiet_NaN();
        row.report.worst_case_satisfaction = std::numeric_limits<double>::quiet_NaN();
        row.report.report_satisfaction = std::numeric_limits<double>::quiet_NaN();
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::vector<SweepRow> table2_experiment(const ScenarioConfig& cfg) {
  if (!cfg.unmodeled.enabled()) {
    throw InvalidArgument("table2 needs an unmodeled disturbance");
  }
  return sweep_penalty(cfg);
}

Fig1Result fig1_experiment(const ScenarioConfig& cfg) {
  Fig1Result out;
  out.curve = sweep_samples(cfg);
  ScenarioConfig c = cfg;
  c.exact_moments = true;
  c.keep_trajectories = false;
  out.baseline = run_point(c);
  return out;
}

// ---------------------------------------------------------------- output

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string runs_csv(const SimulationReport& report) {
  std::ostringstream os;
  if (report.records.empty()) return "";
  const Eigen::Index nx = report.records.front().states.cols();
  const Eigen::Index nu = report.records.front().inputs.cols();
  os << "run,seed,n_samples,kappa,alpha,k";
  for (Eigen::Index i = 0; i < nx; ++i) os << ",x" << i + 1;
  for (Eigen::Index i = 0; i < nu; ++i) os << ",u" << i + 1;
  os << ",lambda,tau,iterations,satisfied,run_cost\n";
  for (const RunRecord& r : report.records) {
    for (Eigen::Index k = 0; k < r.states.rows(); ++k) {
      os << r.run << ',' << r.seed << ',' << r.n_samples << ','
         << num(r.kappa) << ',' << num(r.alpha) << ',' << k;
      for (Eigen::Index i = 0; i < nx; ++i) os << ',' << num(r.states(k, i));
      for (Eigen::Index i = 0; i < nu; ++i) os << ',' << num(r.inputs(k, i));
      os << ',' << num(r.lambdas(k)) << ',' << r.taus[k] << ','
         << r.iterations[k] << ',' << static_cast<int>(r.satisfied[k]) << ','
         << num(r.cost) << '\n';
    }
  }
  return os.str();
}

std::string summary_csv_header() {
  return "label,level,n_samples,lambda_penalty,kappa,runs,mean_cost,"
         "cost_stderr,worst_case_satisfaction,report_satisfaction,"
         "satisfaction_tau0,count_tau0,satisfaction_tau_pos,count_tau_pos,"
         "mean_lambda,mean_alpha,mean_iterations,mean_solve_ms,p95_solve_ms,"
         "max_solve_ms,retries,max_decrease_residual,"
         "max_next_minus_candidate,step_satisfaction,failure";
}

std::string summary_csv_row(const std::string& label, const SweepRow& row) {
  const SimulationReport& r = row.report;
  std::ostringstream os;
  os << label << ',' << num(row.level) << ',' << row.n_samples << ','
     << num(row.lambda_penalty) << ',' << num(row.kappa) << ',' << r.runs
     << ',' << num(r.mean_cost) << ',' << num(r.cost_stderr) << ','
     << num(r.worst_case_satisfaction) << ',' << num(r.report_satisfaction)
     << ',' << num(r.satisfaction_tau0) << ',' << r.count_tau0 << ','
     << num(r.satisfaction_tau_pos) << ',' << r.count_tau_pos << ','
     << num(r.mean_lambda) << ',' << num(r.mean_alpha) << ','
     << num(r.mean_iterations) << ',' << num(r.mean_solve_ms) << ','
     << num(r.p95_solve_ms) << ',' << num(r.max_solve_ms) << ',' << r.retries
     << ',';
  if (r.decrease_checked) {
    os << num(r.max_decrease_residual) << ','
       << num(r.max_next_minus_candidate);
  } else {
    os << ',';
  }
  // Per-step rates joined with ';' so the column count stays fixed.
  os << ',';
  for (std::size_t k = 0; k < r.step_satisfaction.size(); ++k) {
    if (k) os << ';';
    os << num(r.step_satisfaction[k]);
  }
  // Error text with separators flattened so the row stays one CSV record.
  std::string failure = row.failure;
  std::replace_if(
      failure.begin(), failure.end(),
      [](char ch) { return ch == ',' || ch == '\n' || ch == '"'; }, ' ');
  os << ',' << failure << '\n';
  return os.str();
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = summary_csv_header() + "\n";
  for (const SweepRow& r : rows) out += summary_csv_row("point", r);
  return out;
}

std::string fig1_csv(const Fig1Result& result) {
  std::ostringstream os;
  os << "kind,n_samples,kappa,mean_cost,cost_stderr,worst_case_satisfaction\n";
  for (const SweepRow& r : result.curve) {
    os << "data," << r.n_samples << ',' << num(r.kappa) << ','
       << num(r.report.mean_cost) << ',' << num(r.report.cost_stderr) << ','
       << num(r.report.worst_case_satisfaction) << '\n';
  }
  const SweepRow& b = result.baseline;
  os << "baseline,," << num(b.kappa) << ',' << num(b.report.mean_cost) << ','
     << num(b.report.cost_stderr) << ','
     << num(b.report.worst_case_satisfaction) << '\n';
  return os.str();
}

Json report_to_json(const SimulationReport& r, bool with_records) {
  Json j = {{"runs", r.runs},
            {"steps", r.steps},
            {"n_samples", r.n_samples},
            {"lambda_penalty", r.lambda_penalty},
            {"levels", r.levels},
            {"mean_cost", r.mean_cost},
            {"cost_stderr", r.cost_stderr},
            {"step_satisfaction", r.step_satisfaction},
            {"worst_case_satisfaction", r.worst_case_satisfaction},
            {"report_satisfaction", r.report_satisfaction},
            {"satisfaction_tau0", r.satisfaction_tau0},
            {"count_tau0", r.count_tau0},
            {"satisfaction_tau_pos", r.satisfaction_tau_pos},
            {"count_tau_pos", r.count_tau_pos},
            {"lambda_histogram", r.lambda_histogram},
            {"mean_lambda", r.mean_lambda},
            {"mean_kappa", r.mean_kappa},
            {"mean_alpha", r.mean_alpha},
            {"solves", r.solves},
            {"retries", r.retries},
            {"mean_iterations", r.mean_iterations},
            {"mean_solve_ms", r.mean_solve_ms},
            {"p95_solve_ms", r.p95_solve_ms},
            {"max_solve_ms", r.max_solve_ms}};
  if (r.decrease_checked) {
    j["max_decrease_residual"] = r.max_decrease_residual;
    j["max_next_minus_candidate"] = r.max_next_minus_candidate;
    j["min_candidate_slack"] = r.min_candidate_slack;
  }
  if (with_records) {
    Json recs = Json::array();
    for (const RunRecord& rec : r.records) {
      Json states = Json::array();
      for (Eigen::Index k = 0; k < rec.states.rows(); ++k) {
        states.push_back(vector_to_json(rec.states.row(k).transpose()));
      }
      Json inputs = Json::array();
      for (Eigen::Index k = 0; k < rec.inputs.rows(); ++k) {
        inputs.push_back(vector_to_json(rec.inputs.row(k).transpose()));
      }
      std::vector<int> sat(rec.satisfied.begin(), rec.satisfied.end());
      recs.push_back({{"run", rec.run},
                      {"seed", rec.seed},
                      {"kappa", rec.kappa},
                      {"alpha", rec.alpha},
                      {"cost", rec.cost},
                      {"states", states},
                      {"inputs", inputs},
                      {"lambda", vector_to_json(rec.lambdas)},
                      {"tau", rec.taus},
                      {"iterations", rec.iterations},
                      {"satisfied", sat}});
    }
    j["records"] = recs;
  }
  return j;
}

Json sweep_to_json(const std::vector<SweepRow>& rows) {
  Json out = Json::array();
  for (const SweepRow& r : rows) {
    out.push_back({{"n_samples", r.n_samples},
                   {"level", r.level},
                   {"lambda_penalty", r.lambda_penalty},
                   {"kappa", r.kappa},
                   {"report", report_to_json(r.report, false)}});
    if (!r.failure.empty()) out.back()["failure"] = r.failure;
  }
  return out;
}

}  // namespace drmpc
