#include "fwlab/godunov.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace fwlab {

namespace {

inline double burgers_flux(double u) { return 0.5 * u * u; }

// Successive step halvings allowed before the run is abandoned.
constexpr int kMaxHalvings = 30;

}  // namespace

double godunov_flux(double u_left, double u_right) {
  if (u_left >= u_right) {
    return std::max(burgers_flux(u_left), burgers_flux(u_right));
  }
  if (u_left >= 0.0) return burgers_flux(u_left);
  if (u_right <= 0.0) return burgers_flux(u_right);
  return 0.0;  // transonic rarefaction, sonic point u = 0
}

double GodunovConfig::time_step() const { return cfl_factor * grid.spacing() / q; }

void GodunovConfig::validate() const {
  if (!(q > 0.0) || !std::isfinite(q)) throw std::invalid_argument("GodunovConfig: q must be > 0");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw std::invalid_argument("GodunovConfig: t_end must be > 0");
  }
  if (!(cfl_factor > 0.0 && cfl_factor <= 1.0)) {
    throw std::invalid_argument("GodunovConfig: cfl_factor must lie in (0,1]");
  }
  if (!std::is_sorted(output_times.begin(), output_times.end())) {
    throw std::invalid_argument("GodunovConfig: output_times must be sorted");
  }
  for (double t : output_times) {
    if (t < 0.0 || t > t_end) throw std::invalid_argument("GodunovConfig: output time outside [0, t_end]");
  }
}

std::vector<double> uniform_times(double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end > 0.0)) throw std::invalid_argument("uniform_times: need dt, t_end > 0");
  std::vector<double> times;
  const auto count = static_cast<std::size_t>(std::floor(t_end / dt + 1e-9));
  for (std::size_t i = 0; i <= count; ++i) times.push_back(std::min(t_end, static_cast<double>(i) * dt));
  if (t_end - times.back() > 1e-9 * dt) times.push_back(t_end);
  return times;
}

StepDiagnostics measure(const StateField& u) {
  return {u.time(), u.max(), u.min(), u.l1_norm(), u.l2_norm(), u.mass()};
}

void step_into(const StateField& u, const HelmholtzSolver* solver, double tau, StateField& out,
               std::vector<double>& scratch) {
  const PeriodicGrid& grid = u.grid();
  const std::size_t n = grid.size();
  const double h = grid.spacing();
  if (!(out.grid() == grid)) throw std::invalid_argument("step: output grid mismatch");
  if (tau * u.max_abs() > h) {
    throw NumericalError("step: CFL number exceeds 1", u.time());
  }

  const auto in = u.values();
  auto next = out.values();
  const double ratio = tau / h;

  // flux through the left interface of cell k
  double left = godunov_flux(in[n - 1], in[0]);
  const double first_left = left;
  for (std::size_t k = 0; k < n; ++k) {
    const double right = k + 1 == n ? first_left : godunov_flux(in[k], in[k + 1]);
    next[k] = in[k] - ratio * (right - left);
    left = right;
  }

  if (solver != nullptr) {
    if (!(solver->grid() == grid)) throw std::invalid_argument("step: solver grid mismatch");
    scratch.resize(n);
    solver->apply(in, scratch);
    for (std::size_t k = 0; k < n; ++k) next[k] -= tau * scratch[k];
  }

  out.set_time(u.time() + tau);
  if (!out.all_finite()) throw NumericalError("step: non-finite value", out.time());
}

StateField step(const StateField& u, const HelmholtzSolver* solver, double tau) {
  StateField out(u.grid(), u.time());
  std::vector<double> scratch;
  step_into(u, solver, tau, out, scratch);
  return out;
}

Trajectory run(const StateField& u0, const GodunovConfig& cfg, const StepObserver& observer) {
  cfg.validate();
  if (!(u0.grid() == cfg.grid)) throw std::invalid_argument("run: initial field not on the configured grid");

  std::vector<double> outputs = cfg.output_times;
  if (outputs.empty()) outputs = {0.0, cfg.t_end};

  std::optional<HelmholtzSolver> solver;
  if (cfg.nonlocal) solver.emplace(cfg.grid);
  const HelmholtzSolver* op = solver ? &*solver : nullptr;

  Trajectory traj;
  StateField current = u0;
  current.set_time(0.0);
  StateField next(cfg.grid);
  std::vector<double> scratch;

  const double h = cfg.grid.spacing();
  const double base_tau = cfg.time_step();
  double tau = base_tau;
  int halvings = 0;

  std::size_t next_output = 0;
  auto record_outputs = [&](double t) {
    while (next_output < outputs.size() && outputs[next_output] <= t + 1e-12) {
      traj.snapshots.push_back(current);
      ++next_output;
    }
  };
  record_outputs(0.0);
  traj.diagnostics.push_back(measure(current));

  double t = 0.0;
  while (t < cfg.t_end) {
    while (tau * current.max_abs() > cfg.cfl_factor * h) {
      if (++halvings > kMaxHalvings) throw NumericalError("run: CFL violation not recoverable", t);
      tau *= 0.5;
    }
    const double target = next_output < outputs.size() ? outputs[next_output] : cfg.t_end;
    double dt = tau;
    bool lands = false;
    if (target - t <= tau * (1.0 + 1e-9)) {
      dt = target - t;
      lands = true;
    }
    step_into(current, op, dt, next, scratch);
    std::swap(current, next);
    t = lands ? target : t + dt;
    current.set_time(t);
    ++traj.steps;
    traj.diagnostics.push_back(measure(current));
    if (observer) observer(current);
    record_outputs(t);
  }
  traj.final_time_step = tau;
  return traj;
}

}  // namespace fwlab
