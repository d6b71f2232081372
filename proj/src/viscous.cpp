#include "fwlab/viscous.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fwlab {

namespace {

CyclicTridiagonal implicit_diffusion_matrix(const PeriodicGrid& grid, double epsilon, double tau) {
  const std::size_t n = grid.size();
  const double r = epsilon * tau / (grid.spacing() * grid.spacing());
  std::vector<double> off(n, -r);
  std::vector<double> diag(n, 1.0 + 2.0 * r);
  return CyclicTridiagonal(off, diag, off);
}

}  // namespace

double energy_stable_time_step(const PeriodicGrid& grid, double epsilon, double max_abs_u0) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("energy_stable_time_step: epsilon must be > 0");
  const double m = std::max(max_abs_u0, 1e-12);
  return std::min(grid.spacing() / m, epsilon / ((m + 1.0) * (m + 1.0)));
}

ViscousStepper::ViscousStepper(const PeriodicGrid& grid, double epsilon, double tau, ViscousTerms terms)
    : grid_(grid),
      epsilon_(epsilon),
      tau_(tau),
      terms_(terms),
      helmholtz_(grid),
      implicit_(implicit_diffusion_matrix(grid, epsilon, tau)) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("ViscousStepper: epsilon must be > 0");
  if (!(tau > 0.0)) throw std::invalid_argument("ViscousStepper: tau must be > 0");
}

StateField ViscousStepper::step(const StateField& u) const {
  if (!(u.grid() == grid_)) throw std::invalid_argument("viscous_step: grid mismatch");
  const std::size_t n = grid_.size();
  const double inv_6h = 1.0 / (6.0 * grid_.spacing());
  const auto in = u.values();

  std::vector<double> rhs(in.begin(), in.end());
  if (terms_.advection) {
    for (std::size_t k = 0; k < n; ++k) {
      const double left = in[grid_.prev(k)];
      const double right = in[grid_.next(k)];
      rhs[k] -= tau_ * (left + in[k] + right) * (right - left) * inv_6h;
    }
  }
  if (terms_.nonlocal) {
    std::vector<double> v(n);
    helmholtz_.apply(in, v);
    for (std::size_t k = 0; k < n; ++k) rhs[k] -= tau_ * v[k];
  }

  StateField out(grid_, u.time() + tau_);
  implicit_.solve(rhs, out.values());
  if (!out.all_finite()) throw NumericalError("viscous_step: non-finite value", out.time());
  return out;
}

StateField viscous_step(const StateField& u, const HelmholtzSolver& solver, double epsilon, double tau) {
  if (!(solver.grid() == u.grid())) throw std::invalid_argument("viscous_step: solver grid mismatch");
  return ViscousStepper(u.grid(), epsilon, tau).step(u);
}

double dissipation_rate(const StateField& u, double epsilon) {
  const PeriodicGrid& grid = u.grid();
  const double h = grid.spacing();
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double d = (u[grid.next(k)] - u[k]) / h;
    s += d * d;
  }
  return epsilon * s * h;
}

ViscousResult run_viscous(const StateField& u0, const ViscousConfig& cfg) {
  if (!(u0.grid() == cfg.grid)) throw std::invalid_argument("run_viscous: initial field not on the configured grid");
  if (!(cfg.t_end > 0.0)) throw std::invalid_argument("run_viscous: t_end must be > 0");
  const double tau = cfg.tau > 0.0 ? cfg.tau : energy_stable_time_step(cfg.grid, cfg.epsilon, u0.max_abs());
  if (tau * u0.max_abs() > cfg.grid.spacing() * (1.0 + 1e-12)) {
    throw std::invalid_argument("run_viscous: tau violates the advective CFL bound h / max|u0|");
  }
  std::vector<double> outputs = cfg.output_times;
  if (outputs.empty()) outputs = {0.0, cfg.t_end};
  if (!std::is_sorted(outputs.begin(), outputs.end()) || outputs.front() < 0.0 || outputs.back() > cfg.t_end) {
    throw std::invalid_argument("run_viscous: output times must be sorted inside [0, t_end]");
  }

  const ViscousStepper stepper(cfg.grid, cfg.epsilon, tau);
  ViscousResult result;
  Trajectory& traj = result.trajectory;
  EnergyLedger& ledger = result.ledger;

  StateField current = u0;
  current.set_time(0.0);
  std::vector<double> v(cfg.grid.size());

  auto log_energy = [&](const StateField& u) {
    ledger.times.push_back(u.time());
    const double l2 = u.l2_norm();
    ledger.l2_half.push_back(0.5 * l2 * l2);
    ledger.dissipation.push_back(dissipation_rate(u, cfg.epsilon));
  };

  std::size_t next_output = 0;
  auto record_outputs = [&](double t) {
    while (next_output < outputs.size() && outputs[next_output] <= t + 1e-12) {
      traj.snapshots.push_back(current);
      ++next_output;
    }
  };
  record_outputs(0.0);
  traj.diagnostics.push_back(measure(current));
  log_energy(current);

  double t = 0.0;
  while (t < cfg.t_end) {
    const double target = next_output < outputs.size() ? outputs[next_output] : cfg.t_end;
    stepper.helmholtz().apply(current.values(), v);
    double work = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) work += v[k] * current[k];
    ledger.nonlocal_work.push_back(work * cfg.grid.spacing());

    const double before = ledger.l2_half.back();
    double dt = tau;
    if (target - t <= tau * (1.0 + 1e-9)) {
      dt = target - t;
      current = dt == tau ? stepper.step(current) : ViscousStepper(cfg.grid, cfg.epsilon, dt).step(current);
      t = target;
    } else {
      current = stepper.step(current);
      t += tau;
    }
    current.set_time(t);
    ++traj.steps;
    traj.diagnostics.push_back(measure(current));
    log_energy(current);
    ledger.residual.push_back(std::abs((ledger.l2_half.back() - before) / dt + ledger.dissipation.back()));
    record_outputs(t);
  }
  traj.final_time_step = tau;
  return result;
}

}  // namespace fwlab
