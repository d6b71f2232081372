#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fwlab/grid.hpp"
#include "fwlab/helmholtz.hpp"

namespace fwlab {

/// Raised when a run cannot continue (NaN, unrecoverable CFL violation).
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double time)
      : std::runtime_error(what + " at t=" + std::to_string(time)), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Exact Riemann flux for f(u) = u^2/2.
double godunov_flux(double u_left, double u_right);

struct GodunovConfig {
  PeriodicGrid grid{1000};
  /// Typical size of the data; fixes tau = cfl_factor * h / q.
  double q = 1.0;
  double t_end = 1.0;
  std::vector<double> output_times;
  double cfl_factor = 0.4;
  /// Off: plain inviscid Burgers.
  bool nonlocal = true;

  double time_step() const;
  void validate() const;
};

/// Evenly spaced output times 0, dt, 2dt, ..., including t_end.
std::vector<double> uniform_times(double t_end, double dt);

struct StepDiagnostics {
  double t = 0.0;
  double max = 0.0;
  double min = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double mass = 0.0;
};

StepDiagnostics measure(const StateField& u);

struct Trajectory {
  std::vector<StateField> snapshots;
  std::vector<StepDiagnostics> diagnostics;
  /// Time step in force at the end of the run (after any CFL halving).
  double final_time_step = 0.0;
  std::size_t steps = 0;
};

/// Called after every accepted step with the new state.
using StepObserver = std::function<void(const StateField&)>;

/// One forward step: conservative Godunov update of the Burgers flux plus the
/// nonlocal term as an explicit source. `solver` may be null (Burgers only).
StateField step(const StateField& u, const HelmholtzSolver* solver, double tau);

/// Same as above, writing into `out` and using `scratch` for the nonlocal term.
void step_into(const StateField& u, const HelmholtzSolver* solver, double tau, StateField& out,
               std::vector<double>& scratch);

Trajectory run(const StateField& u0, const GodunovConfig& cfg, const StepObserver& observer = {});

}  // namespace fwlab
