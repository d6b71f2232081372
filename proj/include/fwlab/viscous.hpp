#pragma once

#include <vector>

#include "fwlab/godunov.hpp"
#include "fwlab/grid.hpp"
#include "fwlab/helmholtz.hpp"

namespace fwlab {

struct ViscousConfig {
  PeriodicGrid grid{1000};
  double epsilon = 1e-2;
  double t_end = 1.0;
  /// Zero selects energy_stable_time_step().
  double tau = 0.0;
  std::vector<double> output_times;
};

/// Largest step that keeps the explicit part from adding L2 energy faster than
/// the implicit diffusion removes it: min(h / M, epsilon / (M + 1)^2), M = max|u0|.
double energy_stable_time_step(const PeriodicGrid& grid, double epsilon, double max_abs_u0);

struct EnergyLedger {
  std::vector<double> times;
  std::vector<double> l2_half;      // ||u||^2 / 2
  std::vector<double> dissipation;  // epsilon ||D+ u||^2
  /// |d/dt l2_half + dissipation| by backward difference, one entry per step.
  std::vector<double> residual;
  /// <apply_nonlocal(u), u> at the start of every step.
  std::vector<double> nonlocal_work;
};

/// Options for isolating terms in tests.
struct ViscousTerms {
  bool advection = true;
  bool nonlocal = true;
};

/// Implicit diffusion, explicit advection and nonlocal source:
///   (I - eps tau D2) u_new = u - tau A(u) - tau K'*u
/// with the energy-conserving centered advection
///   A(u)_k = (u[k-1] + u[k] + u[k+1]) (u[k+1] - u[k-1]) / 6h.
class ViscousStepper {
 public:
  ViscousStepper(const PeriodicGrid& grid, double epsilon, double tau, ViscousTerms terms = {});

  StateField step(const StateField& u) const;
  double epsilon() const { return epsilon_; }
  double tau() const { return tau_; }
  const HelmholtzSolver& helmholtz() const { return helmholtz_; }

 private:
  PeriodicGrid grid_;
  double epsilon_;
  double tau_;
  ViscousTerms terms_;
  HelmholtzSolver helmholtz_;
  CyclicTridiagonal implicit_;
};

StateField viscous_step(const StateField& u, const HelmholtzSolver& solver, double epsilon, double tau);

struct ViscousResult {
  Trajectory trajectory;
  EnergyLedger ledger;
};

ViscousResult run_viscous(const StateField& u0, const ViscousConfig& cfg);

/// epsilon * ||D+ u||^2 with the forward difference.
double dissipation_rate(const StateField& u, double epsilon);

}  // namespace fwlab
