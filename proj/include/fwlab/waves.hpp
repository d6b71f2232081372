#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fwlab/godunov.hpp"
#include "fwlab/grid.hpp"

namespace fwlab {

/// c_n = 1 / (1 + (2 pi n)^2): speed at which the n-th mode branches off V = 0.
double bifurcation_speed(int n_mode);

/// Same threshold for the central-difference operator on `grid`.
double discrete_bifurcation_speed(int n_mode, const PeriodicGrid& grid);

/// Periodic traveling-wave profile for speed c.
///
/// V solves V - V'' + c - sqrt(c^2 + 2V) = 0 (periodic central differences) and
/// the wave profile is recovered on the negative root U = c - sqrt(c^2 + 2V).
struct WaveProfile {
  double c = 0.0;
  PeriodicGrid grid{1000};
  std::vector<double> V;
  std::vector<double> U;
  double discriminant_min = 0.0;  // min_k (c^2 + 2 V_k)
  double residual = 0.0;          // max-norm residual of the V equation
  int newton_iterations = 0;

  double amplitude() const;  // max U - min U
  StateField profile_field() const { return StateField(grid, U); }
};

enum class WaveStatus { converged, trivial_branch, diverged };

struct WaveSolution {
  WaveStatus status = WaveStatus::diverged;
  std::optional<WaveProfile> profile;
  double residual = 0.0;
  int iterations = 0;
  std::string message;
};

struct NewtonOptions {
  double tolerance = 1e-12;
  int max_iterations = 60;
  /// Converged profiles with max|V| below this count as the trivial branch.
  double trivial_amplitude = 1e-9;
};

/// Max-norm residual of the discrete V equation.
double wave_equation_residual(double c, const PeriodicGrid& grid, const std::vector<double>& V);

/// Residual of -cU + U^2/2 + (1 - D2)^{-1} U = 0 using the Helmholtz matrix.
double profile_equation_residual(const WaveProfile& profile);

/// Damped Newton solve. Steps that would make c^2 + 2V non-positive are
/// backtracked, so the square root is never evaluated out of its domain.
WaveSolution solve_wave(double c, const std::vector<double>& seed, const PeriodicGrid& grid,
                        const NewtonOptions& options = {});
WaveSolution solve_wave(double c, const WaveProfile& seed, const NewtonOptions& options = {});

/// amplitude * cos(2 pi x), a seed for the first branch near c_1.
std::vector<double> cosine_seed(const PeriodicGrid& grid, double amplitude);

/// Nontrivial solution at `c` reached by continuing from just above c_1.
WaveProfile branch_profile(double c, const PeriodicGrid& grid);

class ContinuationStall : public std::runtime_error {
 public:
  ContinuationStall(const std::string& what, double last_c) : std::runtime_error(what), last_c_(last_c) {}
  double last_c() const { return last_c_; }

 private:
  double last_c_;
};

/// Natural-parameter continuation: `steps` equally spaced speeds from c_start
/// to c_stop, each seeded with the previous solution; failed steps are halved.
std::vector<WaveProfile> continue_branch(double c_start, double c_stop, int steps, const WaveProfile& seed,
                                         double min_step = 1e-7);
std::vector<WaveProfile> continue_branch(double c_start, double c_stop, int steps, const PeriodicGrid& grid);

/// Ratio below which min(c^2 + 2V) / c^2 counts as the peakon limit.
inline constexpr double kPeakonDiscriminantRatio = 1e-4;

struct BranchEndpoints {
  double lower = 0.0;  // lowest c with a nontrivial solution found
  double upper = 0.0;  // first c with discriminant_min < 1e-4 c^2, or last converged c
  bool upper_by_discriminant = false;
  std::vector<WaveProfile> upper_profiles;
};

/// Walks the branch downward until it collapses onto V = 0, and upward until
/// the discriminant closes or continuation stalls.
BranchEndpoints branch_endpoints(const WaveProfile& start, double resolution = 1e-6);

/// Jacobian of the discrete V equation at V = 0 for speed c: smallest
/// eigenvalue magnitude relative to the largest.
double trivial_jacobian_relative_gap(double c, const PeriodicGrid& grid);

// ---------------------------------------------------------------------------
// Time evolution of a wave profile

enum class Disturbance { none, cos2, cos3, cos4, asymmetric };

Disturbance parse_disturbance(const std::string& name);
std::string to_string(Disturbance d);
double disturbance_value(Disturbance d, double x);

struct OrbitSample {
  std::size_t step = 0;
  double t = 0.0;
  double u_a = 0.0;
  double u_b = 0.0;
};

struct WaveEvolution {
  Trajectory trajectory;
  std::vector<OrbitSample> orbit;
  std::size_t probe_a = 300;
  std::size_t probe_b = 600;
  double delta = 0.0;
};

/// Probe cells 300 and 600 of 1000, scaled proportionally for other grids.
std::pair<std::size_t, std::size_t> orbit_probe_cells(const PeriodicGrid& grid);

/// delta = delta_fraction * (max U - min U).
WaveEvolution evolve_wave_as_initial_data(const WaveProfile& profile, double t_end, Disturbance disturbance,
                                          double delta_fraction, double snapshot_dt = 1.0);

/// U(x - shift) by periodic linear interpolation.
StateField translated_profile(const WaveProfile& profile, double shift);

/// Max over `points` of the distance to the closest point on the polyline
/// through `curve`.
double max_distance_to_curve(const std::vector<OrbitSample>& points, const std::vector<OrbitSample>& curve);

// ---------------------------------------------------------------------------
// Phase-plane shooting for single-shock traveling waves

struct PhaseSample {
  double x = 0.0;
  double Y = 0.0;
  double Z = 0.0;
};

enum class ShootStatus { reached_end, no_return, singular_crossing, integrator_failure };

struct PhaseTrajectory {
  double beta = 0.0;
  std::vector<PhaseSample> samples;
  std::vector<double> zero_crossings;  // x where Y changed sign through the origin
  ShootStatus status = ShootStatus::reached_end;
  double end_x = 0.0;
  /// (Y(1) + Y(0), Z(1) - Z(0)); meaningful only when status == reached_end.
  double residual_y = 0.0;
  double residual_z = 0.0;
  double residual_norm() const;
};

struct ShootOptions {
  double y_max = 1e3;
  double rel_tol = 1e-11;
  double abs_tol = 1e-12;
  std::size_t samples = 1001;
  /// |Z| below this at Y = 0 is treated as passing through the origin.
  double crossing_tolerance = 1e-6;
};

/// Integrates Y Y' = Z, Z' = Y^2/2 + Y - beta over [0,1] in the regular
/// variables W = Y^2/2, sign(Y).
PhaseTrajectory phase_shoot(double beta, double y0, double z0, const ShootOptions& options = {});

/// Equilibria (-1 +/- sqrt(2 beta + 1), 0); empty when 2 beta + 1 < 0.
std::vector<double> phase_equilibria(double beta);

struct PhaseScanResult {
  double beta = 0.0;
  std::size_t attempted = 0;
  std::size_t reached_end = 0;
  double min_residual = 0.0;  // over trajectories that reached x = 1
  double best_y0 = 0.0;
  double best_z0 = 0.0;
};

/// Shooting over a y_count x z_count lattice of starting points in
/// [-y_span, y_span] x [-z_span, z_span], skipping y0 = 0.
PhaseScanResult phase_scan(double beta, std::size_t y_count, std::size_t z_count, double y_span, double z_span,
                           const ShootOptions& options = {});

}  // namespace fwlab
