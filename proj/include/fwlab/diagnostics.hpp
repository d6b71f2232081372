#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fwlab/godunov.hpp"
#include "fwlab/grid.hpp"

namespace fwlab {

// ---------------------------------------------------------------------------
// Shock detection and tracking

/// One-sided values are sampled this many cells beyond the two cells adjacent
/// to the detected interface; with the nonlocal source the upstream side of a
/// Godunov shock is smeared over about five cells.
inline constexpr std::size_t kShockSampleOffset = 5;

struct ShockRecord {
  double t = 0.0;
  /// Interface coordinate (k + 1/2) h, reduced to [0,1).
  double position = 0.0;
  std::size_t interface_cell = 0;  // k: the interface sits between k and k+1
  double u_minus = 0.0;
  double u_plus = 0.0;
  double jump = 0.0;  // u_minus - u_plus
  std::size_t sample_offset = kShockSampleOffset;
  std::optional<double> speed_fit;

  double rankine_hugoniot_speed() const { return 0.5 * (u_minus + u_plus); }
};

/// Default detection threshold: a quarter of the oscillation max - min of u0.
double default_shock_threshold(const StateField& u0);

/// Local maxima of u[k] - u[k+1] whose one-sided jump exceeds `threshold`.
std::vector<ShockRecord> detect_shocks(const StateField& field, double threshold,
                                       std::size_t sample_offset = kShockSampleOffset);

struct ShockTrack {
  std::vector<ShockRecord> records;
  enum class Closure { open, lost, merged } closure = Closure::open;
  /// Time of the last snapshot the track was seen in.
  double last_seen() const { return records.back().t; }
};

struct TrackingOptions {
  double threshold = 0.0;
  /// Least-squares window for the shock speed (in snapshots, >= 5).
  std::size_t window = 5;
  /// Matching radius per unit of snapshot spacing, added to `gate_cells` * h.
  double max_speed = 0.0;
  double gate_cells = 6.0;
  std::size_t sample_offset = kShockSampleOffset;
};

struct TrackingResult {
  std::vector<ShockTrack> tracks;
  std::vector<double> times;
  /// Number of tracks alive at each snapshot time.
  std::vector<std::size_t> open_counts;
  std::size_t merge_events = 0;
};

TrackingResult track_shocks(const std::vector<StateField>& snapshots, const TrackingOptions& options);

/// Index of the longest-lived track, or nullopt when nothing was detected.
std::optional<std::size_t> longest_track(const TrackingResult& result);

/// Mean of |speed_fit - RH speed| over the track, where each fitted speed is
/// compared against (u+ + u-)/2 averaged over the same window.
double mean_rankine_hugoniot_defect(const ShockTrack& track, std::size_t window);

struct MonotonicityReport {
  std::size_t pairs = 0;
  std::size_t decreasing = 0;
  double fraction = 0.0;
  bool pass = false;
};

/// Fraction of consecutive jump pairs that decrease, skipping the first 10%
/// of the track (formation transient). Needs at least 10 records.
MonotonicityReport jump_monotonicity(const std::vector<ShockRecord>& records,
                                     double pass_fraction = 0.95);

// ---------------------------------------------------------------------------
// Entropy inequality

/// Compactly supported bump B((x-x0)/r) B((t-t0)/r), B(s) = exp(-1/(1-s^2)).
struct BumpTestFunction {
  double x0 = 0.5;
  double t0 = 0.5;
  double radius = 0.1;

  double value(double x, double t) const;
  double dx(double x, double t) const;
  double dt(double x, double t) const;
};

struct EntropyReport {
  std::vector<double> lambdas;
  std::vector<BumpTestFunction> test_functions;
  /// integrals[i][j]: lambda i, test function j.
  std::vector<std::vector<double>> integrals;
  double min_integral = 0.0;
  double tolerance_scale = 0.0;  // h + tau
  double c_ent = 0.0;
  double threshold() const { return -c_ent * tolerance_scale; }
  bool pass() const { return min_integral >= threshold(); }
};

/// Frozen from Burgers-only Godunov runs of box data against the exact
/// rarefaction/shock solution on n = 250..2000 (worst observed ratio
/// -min_integral / (h + tau) was 0.35, at n = 250).
inline constexpr double kEntropyToleranceConstant = 0.5;

/// Trapezoid quadrature of the Kruzkov integrand
///   |u-l| phi_t + sgn(u-l) (u^2-l^2)/2 phi_x - sgn(u-l) (K' * u) phi
/// over the snapshots. `nonlocal` off drops the last term (Burgers).
/// `tau` is the scheme time step, used only for the tolerance scale.
EntropyReport entropy_residual(const std::vector<StateField>& snapshots, const std::vector<double>& lambdas,
                               const std::vector<BumpTestFunction>& test_functions, double tau,
                               bool nonlocal = true, double c_ent = kEntropyToleranceConstant);

/// n_lambda values spanning [min u - margin, max u + margin] over the trajectory.
std::vector<double> lambda_grid(const std::vector<StateField>& snapshots, std::size_t count, double margin);

/// A rows x cols lattice of bumps of the given radius inside (0, t_end) x T.
std::vector<BumpTestFunction> bump_lattice(double t_end, std::size_t time_rows, std::size_t space_cols,
                                           double radius);

/// Snapshots in reverse order with times remapped to t_end - t.
std::vector<StateField> time_reversed(const std::vector<StateField>& snapshots);

// ---------------------------------------------------------------------------
// L1 stability

struct StabilityReport {
  double initial_distance = 0.0;
  /// Per output time: ||u(t) - v(t)||_1 / (e^{rate t} ||u0 - v0||_1).
  std::vector<double> times;
  std::vector<double> ratios;
  double max_ratio = 0.0;
  double growth_rate = 0.0;  // ||K'||_inf = 1/2, or 0 for Burgers
  double slack = 0.2;
  bool pass = false;
};

/// Runs both initial data with `cfg` (t_end and output times overridden).
StabilityReport l1_stability(const StateField& u0, const StateField& v0, double t_end, GodunovConfig cfg,
                             double slack = 0.2);

// ---------------------------------------------------------------------------
// Extrema

struct ExtremaSeries {
  std::vector<double> times;
  std::vector<double> max;
  std::vector<double> min;
  std::vector<std::size_t> peaks;
};

/// Strict local maxima on the torus; runs of equal values (within `noise`)
/// count once.
std::size_t count_peaks(const StateField& field, double noise = 1e-8);

ExtremaSeries extrema_series(const std::vector<StateField>& snapshots);

}  // namespace fwlab
