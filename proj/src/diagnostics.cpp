#include "fwlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <tuple>
#include <stdexcept>

#include "fwlab/helmholtz.hpp"

namespace fwlab {

// ---------------------------------------------------------------------------
// Shock detection and tracking

double default_shock_threshold(const StateField& u0) { return 0.25 * (u0.max() - u0.min()); }

std::vector<ShockRecord> detect_shocks(const StateField& field, double threshold, std::size_t sample_offset) {
  if (!(threshold > 0.0)) throw std::invalid_argument("detect_shocks: threshold must be > 0");
  const PeriodicGrid& grid = field.grid();
  const std::size_t n = grid.size();
  const auto offset = static_cast<std::ptrdiff_t>(sample_offset);
  auto drop = [&](std::size_t k) { return field[k] - field[grid.next(k)]; };

  std::vector<ShockRecord> found;
  for (std::size_t k = 0; k < n; ++k) {
    const double d = drop(k);
    if (d <= 0.0 || d < drop(grid.prev(k)) || d <= drop(grid.next(k))) continue;
    const auto ki = static_cast<std::ptrdiff_t>(k);
    ShockRecord r;
    r.t = field.time();
    r.interface_cell = k;
    r.position = std::fmod((static_cast<double>(k) + 0.5) * grid.spacing(), 1.0);
    r.u_minus = field[grid.wrap(ki - offset)];
    r.u_plus = field[grid.wrap(ki + 1 + offset)];
    r.jump = r.u_minus - r.u_plus;
    r.sample_offset = sample_offset;
    if (r.jump > threshold) found.push_back(r);
  }

  // Candidates inside one smeared layer collapse onto the steepest interface.
  const double merge_radius = static_cast<double>(2 * sample_offset + 1) * grid.spacing();
  std::vector<ShockRecord> kept;
  for (const auto& r : found) {
    bool absorbed = false;
    for (auto& other : kept) {
      if (std::abs(PeriodicGrid::torus_delta(other.position, r.position)) <= merge_radius) {
        if (drop(r.interface_cell) > drop(other.interface_cell)) other = r;
        absorbed = true;
        break;
      }
    }
    if (!absorbed) kept.push_back(r);
  }
  return kept;
}

namespace {

double least_squares_slope(std::span<const double> t, std::span<const double> y) {
  const double tm = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(t.size());
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    num += (t[i] - tm) * (y[i] - ym);
    den += (t[i] - tm) * (t[i] - tm);
  }
  return den > 0.0 ? num / den : 0.0;
}

void attach_speed_fits(ShockTrack& track, std::size_t window) {
  auto& recs = track.records;
  std::vector<double> times(recs.size());
  std::vector<double> unwrapped(recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    times[i] = recs[i].t;
    unwrapped[i] = i == 0 ? recs[0].position
                          : unwrapped[i - 1] + PeriodicGrid::torus_delta(recs[i - 1].position, recs[i].position);
  }
  for (std::size_t i = window - 1; i < recs.size(); ++i) {
    const std::size_t first = i + 1 - window;
    recs[i].speed_fit = least_squares_slope(std::span(times).subspan(first, window),
                                            std::span(unwrapped).subspan(first, window));
  }
}

}  // namespace

TrackingResult track_shocks(const std::vector<StateField>& snapshots, const TrackingOptions& options) {
  if (options.window < 5) throw std::invalid_argument("track_shocks: speed window must be >= 5 snapshots");
  if (!(options.threshold > 0.0)) throw std::invalid_argument("track_shocks: threshold must be > 0");

  TrackingResult result;
  std::vector<std::size_t> active;  // indices into result.tracks
  double previous_time = 0.0;

  for (std::size_t s = 0; s < snapshots.size(); ++s) {
    const StateField& snap = snapshots[s];
    const double h = snap.grid().spacing();
    const double dt = s == 0 ? 0.0 : snap.time() - previous_time;
    const double speed_bound = options.max_speed > 0.0 ? options.max_speed : snap.max_abs();
    const double gate = speed_bound * dt + options.gate_cells * h;
    previous_time = snap.time();

    const auto records = detect_shocks(snap, options.threshold, options.sample_offset);

    struct Candidate {
      double distance;
      std::size_t track;
      std::size_t record;
    };
    std::vector<Candidate> candidates;
    for (std::size_t a = 0; a < active.size(); ++a) {
      const ShockRecord& last = result.tracks[active[a]].records.back();
      const double predicted = last.position + last.rankine_hugoniot_speed() * dt;
      for (std::size_t r = 0; r < records.size(); ++r) {
        const double d = std::abs(PeriodicGrid::torus_delta(predicted, records[r].position));
        if (d <= gate) candidates.push_back({d, a, r});
      }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
      return std::tie(x.distance, x.track, x.record) < std::tie(y.distance, y.track, y.record);
    });

    std::vector<bool> track_done(active.size(), false);
    std::vector<bool> record_taken(records.size(), false);
    std::vector<bool> track_contested(active.size(), false);
    for (const auto& c : candidates) {
      if (track_done[c.track]) continue;
      if (record_taken[c.record]) {
        track_contested[c.track] = true;
        continue;
      }
      track_done[c.track] = true;
      record_taken[c.record] = true;
      result.tracks[active[c.track]].records.push_back(records[c.record]);
    }

    std::vector<std::size_t> still_active;
    for (std::size_t a = 0; a < active.size(); ++a) {
      if (track_done[a]) {
        still_active.push_back(active[a]);
        continue;
      }
      auto& track = result.tracks[active[a]];
      if (track_contested[a]) {
        track.closure = ShockTrack::Closure::merged;
        ++result.merge_events;
      } else {
        track.closure = ShockTrack::Closure::lost;
      }
    }
    for (std::size_t r = 0; r < records.size(); ++r) {
      if (record_taken[r]) continue;
      result.tracks.push_back(ShockTrack{{records[r]}, ShockTrack::Closure::open});
      still_active.push_back(result.tracks.size() - 1);
    }
    active = std::move(still_active);
    result.times.push_back(snap.time());
    result.open_counts.push_back(active.size());
  }

  for (auto& track : result.tracks) attach_speed_fits(track, options.window);
  return result;
}

std::optional<std::size_t> longest_track(const TrackingResult& result) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < result.tracks.size(); ++i) {
    if (!best || result.tracks[i].records.size() > result.tracks[*best].records.size()) best = i;
  }
  return best;
}

double mean_rankine_hugoniot_defect(const ShockTrack& track, std::size_t window) {
  const auto& recs = track.records;
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (!recs[i].speed_fit || i + 1 < window) continue;
    double rh = 0.0;
    for (std::size_t j = i + 1 - window; j <= i; ++j) rh += recs[j].rankine_hugoniot_speed();
    rh /= static_cast<double>(window);
    total += std::abs(*recs[i].speed_fit - rh);
    ++count;
  }
  if (count == 0) throw std::invalid_argument("mean_rankine_hugoniot_defect: no fitted speeds on track");
  return total / static_cast<double>(count);
}

MonotonicityReport jump_monotonicity(const std::vector<ShockRecord>& records, double pass_fraction) {
  if (records.size() < 10) throw std::invalid_argument("jump_monotonicity: track too short (< 10 records)");
  const std::size_t skip = records.size() / 10;
  MonotonicityReport report;
  for (std::size_t i = skip; i + 1 < records.size(); ++i) {
    ++report.pairs;
    if (records[i + 1].jump < records[i].jump) ++report.decreasing;
  }
  report.fraction = static_cast<double>(report.decreasing) / static_cast<double>(report.pairs);
  report.pass = report.fraction >= pass_fraction;
  return report;
}

// ---------------------------------------------------------------------------
// Entropy inequality

namespace {

double bump(double s) { return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0; }

double bump_derivative(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double w = 1.0 - s * s;
  return bump(s) * (-2.0 * s / (w * w));
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

double BumpTestFunction::value(double x, double t) const {
  return bump(PeriodicGrid::torus_delta(x0, x) / radius) * bump((t - t0) / radius);
}

double BumpTestFunction::dx(double x, double t) const {
  return bump_derivative(PeriodicGrid::torus_delta(x0, x) / radius) / radius * bump((t - t0) / radius);
}

double BumpTestFunction::dt(double x, double t) const {
  return bump(PeriodicGrid::torus_delta(x0, x) / radius) * bump_derivative((t - t0) / radius) / radius;
}

EntropyReport entropy_residual(const std::vector<StateField>& snapshots, const std::vector<double>& lambdas,
                               const std::vector<BumpTestFunction>& test_functions, double tau, bool nonlocal,
                               double c_ent) {
  if (snapshots.size() < 3) throw std::invalid_argument("entropy_residual: need at least three snapshots");
  const PeriodicGrid grid = snapshots.front().grid();
  const double h = grid.spacing();
  const double t_first = snapshots.front().time();
  const double t_last = snapshots.back().time();
  for (std::size_t s = 1; s < snapshots.size(); ++s) {
    const double gap = snapshots[s].time() - snapshots[s - 1].time();
    if (!(gap > 0.0)) throw std::invalid_argument("entropy_residual: snapshot times must increase");
    if (gap > 10.0 * tau * (1.0 + 1e-9)) {
      throw std::invalid_argument("entropy_residual: snapshot spacing exceeds 10 time steps");
    }
  }
  for (const auto& phi : test_functions) {
    if (!(phi.radius > 0.0 && phi.radius < 0.5) || phi.t0 - phi.radius < t_first ||
        phi.t0 + phi.radius > t_last) {
      throw std::invalid_argument("entropy_residual: test function support leaves the space-time domain");
    }
  }

  // trapezoid weights in time
  std::vector<double> weight(snapshots.size(), 0.0);
  for (std::size_t s = 0; s + 1 < snapshots.size(); ++s) {
    const double gap = snapshots[s + 1].time() - snapshots[s].time();
    weight[s] += 0.5 * gap;
    weight[s + 1] += 0.5 * gap;
  }

  std::optional<HelmholtzSolver> solver;
  if (nonlocal) solver.emplace(grid);

  EntropyReport report;
  report.lambdas = lambdas;
  report.test_functions = test_functions;
  report.integrals.assign(lambdas.size(), std::vector<double>(test_functions.size(), 0.0));
  report.tolerance_scale = h + tau;
  report.c_ent = c_ent;

  std::vector<double> v(grid.size(), 0.0);
  for (std::size_t s = 0; s < snapshots.size(); ++s) {
    const StateField& u = snapshots[s];
    const double t = u.time();
    if (!(u.grid() == grid)) throw std::invalid_argument("entropy_residual: snapshots on different grids");
    if (solver) solver->apply(u.values(), v);

    for (std::size_t j = 0; j < test_functions.size(); ++j) {
      const auto& phi = test_functions[j];
      if (std::abs(t - phi.t0) >= phi.radius) continue;
      const double wt = weight[s] * h;
      const auto half_width = static_cast<std::ptrdiff_t>(std::ceil(phi.radius / h));
      const auto center = static_cast<std::ptrdiff_t>(std::lround(phi.x0 / h));
      for (std::ptrdiff_t m = center - half_width; m <= center + half_width; ++m) {
        const std::size_t k = grid.wrap(m);
        const double x = grid.x(k);
        const double p = phi.value(x, t);
        const double px = phi.dx(x, t);
        const double pt = phi.dt(x, t);
        if (p == 0.0 && px == 0.0 && pt == 0.0) continue;
        const double uk = u[k];
        for (std::size_t i = 0; i < lambdas.size(); ++i) {
          const double lam = lambdas[i];
          const double sg = sign(uk - lam);
          double integrand = std::abs(uk - lam) * pt + sg * 0.5 * (uk * uk - lam * lam) * px;
          if (solver) integrand -= sg * v[k] * p;
          report.integrals[i][j] += wt * integrand;
        }
      }
    }
  }

  report.min_integral = std::numeric_limits<double>::infinity();
  for (const auto& row : report.integrals) {
    for (double value : row) report.min_integral = std::min(report.min_integral, value);
  }
  return report;
}

std::vector<double> lambda_grid(const std::vector<StateField>& snapshots, std::size_t count, double margin) {
  if (count < 2) throw std::invalid_argument("lambda_grid: need at least two values");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& s : snapshots) {
    lo = std::min(lo, s.min());
    hi = std::max(hi, s.max());
  }
  lo -= margin;
  hi += margin;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return out;
}

std::vector<BumpTestFunction> bump_lattice(double t_end, std::size_t time_rows, std::size_t space_cols,
                                           double radius) {
  if (!(2.0 * radius < t_end)) throw std::invalid_argument("bump_lattice: radius too large for the time span");
  std::vector<BumpTestFunction> out;
  const double t_lo = radius * 1.05;
  const double t_hi = t_end - radius * 1.05;
  for (std::size_t r = 0; r < time_rows; ++r) {
    const double t0 =
        time_rows == 1 ? 0.5 * t_end : t_lo + (t_hi - t_lo) * static_cast<double>(r) / static_cast<double>(time_rows - 1);
    for (std::size_t c = 0; c < space_cols; ++c) {
      const double x0 = (static_cast<double>(c) + 0.5) / static_cast<double>(space_cols);
      out.push_back({x0, t0, radius});
    }
  }
  return out;
}

std::vector<StateField> time_reversed(const std::vector<StateField>& snapshots) {
  if (snapshots.empty()) return {};
  const double t_end = snapshots.back().time();
  const double t_start = snapshots.front().time();
  std::vector<StateField> out;
  out.reserve(snapshots.size());
  for (auto it = snapshots.rbegin(); it != snapshots.rend(); ++it) {
    StateField s = *it;
    s.set_time(t_start + (t_end - it->time()));
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// L1 stability

StabilityReport l1_stability(const StateField& u0, const StateField& v0, double t_end, GodunovConfig cfg,
                             double slack) {
  if (!(u0.grid() == v0.grid())) throw std::invalid_argument("l1_stability: fields on different grids");
  StabilityReport report;
  report.initial_distance = l1_distance(u0, v0);
  if (!(report.initial_distance > 0.0)) {
    throw std::invalid_argument("l1_stability: initial data coincide, ratio undefined");
  }
  cfg.grid = u0.grid();
  cfg.t_end = t_end;
  if (cfg.output_times.empty() || cfg.output_times.back() > t_end) cfg.output_times = uniform_times(t_end, t_end / 20.0);
  report.growth_rate = cfg.nonlocal ? 0.5 : 0.0;
  report.slack = slack;

  const Trajectory a = run(u0, cfg);
  const Trajectory b = run(v0, cfg);
  for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
    const double t = a.snapshots[i].time();
    const double ratio =
        l1_distance(a.snapshots[i], b.snapshots[i]) / (std::exp(report.growth_rate * t) * report.initial_distance);
    report.times.push_back(t);
    report.ratios.push_back(ratio);
    report.max_ratio = std::max(report.max_ratio, ratio);
  }
  report.pass = report.max_ratio <= 1.0 + slack;
  return report;
}

// ---------------------------------------------------------------------------
// Extrema

std::size_t count_peaks(const StateField& field, double noise) {
  const std::size_t n = field.size();
  const PeriodicGrid& grid = field.grid();
  // start at the beginning of a run so plateaus are not split by the wrap
  std::size_t start = n;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(field[k] - field[grid.prev(k)]) > noise) {
      start = k;
      break;
    }
  }
  if (start == n) return 0;  // constant field

  std::vector<double> levels;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = (start + i) % n;
    if (i == 0 || std::abs(field[k] - field[grid.prev(k)]) > noise) levels.push_back(field[k]);
  }
  const std::size_t m = levels.size();
  std::size_t peaks = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const double left = levels[(j + m - 1) % m];
    const double right = levels[(j + 1) % m];
    if (levels[j] > left + noise && levels[j] > right + noise) ++peaks;
  }
  return peaks;
}

ExtremaSeries extrema_series(const std::vector<StateField>& snapshots) {
  ExtremaSeries out;
  for (const auto& s : snapshots) {
    out.times.push_back(s.time());
    out.max.push_back(s.max());
    out.min.push_back(s.min());
    out.peaks.push_back(count_peaks(s));
  }
  return out;
}

}  // namespace fwlab
