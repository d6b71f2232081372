#include "fwlab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <utility>

#include <fmt/format.h>

#include "fwlab/diagnostics.hpp"
#include "fwlab/godunov.hpp"
#include "fwlab/grid.hpp"
#include "fwlab/parallel.hpp"
#include "fwlab/viscous.hpp"
#include "fwlab/waves.hpp"

namespace fwlab {

namespace {

using P = ParamType;

const std::vector<std::string> kDataChoices = {"data1", "data2", "cosine"};

ParamDef grid_param() { return {"n", P::integer, "1000", "number of grid cells"}; }
ParamDef data_param() { return {"data", P::text, "data1", "initial data preset", kDataChoices}; }
ParamDef amplitude_param() { return {"amplitude", P::real, "0.02", "amplitude of the cosine preset"}; }
ParamDef q_param() {
  return {"q", P::real, "0", "typical size fixing tau = cfl h / q; 0 picks 2 (data1), 0.5 (data2) or |amplitude|"};
}

const std::map<Scenario, std::vector<ParamDef>>& param_table() {
  static const std::map<Scenario, std::vector<ParamDef>> table = {
      {Scenario::simulate,
       {data_param(), grid_param(), amplitude_param(), q_param(),
        {"t_end", P::real, "0.65", "final time"},
        {"dt_out", P::real, "0.05", "snapshot CSV cadence"},
        {"track_dt", P::real, "0.01", "cadence of the snapshots used for shock tracking"},
        {"cfl", P::real, "0.4", "CFL factor"},
        {"nonlocal", P::boolean, "true", "include the nonlocal term (false: Burgers)"},
        {"threshold", P::real, "0", "shock detection threshold; 0 is a quarter of the initial oscillation"},
        {"speed_window", P::integer, "9", "snapshots per least-squares shock speed fit"},
        {"sample_offset", P::integer, "5", "cells between the interface and the one-sided samples"}}},
      {Scenario::viscous,
       {data_param(), grid_param(), amplitude_param(), q_param(),
        {"epsilons", P::real_list, "0.01,0.003,0.001", "viscosities, largest first"},
        {"t_end", P::real, "0.65", "final time"},
        {"compare_t", P::real, "0.5", "time of the L1 comparison with the Godunov run"},
        {"dt_out", P::real, "0.05", "snapshot CSV cadence"}}},
      {Scenario::wave_branch,
       {grid_param(),
        {"c_start", P::real, "0.025", "first speed"},
        {"c_stop", P::real, "0.0269", "last speed"},
        {"steps", P::integer, "20", "number of speeds on the branch"},
        {"endpoint_resolution", P::real, "1e-6", "smallest continuation step of the endpoint search"}}},
      {Scenario::wave_evolve,
       {grid_param(),
        {"c", P::real, "0.0255", "wave speed"},
        {"perturb", P::text, "none", "disturbance added to the profile", {"none", "cos2", "cos3", "cos4", "asym"}},
        {"delta_pct", P::real, "5", "disturbance size in percent of max U - min U"},
        {"t_end", P::real, "30", "final time"},
        {"dt_out", P::real, "1", "snapshot CSV cadence"},
        {"orbit_stride", P::integer, "1", "write every k-th step to the orbit CSV"}}},
      {Scenario::perturb,
       {grid_param(),
        {"c", P::real, "0.0255", "wave speed"},
        {"disturbances", P::text_list, "cos2,cos3,cos4,asym", "disturbances to run",
         {"cos2", "cos3", "cos4", "asym"}},
        {"delta_pct", P::real, "5", "disturbance size in percent of max U - min U"},
        {"t_end", P::real, "300", "final time"},
        {"orbit_stride", P::integer, "1", "write every k-th step to the orbit CSVs"},
        {"distance_factor", P::real, "3", "allowed orbit distance in units of delta"}}},
      {Scenario::threshold_scan,
       {grid_param(),
        {"amplitudes", P::real_list, "0.005,0.0075,0.01,0.0125,0.015,0.02", "cosine amplitudes q"},
        {"t_max", P::real, "50", "time horizon of every run"},
        {"check_dt", P::real, "0.1", "cadence of the shock detector"},
        {"threshold_frac", P::real, "0.5", "detection threshold as a multiple of q"},
        {"sample_offset", P::integer, "5", "cells between the interface and the one-sided samples"},
        {"shock_above", P::real, "0.015", "amplitudes above this must break"},
        {"smooth_below", P::real, "0.01", "amplitudes below this must stay smooth"}}},
      {Scenario::entropy_check,
       {data_param(), grid_param(), amplitude_param(), q_param(),
        {"t_end", P::real, "0.65", "final time"},
        {"nonlocal", P::boolean, "true", "include the nonlocal term (false: Burgers)"},
        {"lambdas", P::integer, "9", "number of entropy constants"},
        {"lambda_margin", P::real, "0.5", "margin beyond the range of u"},
        {"bump_rows", P::integer, "3", "test-function rows in time"},
        {"bump_cols", P::integer, "4", "test-function columns in space"},
        {"bump_radius", P::real, "0.1", "test-function radius"},
        {"snapshot_steps", P::integer, "5", "snapshot spacing in time steps (at most 10)"},
        {"c_ent", P::real, format_number(kEntropyToleranceConstant), "tolerance constant"},
        {"reversal_factor", P::real, "10", "reversed run must fall this many thresholds below zero"}}},
      {Scenario::l1_check,
       {grid_param(),
        {"data", P::text_list, "data1,data2", "base data", {"data1", "data2"}},
        {"perturbations", P::text_list, "cos4,sin2,bump", "perturbation shapes", {"cos4", "sin2", "bump"}},
        {"size", P::real, "0.01", "perturbation amplitude"},
        {"t_end", P::real, "0.5", "final time"},
        {"dt_out", P::real, "0.025", "comparison cadence"},
        {"nonlocal", P::boolean, "true", "include the nonlocal term (false: Burgers)"},
        {"slack", P::real, "0.2", "allowed excess over the Gronwall bound"}}},
      {Scenario::phase_scan,
       {{"betas", P::real_list, "-1,-0.4,0,0.5,1", "integration constants"},
        {"y_count", P::integer, "20", "starting Y values per beta"},
        {"z_count", P::integer, "11", "starting Z values per beta"},
        {"y_span", P::real, "3", "starting Y range [-y_span, y_span]"},
        {"z_span", P::real, "3", "starting Z range [-z_span, z_span]"},
        {"min_residual", P::real, "0.01", "smallest acceptable shooting residual"},
        {"equilibrium_tolerance", P::real, "1e-8", "allowed drift of an equilibrium"}}},
  };
  return table;
}

// ---------------------------------------------------------------------------
// Output

class Manifest {
 public:
  void param(std::string key, std::string value) { params_.emplace_back(std::move(key), std::move(value)); }
  void diag(std::string key, std::string value) { diagnostics_.emplace_back(std::move(key), std::move(value)); }
  void diag(std::string key, double value) { diag(std::move(key), format_number(value)); }
  void shock(std::string key, std::string value) { shocks_.emplace_back(std::move(key), std::move(value)); }
  void shock(std::string key, double value) { shock(std::move(key), format_number(value)); }

  std::string render(const std::vector<CheckResult>& checks) const {
    std::string out;
    auto section = [&](const char* name, const std::vector<std::pair<std::string, std::string>>& rows) {
      out += fmt::format("[{}]\n", name);
      for (const auto& [k, v] : rows) out += fmt::format("{} = {}\n", k, v);
      out += "\n";
    };
    section("params", params_);
    section("diagnostics", diagnostics_);
    section("shocks", shocks_);
    out += "[checks]\n";
    bool all = true;
    for (const auto& c : checks) {
      all = all && c.pass;
      out += fmt::format("{} = {} value={} limit={}{}{}\n", c.name, c.pass ? "pass" : "fail", format_number(c.value),
                         format_number(c.limit), c.detail.empty() ? "" : " ", c.detail);
    }
    out += fmt::format("overall = {}\n", all ? "pass" : "fail");
    return out;
  }

 private:
  std::vector<std::pair<std::string, std::string>> params_, diagnostics_, shocks_;
};

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string xu_csv(const PeriodicGrid& grid, const std::vector<double>& values) {
  std::string s = "x,u\n";
  for (std::size_t k = 0; k < grid.size(); ++k) s += fmt::format("{},{}\n", grid.x(k), values[k]);
  return s;
}

std::string xu_csv(const StateField& u) {
  return xu_csv(u.grid(), std::vector<double>(u.values().begin(), u.values().end()));
}

std::string snapshot_name(double t) { return fmt::format("snap_t{:.4f}.csv", t); }

std::string orbit_csv(const std::vector<OrbitSample>& orbit, std::size_t stride) {
  std::string s = "step,u_a,u_b\n";
  for (std::size_t i = 0; i < orbit.size(); i += stride) {
    s += fmt::format("{},{},{}\n", orbit[i].step, orbit[i].u_a, orbit[i].u_b);
  }
  return s;
}

std::string join_numbers(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
  return s;
}

CheckResult at_most(std::string name, double value, double limit, std::string detail = {}) {
  return {std::move(name), value <= limit, value, limit, std::move(detail)};
}

CheckResult at_least(std::string name, double value, double limit, std::string detail = {}) {
  return {std::move(name), value >= limit, value, limit, std::move(detail)};
}

// ---------------------------------------------------------------------------
// Shared setup

PeriodicGrid grid_of(const ExperimentSpec& spec) {
  const long long n = spec.get_int("n");
  if (n < 4) throw UsageError("parameter 'n': need at least 4 cells", "n");
  return PeriodicGrid(static_cast<std::size_t>(n));
}

double positive(const ExperimentSpec& spec, const std::string& key) {
  const double v = spec.get_real(key);
  if (!(v > 0.0)) throw UsageError("parameter '" + key + "': must be > 0", key);
  return v;
}

std::size_t count_param(const ExperimentSpec& spec, const std::string& key, long long min_value = 1) {
  const long long v = spec.get_int(key);
  if (v < min_value) throw UsageError(fmt::format("parameter '{}': must be >= {}", key, min_value), key);
  return static_cast<std::size_t>(v);
}

double preset_q(const std::string& data, double amplitude) {
  if (data == "data1") return 2.0;
  if (data == "data2") return 0.5;
  return std::abs(amplitude);
}

struct Setup {
  PeriodicGrid grid{4};
  StateField u0{PeriodicGrid(4)};
  GodunovConfig cfg;
};

Setup godunov_setup(const ExperimentSpec& spec, const std::string& data) {
  Setup s;
  s.grid = grid_of(spec);
  const double amplitude = spec.params.count("amplitude") ? spec.get_real("amplitude") : 0.0;
  s.u0 = sample(initial_data(data, amplitude), s.grid);
  s.cfg.grid = s.grid;
  const double q = spec.params.count("q") ? spec.get_real("q") : 0.0;
  s.cfg.q = q > 0.0 ? q : preset_q(data, amplitude);
  if (!(s.cfg.q > 0.0)) throw UsageError("parameter 'q': typical size is zero (set q or amplitude)", "q");
  if (spec.params.count("cfl")) s.cfg.cfl_factor = positive(spec, "cfl");
  if (spec.params.count("nonlocal")) s.cfg.nonlocal = spec.get_bool("nonlocal");
  return s;
}

std::vector<double> merged_times(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  std::vector<double> out;
  for (double t : a) {
    if (out.empty() || t - out.back() > 1e-9) out.push_back(t);
  }
  return out;
}

bool on_cadence(double t, double dt, double t_end) {
  const double r = t / dt;
  return std::abs(r - std::round(r)) < 1e-6 || std::abs(t - t_end) < 1e-9;
}

struct Context {
  const ExperimentSpec& spec;
  Manifest manifest;
  std::vector<CheckResult> checks;
  std::filesystem::path dir;

  void file(const std::string& name, const std::string& text) { write_text(dir / name, text); }
};

// ---------------------------------------------------------------------------
// Scenarios

void record_shocks(Context& ctx, const TrackingResult& tracking, std::size_t window) {
  auto& m = ctx.manifest;
  m.shock("tracks", std::to_string(tracking.tracks.size()));
  m.shock("merge_events", std::to_string(tracking.merge_events));
  std::size_t max_open = 0;
  for (auto c : tracking.open_counts) max_open = std::max(max_open, c);
  m.shock("max_simultaneous", std::to_string(max_open));
  m.shock("columns", "track,t,position,u_minus,u_plus,jump,rh_speed,speed_fit");
  for (std::size_t i = 0; i < tracking.tracks.size(); ++i) {
    for (const auto& r : tracking.tracks[i].records) {
      m.shock("record", fmt::format("{},{},{},{},{},{},{},{}", i, format_number(r.t), format_number(r.position),
                                    format_number(r.u_minus), format_number(r.u_plus), format_number(r.jump),
                                    format_number(r.rankine_hugoniot_speed()),
                                    r.speed_fit ? format_number(*r.speed_fit) : "nan"));
    }
  }
  for (std::size_t i = 0; i < tracking.tracks.size(); ++i) {
    const auto& track = tracking.tracks[i];
    const char* closure = track.closure == ShockTrack::Closure::open     ? "open"
                          : track.closure == ShockTrack::Closure::merged ? "merged"
                                                                         : "lost";
    m.shock(fmt::format("track.{}.closure", i), closure);
    m.shock(fmt::format("track.{}.rh_defect", i), mean_rankine_hugoniot_defect(track, window));
    std::vector<ShockRecord> settled;
    const double t_first = track.records.front().t;
    for (const auto& r : track.records) {
      if (r.t >= t_first + 0.05 - 1e-9) settled.push_back(r);
    }
    if (settled.size() >= 10) {
      const auto mono = jump_monotonicity(settled);
      m.shock(fmt::format("track.{}.decreasing_jump_fraction", i), mono.fraction);
    }
  }
}

void run_simulate(Context& ctx) {
  const auto& spec = ctx.spec;
  const std::string data = spec.get_text("data");
  Setup s = godunov_setup(spec, data);
  const double t_end = positive(spec, "t_end");
  const double dt_out = positive(spec, "dt_out");
  const double track_dt = positive(spec, "track_dt");
  s.cfg.t_end = t_end;
  const auto out_times = uniform_times(t_end, dt_out);
  s.cfg.output_times = merged_times(out_times, uniform_times(t_end, track_dt));
  ctx.manifest.param("resolved_q", format_number(s.cfg.q));
  ctx.manifest.param("tau", format_number(s.cfg.time_step()));

  const Trajectory traj = run(s.u0, s.cfg);
  std::size_t written = 0;
  for (const auto& snap : traj.snapshots) {
    if (!on_cadence(snap.time(), dt_out, t_end)) continue;
    ctx.file(snapshot_name(snap.time()), xu_csv(snap));
    ++written;
  }

  auto& m = ctx.manifest;
  m.diag("snapshots_written", std::to_string(written));
  m.diag("steps", std::to_string(traj.steps));
  m.diag("final_time_step", traj.final_time_step);
  m.diag("columns", "t,max,min,l1,l2,mass");
  double mass_drift = 0.0;
  double max_abs = 0.0;
  for (const auto& snap : traj.snapshots) {
    const auto d = measure(snap);
    m.diag("row", fmt::format("{},{},{},{},{},{}", format_number(d.t), format_number(d.max), format_number(d.min),
                              format_number(d.l1), format_number(d.l2), format_number(d.mass)));
    mass_drift = std::max(mass_drift, std::abs(d.mass - s.u0.mass()));
    max_abs = std::max(max_abs, snap.max_abs());
  }
  const auto extrema = extrema_series(traj.snapshots);
  m.diag("peaks", [&] {
    std::string p;
    for (std::size_t i = 0; i < extrema.peaks.size(); ++i) p += (i ? "," : "") + std::to_string(extrema.peaks[i]);
    return p;
  }());

  TrackingOptions opts;
  const double threshold = spec.get_real("threshold");
  opts.threshold = threshold > 0.0 ? threshold : default_shock_threshold(s.u0);
  opts.window = count_param(spec, "speed_window", 5);
  opts.sample_offset = count_param(spec, "sample_offset", 0);
  std::vector<StateField> tracked;
  for (const auto& snap : traj.snapshots) {
    if (on_cadence(snap.time(), track_dt, t_end)) tracked.push_back(snap);
  }
  m.shock("threshold", opts.threshold);
  record_shocks(ctx, track_shocks(tracked, opts), opts.window);

  ctx.checks.push_back(at_most("mass_conserved", mass_drift, 1e-10));
  const double bound = s.u0.max_abs() + t_end * s.u0.l2_norm();
  ctx.checks.push_back(at_most("max_bound", max_abs, bound, "max|u| <= max|u0| + t_end ||u0||_2"));
}

void run_viscous_scenario(Context& ctx) {
  const auto& spec = ctx.spec;
  const std::string data = spec.get_text("data");
  Setup s = godunov_setup(spec, data);
  const auto epsilons = spec.get_reals("epsilons");
  const double t_end = positive(spec, "t_end");
  const double compare_t = positive(spec, "compare_t");
  const double dt_out = positive(spec, "dt_out");
  if (compare_t > t_end) throw UsageError("parameter 'compare_t': must not exceed t_end", "compare_t");
  for (double e : epsilons) {
    if (!(e > 0.0)) throw UsageError("parameter 'epsilons': values must be > 0", "epsilons");
  }
  const auto out_times = merged_times(uniform_times(t_end, dt_out), {compare_t});

  s.cfg.t_end = compare_t;
  s.cfg.output_times = {0.0, compare_t};
  const StateField reference = run(s.u0, s.cfg).snapshots.back();

  std::vector<ViscousResult> results(epsilons.size());
  parallel_for(epsilons.size(), spec.jobs, [&](std::size_t i) {
    ViscousConfig vc;
    vc.grid = s.grid;
    vc.epsilon = epsilons[i];
    vc.t_end = t_end;
    vc.output_times = out_times;
    results[i] = run_viscous(s.u0, vc);
  });

  auto& m = ctx.manifest;
  m.diag("columns", "epsilon,tau,steps,max_rel_l2_increase,max_abs,max_bound,l1_to_godunov");
  const double bound = s.u0.max_abs() + t_end * s.u0.l2_norm();
  std::vector<double> distances;
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    const auto& r = results[i];
    const std::string sub = fmt::format("eps_{}", format_number(epsilons[i]));
    std::filesystem::create_directories(ctx.dir / sub);
    double l1 = 0.0;
    for (const auto& snap : r.trajectory.snapshots) {
      if (std::abs(snap.time() - compare_t) < 1e-9) l1 = l1_distance(snap, reference);
      if (on_cadence(snap.time(), dt_out, t_end)) ctx.file(sub + "/" + snapshot_name(snap.time()), xu_csv(snap));
    }
    double worst_increase = 0.0;
    for (std::size_t k = 1; k < r.ledger.l2_half.size(); ++k) {
      const double prev = r.ledger.l2_half[k - 1];
      worst_increase = std::max(worst_increase, (r.ledger.l2_half[k] - prev) / prev);
    }
    double max_abs = 0.0;
    for (const auto& d : r.trajectory.diagnostics) max_abs = std::max({max_abs, std::abs(d.max), std::abs(d.min)});
    distances.push_back(l1);
    m.diag("row", fmt::format("{},{},{},{},{},{},{}", format_number(epsilons[i]),
                              format_number(r.trajectory.final_time_step), r.trajectory.steps,
                              format_number(worst_increase), format_number(max_abs), format_number(bound),
                              format_number(l1)));
    ctx.checks.push_back(at_most(fmt::format("l2_nonincreasing.eps_{}", format_number(epsilons[i])), worst_increase,
                                 1e-8));
    ctx.checks.push_back(at_most(fmt::format("max_bound.eps_{}", format_number(epsilons[i])), max_abs, bound));
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < distances.size(); ++i) decreasing = decreasing && distances[i] < distances[i - 1];
  ctx.checks.push_back({"l1_to_godunov_decreasing", decreasing, distances.empty() ? 0.0 : distances.back(), 0.0,
                        "L1 distance at compare_t: " + join_numbers(distances)});
}

std::string wave_file(double c) { return fmt::format("wave_c{:.5f}.csv", c); }

void run_wave_branch(Context& ctx) {
  const auto& spec = ctx.spec;
  const PeriodicGrid grid = grid_of(spec);
  const double c_start = positive(spec, "c_start");
  const double c_stop = positive(spec, "c_stop");
  const auto steps = static_cast<int>(count_param(spec, "steps"));
  const double resolution = positive(spec, "endpoint_resolution");
  if (!(c_start > discrete_bifurcation_speed(1, grid))) {
    throw UsageError("parameter 'c_start': must exceed the first bifurcation speed", "c_start");
  }

  const auto branch = continue_branch(c_start, c_stop, steps, grid);
  const auto ends = branch_endpoints(branch.front(), resolution);

  auto& m = ctx.manifest;
  m.diag("bifurcation_speed_1", bifurcation_speed(1));
  m.diag("discrete_bifurcation_speed_1", discrete_bifurcation_speed(1, grid));
  m.diag("lower_endpoint", ends.lower);
  m.diag("upper_endpoint", ends.upper);
  m.diag("upper_by_discriminant", ends.upper_by_discriminant ? "true" : "false");
  m.diag("columns", "c,amplitude,discriminant_min,residual,profile_residual,newton_iterations");
  bool increasing = true;
  double worst_residual = 0.0;
  double worst_profile = 0.0;
  double smallest_amp = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < branch.size(); ++i) {
    const auto& p = branch[i];
    const double pres = profile_equation_residual(p);
    m.diag("row", fmt::format("{},{},{},{},{},{}", format_number(p.c), format_number(p.amplitude()),
                              format_number(p.discriminant_min), format_number(p.residual), format_number(pres),
                              p.newton_iterations));
    ctx.file(wave_file(p.c), xu_csv(p.grid, p.U));
    if (i > 0) increasing = increasing && p.amplitude() > branch[i - 1].amplitude();
    worst_residual = std::max(worst_residual, p.residual);
    worst_profile = std::max(worst_profile, pres);
    smallest_amp = std::min(smallest_amp, p.amplitude());
  }
  ctx.checks.push_back(at_least("nontrivial", smallest_amp, 1e-6, "smallest amplitude max U - min U"));
  ctx.checks.push_back({"amplitude_increasing", increasing, 0.0, 0.0, {}});
  ctx.checks.push_back(at_most("wave_residual", worst_residual, 1e-12));
  ctx.checks.push_back(at_most("profile_residual", worst_profile, 1e-8));
  const bool in_window = ends.upper >= 0.0267 && ends.upper <= 0.0271;
  ctx.checks.push_back({"upper_endpoint", in_window, ends.upper, 0.0271, "window [0.0267, 0.0271]"});
  ctx.checks.push_back(at_most("lower_endpoint", std::abs(ends.lower - discrete_bifurcation_speed(1, grid)), 1e-5,
                               "distance from the first bifurcation speed"));
}

double orbit_return_distance(const std::vector<OrbitSample>& orbit, double period) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : orbit) {
    if (std::abs(s.t - period) <= 0.05 * period) {
      best = std::min(best, std::hypot(s.u_a - orbit.front().u_a, s.u_b - orbit.front().u_b));
    }
  }
  return best;
}

std::vector<OrbitSample> thinned(const std::vector<OrbitSample>& orbit, std::size_t max_points) {
  const std::size_t stride = std::max<std::size_t>(1, orbit.size() / max_points);
  std::vector<OrbitSample> out;
  for (std::size_t i = 0; i < orbit.size(); i += stride) out.push_back(orbit[i]);
  return out;
}

void run_wave_evolve(Context& ctx) {
  const auto& spec = ctx.spec;
  const PeriodicGrid grid = grid_of(spec);
  const double c = positive(spec, "c");
  const Disturbance d = parse_disturbance(spec.get_text("perturb"));
  const double fraction = spec.get_real("delta_pct") / 100.0;
  const double t_end = positive(spec, "t_end");
  const double dt_out = positive(spec, "dt_out");
  const std::size_t stride = count_param(spec, "orbit_stride");

  const WaveProfile profile = branch_profile(c, grid);
  const auto ev = evolve_wave_as_initial_data(profile, t_end, d, fraction, dt_out);
  for (const auto& snap : ev.trajectory.snapshots) ctx.file(snapshot_name(snap.time()), xu_csv(snap));
  ctx.file("orbit.csv", orbit_csv(ev.orbit, stride));
  ctx.file(wave_file(c), xu_csv(grid, profile.U));

  auto& m = ctx.manifest;
  m.diag("amplitude", profile.amplitude());
  m.diag("delta", ev.delta);
  m.diag("probe_cells", fmt::format("{},{}", ev.probe_a, ev.probe_b));
  m.diag("steps", std::to_string(ev.trajectory.steps));
  const StateField U(grid, profile.U);
  m.diag("columns", "t,l1_to_translate_relative");
  for (const auto& snap : ev.trajectory.snapshots) {
    const double rel = l1_distance(snap, translated_profile(profile, c * snap.time())) / U.l1_norm();
    m.diag("row", fmt::format("{},{}", format_number(snap.time()), format_number(rel)));
  }

  if (d == Disturbance::none) {
    const auto& last = ev.trajectory.snapshots.back();
    const double rel = l1_distance(last, translated_profile(profile, c * last.time())) / U.l1_norm();
    ctx.checks.push_back(at_most("translation_l1", rel, 0.05, "relative to ||U||_1 at t_end"));
    if (t_end >= 1.05 / c) {
      ctx.checks.push_back(at_most("orbit_closes", orbit_return_distance(ev.orbit, 1.0 / c),
                                   0.02 * profile.amplitude(), "return distance after one period"));
    }
  } else {
    const auto ref = evolve_wave_as_initial_data(profile, t_end, Disturbance::none, 0.0, t_end);
    ctx.file("orbit_reference.csv", orbit_csv(ref.orbit, stride));
    const double dist = max_distance_to_curve(thinned(ev.orbit, 8000), thinned(ref.orbit, 4000));
    ctx.checks.push_back(at_most("orbit_neighborhood", dist, 3.0 * ev.delta, "max distance to the reference orbit"));
  }
}

void run_perturb(Context& ctx) {
  const auto& spec = ctx.spec;
  const PeriodicGrid grid = grid_of(spec);
  const double c = positive(spec, "c");
  const double fraction = spec.get_real("delta_pct") / 100.0;
  const double t_end = positive(spec, "t_end");
  const std::size_t stride = count_param(spec, "orbit_stride");
  const double factor = positive(spec, "distance_factor");
  std::vector<Disturbance> kinds{Disturbance::none};
  for (const auto& name : spec.get_texts("disturbances")) kinds.push_back(parse_disturbance(name));

  const WaveProfile profile = branch_profile(c, grid);
  std::vector<WaveEvolution> runs(kinds.size());
  parallel_for(kinds.size(), spec.jobs, [&](std::size_t i) {
    runs[i] = evolve_wave_as_initial_data(profile, t_end, kinds[i], kinds[i] == Disturbance::none ? 0.0 : fraction,
                                          t_end);
  });

  auto& m = ctx.manifest;
  m.diag("amplitude", profile.amplitude());
  const auto reference = thinned(runs[0].orbit, 4000);
  std::vector<double> distances(kinds.size(), 0.0);
  parallel_for(kinds.size() - 1, spec.jobs, [&](std::size_t j) {
    distances[j + 1] = max_distance_to_curve(thinned(runs[j + 1].orbit, 8000), reference);
  });
  m.diag("columns", "disturbance,delta,max_distance");
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    ctx.file(fmt::format("orbit_{}.csv", to_string(kinds[i])), orbit_csv(runs[i].orbit, stride));
    m.diag("row", fmt::format("{},{},{}", to_string(kinds[i]), format_number(runs[i].delta), format_number(distances[i])));
    if (i > 0) {
      ctx.checks.push_back(at_most("orbit_neighborhood." + to_string(kinds[i]), distances[i], factor * runs[i].delta));
    }
  }
}

struct ScanRow {
  double q = 0.0;
  std::optional<double> detection;
  double max_jump = 0.0;
};

void run_threshold_scan(Context& ctx) {
  const auto& spec = ctx.spec;
  const PeriodicGrid grid = grid_of(spec);
  const auto amplitudes = spec.get_reals("amplitudes");
  const double t_max = positive(spec, "t_max");
  const double check_dt = positive(spec, "check_dt");
  const double frac = positive(spec, "threshold_frac");
  const std::size_t offset = count_param(spec, "sample_offset", 0);
  const double shock_above = spec.get_real("shock_above");
  const double smooth_below = spec.get_real("smooth_below");
  for (double q : amplitudes) {
    if (!(q > 0.0)) throw UsageError("parameter 'amplitudes': values must be > 0", "amplitudes");
  }

  std::vector<ScanRow> rows(amplitudes.size());
  parallel_for(amplitudes.size(), spec.jobs, [&](std::size_t i) {
    const double q = amplitudes[i];
    ScanRow& row = rows[i];
    row.q = q;
    GodunovConfig cfg;
    cfg.grid = grid;
    cfg.q = q;
    cfg.t_end = t_max;
    cfg.output_times = uniform_times(t_max, check_dt);
    const StateField u0 = sample(initial_data("cosine", q), grid);
    const Trajectory traj = run(u0, cfg);
    for (const auto& snap : traj.snapshots) {
      const auto found = detect_shocks(snap, frac * q, offset);
      for (const auto& r : found) row.max_jump = std::max(row.max_jump, r.jump);
      if (!found.empty() && !row.detection) row.detection = snap.time();
    }
  });

  std::string table = "q,shock,detection_time,max_jump\n";
  auto& m = ctx.manifest;
  m.diag("no_shock_declared_up_to", t_max);
  m.diag("note", fmt::format("'no shock' means none detected for t <= {}", format_number(t_max)));
  m.diag("columns", "q,shock,detection_time,max_jump");
  for (const auto& r : rows) {
    const std::string when = r.detection ? format_number(*r.detection) : "none";
    table += fmt::format("{},{},{},{}\n", r.q, r.detection ? "yes" : "no", when, r.max_jump);
    m.diag("row", fmt::format("{},{},{},{}", format_number(r.q), r.detection ? "yes" : "no", when,
                              format_number(r.max_jump)));
    const std::string name = fmt::format("q_{}", format_number(r.q));
    if (r.q > shock_above) {
      ctx.checks.push_back({"shock." + name, r.detection.has_value(), r.detection.value_or(t_max), t_max,
                            "expected to break"});
    } else if (r.q < smooth_below) {
      ctx.checks.push_back({"smooth." + name, !r.detection, r.detection.value_or(t_max), t_max,
                            "expected no shock up to t_max"});
    } else {
      m.diag("indecisive." + name, r.detection ? "shock" : "none");
    }
  }
  ctx.file("threshold_scan.csv", table);
}

void run_entropy_check(Context& ctx) {
  const auto& spec = ctx.spec;
  const std::string data = spec.get_text("data");
  Setup s = godunov_setup(spec, data);
  const double t_end = positive(spec, "t_end");
  const std::size_t every = count_param(spec, "snapshot_steps");
  if (every > 10) throw UsageError("parameter 'snapshot_steps': at most 10", "snapshot_steps");
  const double tau = s.cfg.time_step();
  s.cfg.t_end = t_end;
  s.cfg.output_times = uniform_times(t_end, static_cast<double>(every) * tau);
  const Trajectory traj = run(s.u0, s.cfg);
  if (traj.final_time_step < tau) {
    ctx.manifest.diag("note", "time step was halved during the run; snapshot spacing refers to the initial step");
  }

  const auto lambdas = lambda_grid(traj.snapshots, count_param(spec, "lambdas", 2), spec.get_real("lambda_margin"));
  const auto bumps = bump_lattice(t_end, count_param(spec, "bump_rows"), count_param(spec, "bump_cols"),
                                  positive(spec, "bump_radius"));
  const double c_ent = positive(spec, "c_ent");
  const auto forward = entropy_residual(traj.snapshots, lambdas, bumps, tau, s.cfg.nonlocal, c_ent);
  const auto reversed = entropy_residual(time_reversed(traj.snapshots), lambdas, bumps, tau, s.cfg.nonlocal, c_ent);

  auto& m = ctx.manifest;
  m.diag("tau", tau);
  m.diag("snapshots", std::to_string(traj.snapshots.size()));
  m.diag("lambdas", join_numbers(lambdas));
  m.diag("tolerance_scale", forward.tolerance_scale);
  m.diag("threshold", forward.threshold());
  m.diag("min_integral", forward.min_integral);
  m.diag("reversed_min_integral", reversed.min_integral);
  ctx.checks.push_back(at_least("entropy_admissible", forward.min_integral, forward.threshold()));
  const double factor = positive(spec, "reversal_factor");
  ctx.checks.push_back(at_most("reversal_flagged", reversed.min_integral, factor * forward.threshold()));
}

double perturbation_shape(const std::string& name, double x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (name == "cos4") return std::cos(2.0 * two_pi * x);
  if (name == "sin2") return std::sin(two_pi * x);
  const double d = (x - 0.5) / 0.1;
  return std::exp(-d * d);
}

void run_l1_check(Context& ctx) {
  const auto& spec = ctx.spec;
  const auto bases = spec.get_texts("data");
  const auto shapes = spec.get_texts("perturbations");
  const double size = spec.get_real("size");
  const double t_end = positive(spec, "t_end");
  const double dt_out = positive(spec, "dt_out");
  const double slack = spec.get_real("slack");
  if (size == 0.0) throw UsageError("parameter 'size': must be nonzero", "size");

  const std::size_t count = bases.size() * shapes.size();
  std::vector<StabilityReport> reports(count);
  parallel_for(count, spec.jobs, [&](std::size_t i) {
    Setup s = godunov_setup(spec, bases[i / shapes.size()]);
    const std::string& shape = shapes[i % shapes.size()];
    StateField v0 = s.u0;
    for (std::size_t k = 0; k < v0.size(); ++k) v0[k] += size * perturbation_shape(shape, s.grid.x(k));
    s.cfg.output_times = uniform_times(t_end, dt_out);
    reports[i] = l1_stability(s.u0, v0, t_end, s.cfg, slack);
  });

  std::string table = "data,perturbation,max_ratio\n";
  ctx.manifest.diag("columns", "data,perturbation,initial_distance,max_ratio,growth_rate");
  for (std::size_t i = 0; i < count; ++i) {
    const auto& b = bases[i / shapes.size()];
    const auto& sh = shapes[i % shapes.size()];
    const auto& r = reports[i];
    table += fmt::format("{},{},{}\n", b, sh, r.max_ratio);
    ctx.manifest.diag("row", fmt::format("{},{},{},{},{}", b, sh, format_number(r.initial_distance),
                                         format_number(r.max_ratio), format_number(r.growth_rate)));
    ctx.checks.push_back(at_most(fmt::format("gronwall.{}.{}", b, sh), r.max_ratio, 1.0 + slack));
  }
  ctx.file("l1_check.csv", table);
}

void run_phase_scan(Context& ctx) {
  const auto& spec = ctx.spec;
  const auto betas = spec.get_reals("betas");
  const std::size_t ny = count_param(spec, "y_count", 2);
  const std::size_t nz = count_param(spec, "z_count", 2);
  const double y_span = positive(spec, "y_span");
  const double z_span = positive(spec, "z_span");
  const double min_residual = spec.get_real("min_residual");
  const double eq_tol = positive(spec, "equilibrium_tolerance");

  std::vector<PhaseScanResult> scans(betas.size());
  parallel_for(betas.size(), spec.jobs, [&](std::size_t i) { scans[i] = phase_scan(betas[i], ny, nz, y_span, z_span); });

  std::string table = "beta,attempted,reached_end,min_residual,best_y0,best_z0\n";
  auto& m = ctx.manifest;
  m.diag("columns", "beta,attempted,reached_end,min_residual,best_y0,best_z0");
  for (const auto& r : scans) {
    const std::string row = fmt::format("{},{},{},{},{},{}", format_number(r.beta), r.attempted, r.reached_end,
                                        format_number(r.min_residual), format_number(r.best_y0),
                                        format_number(r.best_z0));
    table += row + "\n";
    m.diag("row", row);
    ctx.checks.push_back(at_least(fmt::format("residual_bounded.beta_{}", format_number(r.beta)), r.min_residual,
                                  min_residual));
    for (double y : phase_equilibria(r.beta)) {
      if (y == 0.0) continue;
      const auto t = phase_shoot(r.beta, y, 0.0);
      double drift = t.status == ShootStatus::reached_end ? 0.0 : std::numeric_limits<double>::infinity();
      for (const auto& sample : t.samples) drift = std::max(drift, std::hypot(sample.Y - y, sample.Z));
      ctx.checks.push_back(
          at_most(fmt::format("equilibrium.beta_{}.y_{}", format_number(r.beta), format_number(y)), drift, eq_tol));
    }
  }
  ctx.file("phase_scan.csv", table);
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::simulate: return "simulate";
    case Scenario::viscous: return "viscous";
    case Scenario::wave_branch: return "wave-branch";
    case Scenario::wave_evolve: return "wave-evolve";
    case Scenario::perturb: return "perturb";
    case Scenario::threshold_scan: return "threshold-scan";
    case Scenario::entropy_check: return "entropy-check";
    case Scenario::l1_check: return "l1-check";
    case Scenario::phase_scan: return "phase-scan";
  }
  return "simulate";
}

const std::vector<Scenario>& all_scenarios() {
  static const std::vector<Scenario> all = {
      Scenario::simulate,       Scenario::viscous,       Scenario::wave_branch,
      Scenario::wave_evolve,    Scenario::perturb,       Scenario::threshold_scan,
      Scenario::entropy_check,  Scenario::l1_check,      Scenario::phase_scan};
  return all;
}

Scenario parse_scenario(std::string_view name) {
  for (Scenario s : all_scenarios()) {
    if (to_string(s) == name) return s;
  }
  throw UsageError(fmt::format("unknown scenario '{}'", name));
}

const std::vector<ParamDef>& scenario_params(Scenario s) { return param_table().at(s); }

RunOutcome run_experiment(const ExperimentSpec& spec) {
  RunOutcome outcome;
  Context ctx{spec, {}, {}, spec.output_dir};
  try {
    std::filesystem::create_directories(spec.output_dir);
  } catch (const std::filesystem::filesystem_error& e) {
    outcome.exit_code = kExitUsage;
    outcome.message = fmt::format("cannot create output directory '{}': {}", spec.output_dir.string(), e.what());
    return outcome;
  }

  ctx.manifest.param("scenario", std::string(to_string(spec.scenario)));
  for (const auto& def : scenario_params(spec.scenario)) ctx.manifest.param(def.key, spec.params.at(def.key));

  try {
    switch (spec.scenario) {
      case Scenario::simulate: run_simulate(ctx); break;
      case Scenario::viscous: run_viscous_scenario(ctx); break;
      case Scenario::wave_branch: run_wave_branch(ctx); break;
      case Scenario::wave_evolve: run_wave_evolve(ctx); break;
      case Scenario::perturb: run_perturb(ctx); break;
      case Scenario::threshold_scan: run_threshold_scan(ctx); break;
      case Scenario::entropy_check: run_entropy_check(ctx); break;
      case Scenario::l1_check: run_l1_check(ctx); break;
      case Scenario::phase_scan: run_phase_scan(ctx); break;
    }
  } catch (const UsageError& e) {
    outcome.exit_code = kExitUsage;
    outcome.message = e.what();
    return outcome;
  } catch (const NumericalError& e) {
    outcome.exit_code = kExitNumerical;
    outcome.message = fmt::format("numerical failure: {}", e.what());
    ctx.manifest.diag("failure", e.what());
    ctx.manifest.diag("failure_time", e.time());
  } catch (const ContinuationStall& e) {
    outcome.exit_code = kExitNumerical;
    outcome.message = fmt::format("numerical failure: {} (last converged c={})", e.what(), format_number(e.last_c()));
    ctx.manifest.diag("failure", e.what());
  } catch (const std::invalid_argument& e) {
    outcome.exit_code = kExitUsage;
    outcome.message = e.what();
    return outcome;
  }

  outcome.checks = ctx.checks;
  outcome.manifest_path = spec.output_dir / "manifest.txt";
  write_text(outcome.manifest_path, ctx.manifest.render(outcome.checks));
  if (outcome.exit_code == kExitPass) {
    const bool all = std::all_of(outcome.checks.begin(), outcome.checks.end(), [](const auto& c) { return c.pass; });
    outcome.exit_code = all ? kExitPass : kExitCheckFailed;
  }
  return outcome;
}

}  // namespace fwlab
