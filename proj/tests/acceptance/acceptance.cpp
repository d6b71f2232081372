// Acceptance run: one PASS/FAIL line per criterion with its wall time.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fwlab/diagnostics.hpp"
#include "fwlab/experiment.hpp"
#include "fwlab/viscous.hpp"
#include "fwlab/waves.hpp"

using namespace fwlab;
namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double time_limit = 0.0;  // seconds, 0 = none
  std::function<Verdict()> body;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Verdict verdict(bool pass, std::string detail) { return {pass, std::move(detail)}; }

GodunovConfig godunov(std::size_t n, double q, double t_end, double dt, bool nonlocal = true) {
  GodunovConfig cfg;
  cfg.grid = PeriodicGrid(n);
  cfg.q = q;
  cfg.t_end = t_end;
  cfg.output_times = uniform_times(t_end, dt);
  cfg.nonlocal = nonlocal;
  return cfg;
}

TrackingResult track(const Trajectory& tr, double threshold) {
  TrackingOptions opts;
  opts.threshold = threshold;
  opts.window = 9;
  return track_shocks(tr.snapshots, opts);
}

const Trajectory& data1_trajectory() {
  static const Trajectory tr = [] {
    const auto cfg = godunov(1000, 2.0, 0.65, 0.01);
    return run(sample(initial_data("data1"), cfg.grid), cfg);
  }();
  return tr;
}

Verdict oracle_equivalence() {
  std::vector<double> errors;
  for (std::size_t n : {250u, 500u, 1000u}) {
    const PeriodicGrid g(n);
    const StateField u = sample([](double x) { return std::sin(kTwoPi * x); }, g);
    const StateField a = apply_nonlocal(HelmholtzSolver(g), u);
    const StateField b = apply_nonlocal_spectral(u);
    double e = 0.0;
    for (std::size_t k = 0; k < n; ++k) e = std::max(e, std::abs(a[k] - b[k]));
    errors.push_back(e);
  }
  const double r1 = errors[0] / errors[1], r2 = errors[1] / errors[2];
  const bool ok = r1 >= 3.6 && r1 <= 4.4 && r2 >= 3.6 && r2 <= 4.4;
  return verdict(ok, "ratios " + num(r1) + ", " + num(r2));
}

Verdict skew_symmetry() {
  const PeriodicGrid g(1000);
  const HelmholtzSolver solver(g);
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    StateField u(g);
    for (std::size_t k = 0; k < g.size(); ++k) u[k] = nd(rng);
    const double l2 = u.l2_norm();
    worst = std::max(worst, std::abs(inner_product(apply_nonlocal(solver, u), u)) / (l2 * l2));
  }
  return verdict(worst <= 1e-12, "max |<Au,u>|/|u|^2 = " + num(worst));
}

Verdict burgers_oracle() {
  const double h = 1e-3;
  const auto cfg = godunov(1000, 1.0, 0.3, 0.01, false);
  const Trajectory shock = run(sample([](double x) { return x < 0.5 ? 1.0 : 0.0; }, cfg.grid), cfg);
  const auto tracking = track(shock, 0.25);
  double speed = std::numeric_limits<double>::quiet_NaN();
  if (tracking.tracks.size() == 1) {
    double sum = 0.0;
    int count = 0;
    for (const auto& r : tracking.tracks[0].records) {
      if (r.speed_fit) {
        sum += *r.speed_fit;
        ++count;
      }
    }
    if (count > 0) speed = sum / count;
  }
  const bool speed_ok = std::abs(speed - 0.5) <= 2.0 * h;

  const Trajectory fan = run(sample([](double x) { return x < 0.5 ? -1.0 : 1.0; }, cfg.grid), cfg);
  const StateField exact = sample([](double x) { return std::clamp((x - 0.5) / 0.3, -1.0, 1.0); }, cfg.grid);
  const double l1 = l1_distance(fan.snapshots.back(), exact);
  return verdict(speed_ok && l1 <= 0.05, "shock speed " + num(speed) + ", rarefaction L1 error " + num(l1));
}

Verdict single_shock() {
  const auto& tr = data1_trajectory();
  const double threshold = default_shock_threshold(tr.snapshots.front());
  std::size_t most = 0;
  double t_star = -1.0;
  for (const auto& s : tr.snapshots) {
    const auto found = detect_shocks(s, threshold);
    most = std::max(most, found.size());
    if (!found.empty() && t_star < 0.0) t_star = s.time();
  }
  const auto tracking = track(tr, threshold);
  if (tracking.tracks.size() != 1) return verdict(false, std::to_string(tracking.tracks.size()) + " tracks");
  std::vector<ShockRecord> settled;
  for (const auto& r : tracking.tracks[0].records) {
    if (r.t >= t_star + 0.05 - 1e-9) settled.push_back(r);
  }
  const auto mono = jump_monotonicity(settled);
  const bool ok = most == 1 && t_star > 0.0 && t_star < 0.65 && mono.pass;
  return verdict(ok, "t* = " + num(t_star) + ", decreasing fraction " + num(mono.fraction) + " over " +
                         std::to_string(mono.pairs) + " pairs");
}

Verdict merging_shocks() {
  const auto cfg = godunov(1000, 0.5, 3.0, 0.01);
  const StateField u0 = sample(initial_data("data2"), cfg.grid);
  const auto tracking = track(run(u0, cfg), default_shock_threshold(u0));
  std::size_t most = 0;
  bool decreased = false;
  for (std::size_t i = 0; i < tracking.open_counts.size(); ++i) {
    most = std::max(most, tracking.open_counts[i]);
    if (i > 0 && tracking.open_counts[i] < tracking.open_counts[i - 1]) decreased = true;
  }
  const bool ok = most >= 2 && decreased && tracking.merge_events >= 1;
  return verdict(ok, "max simultaneous " + std::to_string(most) + ", merges " + std::to_string(tracking.merge_events));
}

Verdict rankine_hugoniot() {
  const auto& tr = data1_trajectory();
  const auto tracking = track(tr, default_shock_threshold(tr.snapshots.front()));
  if (tracking.tracks.size() != 1) return verdict(false, "expected one track");
  const double defect = mean_rankine_hugoniot_defect(tracking.tracks[0], 9);
  return verdict(defect <= 5e-3, "mean |speed - (u+ + u-)/2| = " + num(defect) + " (5h = 0.005)");
}

Verdict entropy_admissibility() {
  auto cfg = godunov(1000, 2.0, 0.65, 1.0);
  const double tau = cfg.time_step();
  cfg.output_times = uniform_times(0.65, 5.0 * tau);
  const Trajectory tr = run(sample(initial_data("data1"), cfg.grid), cfg);
  const auto lambdas = lambda_grid(tr.snapshots, 9, 0.5);
  const auto bumps = bump_lattice(0.65, 3, 4, 0.1);
  const auto forward = entropy_residual(tr.snapshots, lambdas, bumps, tau);
  const auto reversed = entropy_residual(time_reversed(tr.snapshots), lambdas, bumps, tau);
  const bool ok = forward.pass() && reversed.min_integral <= 10.0 * forward.threshold();
  return verdict(ok, "min " + num(forward.min_integral) + " vs threshold " + num(forward.threshold()) +
                         " (C_ent " + num(forward.c_ent) + "), reversed " + num(reversed.min_integral));
}

double perturbation(const std::string& shape, double x) {
  if (shape == "cos4") return std::cos(2.0 * kTwoPi * x);
  if (shape == "sin2") return std::sin(kTwoPi * x);
  const double d = (x - 0.5) / 0.1;
  return std::exp(-d * d);
}

Verdict gronwall() {
  double worst = 0.0;
  for (const char* base : {"data1", "data2"}) {
    const double q = std::string(base) == "data1" ? 2.0 : 0.5;
    const auto cfg = godunov(1000, q, 0.5, 0.025);
    const StateField u0 = sample(initial_data(base), cfg.grid);
    for (const char* shape : {"cos4", "sin2", "bump"}) {
      StateField v0 = u0;
      for (std::size_t k = 0; k < v0.size(); ++k) v0[k] += 0.01 * perturbation(shape, cfg.grid.x(k));
      worst = std::max(worst, l1_stability(u0, v0, 0.5, cfg).max_ratio);
    }
  }
  return verdict(worst <= 1.2, "max ratio " + num(worst) + " over 6 pairs");
}

Verdict viscous_estimates() {
  const PeriodicGrid g(1000);
  const StateField u0 = sample(initial_data("data1"), g);
  const auto gcfg = godunov(1000, 2.0, 0.5, 0.5);
  const StateField reference = run(u0, gcfg).snapshots.back();
  const double t_end = 0.65;
  std::vector<double> distances;
  double worst_increase = 0.0, worst_excess = -1e300;
  for (double eps : {1e-2, 3e-3, 1e-3}) {
    ViscousConfig cfg;
    cfg.grid = g;
    cfg.epsilon = eps;
    cfg.t_end = t_end;
    cfg.output_times = {0.0, 0.5, t_end};
    const auto r = run_viscous(u0, cfg);
    for (std::size_t i = 1; i < r.ledger.l2_half.size(); ++i) {
      const double prev = r.ledger.l2_half[i - 1];
      worst_increase = std::max(worst_increase, (r.ledger.l2_half[i] - prev) / prev);
    }
    for (const auto& d : r.trajectory.diagnostics) {
      if (d.t == 0.0) continue;
      const double m = std::max(std::abs(d.max), std::abs(d.min));
      worst_excess = std::max(worst_excess, m - (u0.max_abs() + d.t * u0.l2_norm()));
    }
    distances.push_back(l1_distance(r.trajectory.snapshots[1], reference));
  }
  const bool decreasing = distances[1] < distances[0] && distances[2] < distances[1];
  const bool ok = worst_increase <= 1e-8 && worst_excess <= 0.0 && decreasing;
  return verdict(ok, "max relative L2 increase " + num(worst_increase) + ", max bound margin " + num(-worst_excess) +
                         ", L1 to Godunov " + num(distances[0]) + " > " + num(distances[1]) + " > " +
                         num(distances[2]));
}

Verdict bifurcation() {
  const double c1 = bifurcation_speed(1);
  const double exact = 1.0 / (1.0 + 4.0 * std::numbers::pi * std::numbers::pi);
  const PeriodicGrid g(1000);
  const auto branch = continue_branch(0.025, 0.0269, 20, g);
  double worst = 0.0, smallest = 1e300;
  bool increasing = true;
  for (std::size_t i = 0; i < branch.size(); ++i) {
    worst = std::max(worst, wave_equation_residual(branch[i].c, g, branch[i].V));
    smallest = std::min(smallest, branch[i].amplitude());
    if (i > 0) increasing = increasing && branch[i].amplitude() > branch[i - 1].amplitude();
  }
  const auto ends = branch_endpoints(branch.front());
  const bool ok = std::abs(c1 - exact) <= 1e-12 && smallest > 1e-6 && increasing && worst < 1e-12 &&
                  ends.upper >= 0.0267 && ends.upper <= 0.0271;
  return verdict(ok, "c1 = " + num(c1) + ", upper endpoint " + num(ends.upper) + ", max residual " + num(worst) +
                         ", smallest amplitude " + num(smallest));
}

const WaveProfile& wave_0255() {
  static const WaveProfile p = branch_profile(0.0255, PeriodicGrid(1000));
  return p;
}

Verdict wave_translation() {
  const auto& p = wave_0255();
  const auto ev = evolve_wave_as_initial_data(p, 30.0, Disturbance::none, 0.0, 30.0);
  const auto& last = ev.trajectory.snapshots.back();
  const double rel = l1_distance(last, translated_profile(p, p.c * last.time())) / p.profile_field().l1_norm();
  return verdict(rel <= 0.05, "relative L1 error at t = 30: " + num(rel));
}

Verdict perturbation_stability() {
  const auto& p = wave_0255();
  const auto ref = evolve_wave_as_initial_data(p, 300.0, Disturbance::none, 0.0, 300.0);
  const auto ev = evolve_wave_as_initial_data(p, 300.0, Disturbance::asymmetric, 0.05, 300.0);
  std::vector<OrbitSample> curve, points;
  for (std::size_t i = 0; i < ref.orbit.size(); i += std::max<std::size_t>(1, ref.orbit.size() / 4000)) {
    curve.push_back(ref.orbit[i]);
  }
  for (std::size_t i = 0; i < ev.orbit.size(); i += std::max<std::size_t>(1, ev.orbit.size() / 8000)) {
    points.push_back(ev.orbit[i]);
  }
  const double d = max_distance_to_curve(points, curve);
  return verdict(d <= 3.0 * ev.delta, "max orbit distance " + num(d) + " = " + num(d / ev.delta) + " delta");
}

std::optional<double> breaking_time(double q) {
  const auto cfg = godunov(1000, q, 50.0, 0.1);
  const Trajectory tr = run(sample(initial_data("cosine", q), cfg.grid), cfg);
  for (const auto& s : tr.snapshots) {
    if (!detect_shocks(s, 0.5 * q).empty()) return s.time();
  }
  return std::nullopt;
}

Verdict threshold_scan() {
  const auto big = breaking_time(0.02);
  const auto small = breaking_time(0.005);
  const bool ok = big.has_value() && !small.has_value();
  return verdict(ok, "q = 0.02: " + (big ? "shock at t = " + num(*big) : std::string("none")) +
                         "; q = 0.005: " + (small ? "shock at t = " + num(*small) : std::string("none up to t = 50")));
}

Verdict phase_plane() {
  double smallest = 1e300, drift = 0.0;
  std::size_t fewest = std::numeric_limits<std::size_t>::max();
  for (double beta : {-1.0, -0.4, 0.0, 0.5, 1.0}) {
    const auto r = phase_scan(beta, 20, 11, 3.0, 3.0);
    smallest = std::min(smallest, r.min_residual);
    fewest = std::min(fewest, r.attempted);
    for (double y : phase_equilibria(beta)) {
      if (y == 0.0) continue;
      const auto t = phase_shoot(beta, y, 0.0);
      if (t.status != ShootStatus::reached_end) drift = std::numeric_limits<double>::infinity();
      for (const auto& s : t.samples) drift = std::max(drift, std::hypot(s.Y - y, s.Z));
    }
  }
  const bool ok = fewest >= 200 && smallest > 1e-2 && drift <= 1e-8;
  return verdict(ok, "min residual " + num(smallest) + " over " + std::to_string(fewest) +
                         " starts per beta, equilibrium drift " + num(drift));
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "fwlab_acceptance_determinism";
  fs::remove_all(root);
  std::vector<fs::path> dirs{root / "a", root / "b"};
  for (const auto& d : dirs) {
    auto spec = resolve_spec(Scenario::simulate, {}, {});
    spec.output_dir = d;
    if (run_experiment(spec).exit_code != kExitPass) return verdict(false, "simulate run failed");
  }
  std::size_t files = 0, differ = 0;
  for (const auto& e : fs::directory_iterator(dirs[0])) {
    if (e.path().extension() != ".csv") continue;
    ++files;
    const auto other = dirs[1] / e.path().filename();
    if (!fs::exists(other) || read_file(e.path()) != read_file(other)) ++differ;
  }
  fs::remove_all(root);
  return verdict(files > 0 && differ == 0, std::to_string(files) + " CSV files, " + std::to_string(differ) + " differ");
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"nonlocal operator matches spectral oracle at second order", 1.0, oracle_equivalence},
      {"discrete nonlocal operator is skew-symmetric", 0.0, skew_symmetry},
      {"Burgers Riemann shock speed and rarefaction", 5.0, burgers_oracle},
      {"data1 forms one shock with decreasing jump", 30.0, single_shock},
      {"data2 shocks coexist and merge", 60.0, merging_shocks},
      {"shock speed follows the jump relation", 0.0, rankine_hugoniot},
      {"entropy inequality holds and time reversal is flagged", 0.0, entropy_admissibility},
      {"L1 distance within the Gronwall bound", 0.0, gronwall},
      {"viscous energy, max bound and vanishing viscosity", 120.0, viscous_estimates},
      {"bifurcation speed and traveling-wave branch", 30.0, bifurcation},
      {"traveling wave translates at its speed", 0.0, wave_translation},
      {"disturbed wave stays near the undisturbed orbit", 300.0, perturbation_stability},
      {"cosine data shock threshold", 0.0, threshold_scan},
      {"no single-shock periodic wave in the phase plane", 0.0, phase_plane},
      {"repeated runs are byte-identical", 0.0, determinism},
  };

  int failures = 0;
  double total = 0.0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.body();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    total += secs;
    if (c.time_limit > 0.0 && secs > c.time_limit) {
      v.pass = false;
      v.detail += "; runtime over " + num(c.time_limit) + " s";
    }
    if (!v.pass) ++failures;
    std::printf("%s  %-58s %8.2f s  %s\n", v.pass ? "PASS" : "FAIL", c.name.c_str(), secs, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed, %.2f s total\n", criteria.size(), failures, total);
  return failures == 0 ? 0 : 1;
}
