#include "fwlab/waves.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

#include "fwlab/cyclic_tridiagonal.hpp"
#include "fwlab/helmholtz.hpp"

namespace fwlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

void wave_residual_into(double c, const PeriodicGrid& grid, const std::vector<double>& V, std::vector<double>& F) {
  const std::size_t n = grid.size();
  const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
  F.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lap = (V[grid.next(k)] - 2.0 * V[k] + V[grid.prev(k)]) * inv_h2;
    F[k] = V[k] - lap + c - std::sqrt(c * c + 2.0 * V[k]);
  }
}

bool discriminant_positive(double c, const std::vector<double>& V) {
  const double c2 = c * c;
  return std::all_of(V.begin(), V.end(), [c2](double v) { return c2 + 2.0 * v > 0.0; });
}

WaveProfile make_profile(double c, const PeriodicGrid& grid, std::vector<double> V, double residual, int iters) {
  WaveProfile p;
  p.c = c;
  p.grid = grid;
  p.U.resize(V.size());
  p.discriminant_min = c * c + 2.0 * V[0];
  for (std::size_t k = 0; k < V.size(); ++k) {
    const double d = c * c + 2.0 * V[k];
    p.discriminant_min = std::min(p.discriminant_min, d);
    p.U[k] = c - std::sqrt(d);
  }
  p.V = std::move(V);
  p.residual = residual;
  p.newton_iterations = iters;
  return p;
}

}  // namespace

double bifurcation_speed(int n_mode) {
  if (n_mode < 1) throw std::invalid_argument("bifurcation_speed: mode must be >= 1");
  const double w = kTwoPi * n_mode;
  return 1.0 / (1.0 + w * w);
}

double discrete_bifurcation_speed(int n_mode, const PeriodicGrid& grid) {
  if (n_mode < 1) throw std::invalid_argument("discrete_bifurcation_speed: mode must be >= 1");
  const double h = grid.spacing();
  const double lambda = 2.0 * (1.0 - std::cos(kTwoPi * n_mode * h)) / (h * h);
  return 1.0 / (1.0 + lambda);
}

double WaveProfile::amplitude() const {
  const auto [lo, hi] = std::minmax_element(U.begin(), U.end());
  return *hi - *lo;
}

double wave_equation_residual(double c, const PeriodicGrid& grid, const std::vector<double>& V) {
  if (V.size() != grid.size()) throw std::invalid_argument("wave_equation_residual: size mismatch");
  if (!discriminant_positive(c, V)) return std::numeric_limits<double>::infinity();
  std::vector<double> F;
  wave_residual_into(c, grid, V, F);
  return max_abs(F);
}

double profile_equation_residual(const WaveProfile& profile) {
  const HelmholtzSolver solver(profile.grid);
  std::vector<double> w(profile.U.size());
  solver.invert(profile.U, w);
  double r = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double u = profile.U[k];
    r = std::max(r, std::abs(-profile.c * u + 0.5 * u * u + w[k]));
  }
  return r;
}

WaveSolution solve_wave(double c, const std::vector<double>& seed, const PeriodicGrid& grid,
                        const NewtonOptions& options) {
  if (!(c > 0.0)) throw std::invalid_argument("solve_wave: speed must be > 0");
  if (seed.size() != grid.size()) throw std::invalid_argument("solve_wave: seed length does not match grid");

  const std::size_t n = grid.size();
  const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
  const double c2 = c * c;

  WaveSolution out;
  std::vector<double> V = seed;
  // Pull an inadmissible seed back inside the square-root domain.
  for (double& v : V) v = std::max(v, -0.49 * c2);

  std::vector<double> F, trial_F, trial(n), delta(n), diag(n);
  const std::vector<double> off(n, -inv_h2);
  wave_residual_into(c, grid, V, F);
  double norm = max_abs(F);

  for (int it = 0; it <= options.max_iterations; ++it) {
    out.iterations = it;
    out.residual = norm;
    if (norm < options.tolerance) {
      if (max_abs(V) < options.trivial_amplitude) {
        out.status = WaveStatus::trivial_branch;
        out.message = "converged to V = 0";
      } else {
        out.status = WaveStatus::converged;
        out.profile = make_profile(c, grid, std::move(V), norm, it);
      }
      return out;
    }
    if (it == options.max_iterations) break;

    for (std::size_t k = 0; k < n; ++k) diag[k] = 1.0 + 2.0 * inv_h2 - 1.0 / std::sqrt(c2 + 2.0 * V[k]);
    const CyclicTridiagonal jac(off, diag, off);
    jac.solve(F, delta);
    if (!std::all_of(delta.begin(), delta.end(), [](double d) { return std::isfinite(d); })) {
      out.message = "singular Newton system";
      return out;
    }

    double alpha = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving, alpha *= 0.5) {
      for (std::size_t k = 0; k < n; ++k) trial[k] = V[k] - alpha * delta[k];
      if (!discriminant_positive(c, trial)) continue;
      wave_residual_into(c, grid, trial, trial_F);
      const double trial_norm = max_abs(trial_F);
      if (trial_norm < norm || (alpha == 1.0 && trial_norm < 10.0 * norm)) {
        V.swap(trial);
        F.swap(trial_F);
        norm = trial_norm;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.message = "line search failed";
      return out;
    }
  }
  out.message = "Newton iteration limit reached";
  return out;
}

WaveSolution solve_wave(double c, const WaveProfile& seed, const NewtonOptions& options) {
  return solve_wave(c, seed.V, seed.grid, options);
}

std::vector<double> cosine_seed(const PeriodicGrid& grid, double amplitude) {
  std::vector<double> v(grid.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = amplitude * std::cos(kTwoPi * grid.x(k));
  return v;
}

WaveProfile branch_profile(double c, const PeriodicGrid& grid) {
  const double c1 = discrete_bifurcation_speed(1, grid);
  if (!(c > c1)) throw std::invalid_argument("branch_profile: speed must exceed the first bifurcation value");
  // Start close to c1 where the small-amplitude cosine is a good seed, then walk up.
  const double c_start = std::min(c, c1 + 2e-4);
  std::optional<WaveProfile> seed;
  for (double amp : {1e-4, 5e-5, 2e-5, 1.5e-4}) {
    auto s = solve_wave(c_start, cosine_seed(grid, amp), grid);
    if (s.status == WaveStatus::converged) {
      seed = std::move(s.profile);
      break;
    }
  }
  if (!seed) throw std::runtime_error("branch_profile: no nontrivial solution near the bifurcation value");
  if (c == c_start) return *seed;
  const int steps = std::max(2, static_cast<int>(std::ceil((c - c_start) / 1e-4)) + 1);
  return continue_branch(c_start, c, steps, *seed).back();
}

std::vector<WaveProfile> continue_branch(double c_start, double c_stop, int steps, const WaveProfile& seed,
                                         double min_step) {
  if (steps < 1) throw std::invalid_argument("continue_branch: steps must be >= 1");
  if (steps == 1 && c_start != c_stop) throw std::invalid_argument("continue_branch: one step needs c_start == c_stop");
  std::vector<WaveProfile> out;
  out.reserve(static_cast<std::size_t>(steps));

  auto first = solve_wave(c_start, seed);
  if (first.status != WaveStatus::converged) {
    throw ContinuationStall("continue_branch: no nontrivial solution at c_start", c_start);
  }
  out.push_back(std::move(*first.profile));

  const double spacing = steps > 1 ? (c_stop - c_start) / (steps - 1) : 0.0;
  for (int i = 1; i < steps; ++i) {
    const double target = c_start + spacing * i;
    WaveProfile current = out.back();
    double increment = target - current.c;
    // Halve the increment until Newton converges, then walk to the target.
    while (current.c != target) {
      if (std::abs(increment) < min_step) {
        throw ContinuationStall("continue_branch: step halving fell below the minimum step", current.c);
      }
      const double next_c = std::abs(target - current.c) <= std::abs(increment) ? target : current.c + increment;
      auto s = solve_wave(next_c, current);
      if (s.status == WaveStatus::converged) {
        current = std::move(*s.profile);
      } else {
        increment *= 0.5;
      }
    }
    out.push_back(std::move(current));
  }
  return out;
}

std::vector<WaveProfile> continue_branch(double c_start, double c_stop, int steps, const PeriodicGrid& grid) {
  const WaveProfile seed = branch_profile(c_start, grid);
  return continue_branch(c_start, c_stop, steps, seed);
}

BranchEndpoints branch_endpoints(const WaveProfile& start, double resolution) {
  BranchEndpoints ends;

  // Downward: step until Newton lands on V = 0 or fails, then bisect.
  {
    WaveProfile good = start;
    double step = 1e-4;
    while (step >= resolution) {
      auto s = solve_wave(good.c - step, good);
      if (s.status == WaveStatus::converged) {
        good = std::move(*s.profile);
      } else {
        step *= 0.5;
      }
    }
    ends.lower = good.c;
  }

  // Upward: stop at the peakon criterion or when continuation stalls.
  {
    WaveProfile good = start;
    double step = 1e-4;
    ends.upper_profiles.push_back(good);
    while (step >= resolution) {
      if (good.discriminant_min < kPeakonDiscriminantRatio * good.c * good.c) {
        ends.upper_by_discriminant = true;
        break;
      }
      auto s = solve_wave(good.c + step, good);
      if (s.status == WaveStatus::converged) {
        good = std::move(*s.profile);
        ends.upper_profiles.push_back(good);
      } else {
        step *= 0.5;
      }
    }
    ends.upper = good.c;
  }
  return ends;
}

double trivial_jacobian_relative_gap(double c, const PeriodicGrid& grid) {
  // The Jacobian at V = 0 is the circulant (1 - 1/c) I - D2: eigenvalues are
  // 1 - 1/c + 2(1 - cos(2 pi m h))/h^2, m = 0..n/2.
  const double h = grid.spacing();
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t m = 0; m <= grid.size() / 2; ++m) {
    const double e = std::abs(1.0 - 1.0 / c + 2.0 * (1.0 - std::cos(kTwoPi * static_cast<double>(m) * h)) / (h * h));
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  return lo / hi;
}

// ---------------------------------------------------------------------------

Disturbance parse_disturbance(const std::string& name) {
  if (name == "none") return Disturbance::none;
  if (name == "cos2") return Disturbance::cos2;
  if (name == "cos3") return Disturbance::cos3;
  if (name == "cos4") return Disturbance::cos4;
  if (name == "asym" || name == "asymmetric") return Disturbance::asymmetric;
  throw std::invalid_argument("unknown perturbation '" + name + "' (expected none, cos2, cos3, cos4, asym)");
}

std::string to_string(Disturbance d) {
  switch (d) {
    case Disturbance::none: return "none";
    case Disturbance::cos2: return "cos2";
    case Disturbance::cos3: return "cos3";
    case Disturbance::cos4: return "cos4";
    case Disturbance::asymmetric: return "asym";
  }
  return "none";
}

double disturbance_value(Disturbance d, double x) {
  switch (d) {
    case Disturbance::none: return 0.0;
    case Disturbance::cos2: return std::cos(2.0 * kTwoPi * x);
    case Disturbance::cos3: return std::cos(3.0 * kTwoPi * x);
    case Disturbance::cos4: return std::cos(4.0 * kTwoPi * x);
    case Disturbance::asymmetric: return x < 0.5 ? 1.0 - std::cos(2.0 * kTwoPi * x) : 0.0;
  }
  return 0.0;
}

std::pair<std::size_t, std::size_t> orbit_probe_cells(const PeriodicGrid& grid) {
  const std::size_t n = grid.size();
  return {(300 * n) / 1000 % n, (600 * n) / 1000 % n};
}

WaveEvolution evolve_wave_as_initial_data(const WaveProfile& profile, double t_end, Disturbance disturbance,
                                          double delta_fraction, double snapshot_dt) {
  if (profile.U.size() != profile.grid.size()) throw std::invalid_argument("evolve_wave: invalid profile");
  const PeriodicGrid& grid = profile.grid;
  WaveEvolution ev;
  ev.delta = disturbance == Disturbance::none ? 0.0 : delta_fraction * profile.amplitude();
  std::tie(ev.probe_a, ev.probe_b) = orbit_probe_cells(grid);

  StateField u0(grid, profile.U);
  for (std::size_t k = 0; k < grid.size(); ++k) u0[k] += ev.delta * disturbance_value(disturbance, grid.x(k));

  GodunovConfig cfg;
  cfg.grid = grid;
  cfg.q = std::max(u0.max_abs(), 1e-12);
  cfg.t_end = t_end;
  cfg.output_times = uniform_times(t_end, snapshot_dt);

  ev.orbit.push_back({0, 0.0, u0[ev.probe_a], u0[ev.probe_b]});
  std::size_t steps = 0;
  ev.trajectory = run(u0, cfg, [&](const StateField& u) {
    ++steps;
    ev.orbit.push_back({steps, u.time(), u[ev.probe_a], u[ev.probe_b]});
  });
  return ev;
}

StateField translated_profile(const WaveProfile& profile, double shift) {
  const PeriodicGrid& grid = profile.grid;
  const std::size_t n = grid.size();
  StateField out(grid);
  for (std::size_t k = 0; k < n; ++k) {
    double s = (grid.x(k) - shift) * static_cast<double>(n);
    s -= std::floor(s / static_cast<double>(n)) * static_cast<double>(n);
    const double base = std::floor(s);
    const double frac = s - base;
    const std::size_t i = grid.wrap(static_cast<long long>(base));
    out[k] = (1.0 - frac) * profile.U[i] + frac * profile.U[grid.next(i)];
  }
  return out;
}

double max_distance_to_curve(const std::vector<OrbitSample>& points, const std::vector<OrbitSample>& curve) {
  if (curve.empty()) throw std::invalid_argument("max_distance_to_curve: empty curve");
  double worst = 0.0;
  for (const auto& p : points) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const auto& a = curve[i];
      const auto& b = curve[i + 1 < curve.size() ? i + 1 : i];
      const double dx = b.u_a - a.u_a;
      const double dy = b.u_b - a.u_b;
      const double len2 = dx * dx + dy * dy;
      double s = len2 > 0.0 ? ((p.u_a - a.u_a) * dx + (p.u_b - a.u_b) * dy) / len2 : 0.0;
      s = std::clamp(s, 0.0, 1.0);
      const double ex = a.u_a + s * dx - p.u_a;
      const double ey = a.u_b + s * dy - p.u_b;
      best = std::min(best, ex * ex + ey * ey);
    }
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

// ---------------------------------------------------------------------------

double PhaseTrajectory::residual_norm() const {
  if (status != ShootStatus::reached_end) return std::numeric_limits<double>::infinity();
  return std::hypot(residual_y, residual_z);
}

std::vector<double> phase_equilibria(double beta) {
  const double disc = 2.0 * beta + 1.0;
  if (disc < 0.0) return {};
  if (disc == 0.0) return {-1.0};
  return {-1.0 - std::sqrt(disc), -1.0 + std::sqrt(disc)};
}

PhaseTrajectory phase_shoot(double beta, double y0, double z0, const ShootOptions& options) {
  if (!(y0 != 0.0) || !std::isfinite(y0) || !std::isfinite(z0)) {
    throw std::invalid_argument("phase_shoot: need finite y0 != 0 and finite z0");
  }
  namespace ode = boost::numeric::odeint;
  using State = std::array<double, 2>;  // (W, Z), W = Y^2 / 2

  PhaseTrajectory traj;
  traj.beta = beta;
  double sign = y0 > 0.0 ? 1.0 : -1.0;
  auto rhs = [&](const State& q, State& dq, double) {
    dq[0] = q[1];
    dq[1] = q[0] + sign * std::sqrt(std::max(2.0 * q[0], 0.0)) - beta;
  };
  auto to_sample = [&](double x, const State& q) {
    return PhaseSample{x, sign * std::sqrt(std::max(2.0 * q[0], 0.0)), q[1]};
  };

  const std::size_t m = std::max<std::size_t>(options.samples, 2);
  auto sample_x = [m](std::size_t i) { return static_cast<double>(i) / static_cast<double>(m - 1); };
  std::size_t next_sample = 0;

  auto stepper = ode::make_dense_output(options.abs_tol, options.rel_tol, ode::runge_kutta_dopri5<State>());
  State q{0.5 * y0 * y0, z0};
  stepper.initialize(q, 0.0, 1e-4);
  traj.samples.push_back(to_sample(0.0, q));
  next_sample = 1;

  State tmp;
  constexpr std::size_t kMaxSteps = 2'000'000;
  for (std::size_t n_steps = 0; stepper.current_time() < 1.0; ++n_steps) {
    if (n_steps > kMaxSteps || stepper.current_time_step() < 1e-15) {
      traj.status = ShootStatus::integrator_failure;
      traj.end_x = stepper.current_time();
      return traj;
    }
    const auto [x0, x1] = stepper.do_step(rhs);
    const State& end = stepper.current_state();

    if (end[0] < 0.0) {
      // Y reached zero inside the step: locate it by bisection on W.
      double lo = x0, hi = x1;
      for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        stepper.calc_state(mid, tmp);
        (tmp[0] > 0.0 ? lo : hi) = mid;
      }
      const double xc = lo;
      State at;
      stepper.calc_state(xc, at);
      while (next_sample < m && sample_x(next_sample) <= xc) {
        stepper.calc_state(sample_x(next_sample), tmp);
        traj.samples.push_back(to_sample(sample_x(next_sample), tmp));
        ++next_sample;
      }
      traj.end_x = xc;
      if (std::abs(at[1]) > options.crossing_tolerance) {
        traj.status = ShootStatus::singular_crossing;
        return traj;
      }
      // Passing through the origin needs Z to grow again on the far side.
      if (!(beta < 0.0)) {
        traj.status = ShootStatus::integrator_failure;
        return traj;
      }
      traj.zero_crossings.push_back(xc);
      sign = -sign;
      State restart{0.0, 0.0};
      stepper.initialize(restart, xc, 1e-6);
      continue;
    }

    while (next_sample < m && sample_x(next_sample) <= x1) {
      stepper.calc_state(sample_x(next_sample), tmp);
      traj.samples.push_back(to_sample(sample_x(next_sample), tmp));
      ++next_sample;
    }
    if (std::sqrt(2.0 * end[0]) > options.y_max || !std::isfinite(end[0]) || !std::isfinite(end[1])) {
      traj.status = ShootStatus::no_return;
      traj.end_x = x1;
      return traj;
    }
  }

  traj.status = ShootStatus::reached_end;
  traj.end_x = 1.0;
  const PhaseSample& first = traj.samples.front();
  const PhaseSample& last = traj.samples.back();
  traj.residual_y = last.Y + first.Y;
  traj.residual_z = last.Z - first.Z;
  return traj;
}

PhaseScanResult phase_scan(double beta, std::size_t y_count, std::size_t z_count, double y_span, double z_span,
                           const ShootOptions& options) {
  if (y_count < 2 || z_count < 2) throw std::invalid_argument("phase_scan: need at least 2 points per axis");
  PhaseScanResult res;
  res.beta = beta;
  res.min_residual = std::numeric_limits<double>::infinity();
  ShootOptions opts = options;
  opts.samples = 2;
  for (std::size_t i = 0; i < y_count; ++i) {
    const double y0 = -y_span + 2.0 * y_span * static_cast<double>(i) / static_cast<double>(y_count - 1);
    if (std::abs(y0) < 1e-12) continue;
    for (std::size_t j = 0; j < z_count; ++j) {
      const double z0 = -z_span + 2.0 * z_span * static_cast<double>(j) / static_cast<double>(z_count - 1);
      ++res.attempted;
      const PhaseTrajectory t = phase_shoot(beta, y0, z0, opts);
      if (t.status != ShootStatus::reached_end) continue;
      ++res.reached_end;
      const double r = t.residual_norm();
      if (r < res.min_residual) {
        res.min_residual = r;
        res.best_y0 = y0;
        res.best_z0 = z0;
      }
    }
  }
  return res;
}

}  // namespace fwlab
