#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "fwlab/waves.hpp"

using namespace fwlab;

namespace {

const PeriodicGrid& grid1000() {
  static const PeriodicGrid g(1000);
  return g;
}

const std::vector<WaveProfile>& branch() {
  static const std::vector<WaveProfile> b = continue_branch(0.025, 0.0269, 20, grid1000());
  return b;
}

}  // namespace

TEST_CASE("bifurcation speeds") {
  // 1 / (1 + 4 pi^2) and 1 / (1 + 16 pi^2) to 17 digits
  CHECK(std::abs(bifurcation_speed(1) - 0.024704523031857640) < 1e-15);
  CHECK(std::abs(bifurcation_speed(2) - 0.0062927248321257040) < 1e-15);
  const double discrete = discrete_bifurcation_speed(1, grid1000());
  CHECK(discrete > bifurcation_speed(1));
  CHECK(discrete - bifurcation_speed(1) < 1e-6);
  CHECK_THROWS_AS(bifurcation_speed(0), std::invalid_argument);
}

TEST_CASE("trivial Jacobian becomes singular at the discrete bifurcation speed") {
  const double c1 = discrete_bifurcation_speed(1, grid1000());
  CHECK(trivial_jacobian_relative_gap(c1, grid1000()) < 1e-12);
  CHECK(trivial_jacobian_relative_gap(c1 * (1.0 + 1e-6), grid1000()) < 1e-10);
  CHECK(trivial_jacobian_relative_gap(0.02, grid1000()) > 1e-6);
}

TEST_CASE("below the first bifurcation speed Newton falls onto V = 0") {
  const auto sol = solve_wave(0.02, cosine_seed(grid1000(), 1e-3), grid1000());
  CHECK(sol.status == WaveStatus::trivial_branch);
  CHECK(sol.residual < 1e-12);
  CHECK_THROWS_AS(branch_profile(0.02, grid1000()), std::invalid_argument);
}

TEST_CASE("continuation over the first branch") {
  const auto& b = branch();
  REQUIRE(b.size() == 20);
  CHECK(b.front().c == doctest::Approx(0.025));
  CHECK(b.back().c == doctest::Approx(0.0269));
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto& p = b[i];
    CAPTURE(p.c);
    CHECK(p.amplitude() > 1e-3);
    CHECK(p.residual < 1e-12);
    CHECK(wave_equation_residual(p.c, p.grid, p.V) == doctest::Approx(p.residual));
    CHECK(profile_equation_residual(p) < 1e-8);
    CHECK(p.discriminant_min > 0.0);
    if (i > 0) CHECK(p.amplitude() > b[i - 1].amplitude());
    for (std::size_t k = 0; k < p.U.size(); ++k) {
      CHECK(p.U[k] == doctest::Approx(p.c - std::sqrt(p.c * p.c + 2.0 * p.V[k])).epsilon(1e-14));
    }
  }
}

TEST_CASE("branch profiles are even about their crest") {
  // the crest may drift off x = 0 along the translation mode; remove the phase first
  const auto& p = branch()[10];
  const std::size_t n = p.V.size();
  auto mode = [&](int m) {
    std::complex<double> c = 0.0;
    for (std::size_t k = 0; k < n; ++k) c += p.V[k] * std::polar(1.0, -2.0 * std::numbers::pi * m * p.grid.x(k));
    return c / static_cast<double>(n);
  };
  const double phase = std::arg(mode(1));
  const double first = std::abs(mode(1));
  for (int m = 1; m <= 8; ++m) {
    const std::complex<double> aligned = mode(m) * std::polar(1.0, -m * phase);
    CHECK(std::abs(aligned.imag()) < 1e-9 * first);
  }
}

TEST_CASE("profile and wave equations agree") {
  // V = -(1 - D2)^{-1} U on a converged profile
  const auto& p = branch()[5];
  const HelmholtzSolver solver(p.grid);
  std::vector<double> w(p.U.size());
  solver.invert(p.U, w);
  for (std::size_t k = 0; k < w.size(); ++k) CHECK(std::abs(w[k] + p.V[k]) < 1e-10);
}

TEST_CASE("near the corner limit the discriminant almost closes") {
  const auto& last = branch().back();
  CHECK(last.discriminant_min / (last.c * last.c) <= 0.1);
}

TEST_CASE("branch endpoints") {
  const auto ends = branch_endpoints(branch().front());
  CHECK(std::abs(ends.lower - discrete_bifurcation_speed(1, grid1000())) < 1e-5);
  CHECK(ends.upper >= 0.0267);
  CHECK(ends.upper <= 0.0271);
  CHECK(ends.upper_by_discriminant);
}

TEST_CASE("continuation arguments") {
  CHECK_THROWS_AS(continue_branch(0.025, 0.026, 0, grid1000()), std::invalid_argument);
  CHECK_THROWS_AS(solve_wave(-1.0, cosine_seed(grid1000(), 1e-3), grid1000()), std::invalid_argument);
}

TEST_CASE("disturbances") {
  CHECK(parse_disturbance("asym") == Disturbance::asymmetric);
  CHECK(parse_disturbance("asymmetric") == Disturbance::asymmetric);
  CHECK(to_string(parse_disturbance("cos3")) == "cos3");
  CHECK_THROWS_AS(parse_disturbance("cos5"), std::invalid_argument);
  CHECK(disturbance_value(Disturbance::asymmetric, 0.25) == doctest::Approx(2.0));
  CHECK(disturbance_value(Disturbance::asymmetric, 0.75) == 0.0);
  CHECK(disturbance_value(Disturbance::cos2, 0.25) == doctest::Approx(-1.0));
  CHECK(disturbance_value(Disturbance::none, 0.3) == 0.0);
}

TEST_CASE("translation and orbit geometry helpers") {
  const auto& p = branch()[3];
  const StateField same = translated_profile(p, 0.0);
  const StateField full = translated_profile(p, 1.0);
  const StateField cell = translated_profile(p, p.grid.spacing());
  for (std::size_t k = 0; k < p.U.size(); ++k) {
    CHECK(same[k] == doctest::Approx(p.U[k]));
    CHECK(full[k] == doctest::Approx(p.U[k]));
    CHECK(cell[p.grid.next(k)] == doctest::Approx(p.U[k]));
  }
  const std::vector<OrbitSample> curve{{0, 0, 0.0, 0.0}, {1, 1, 1.0, 0.0}, {2, 2, 1.0, 1.0}};
  CHECK(max_distance_to_curve({{0, 0, 0.5, 0.2}}, curve) == doctest::Approx(0.2));
  CHECK(max_distance_to_curve({{0, 0, 2.0, 0.5}, {0, 0, 0.3, 0.0}}, curve) == doctest::Approx(1.0));
  const auto [a, b] = orbit_probe_cells(grid1000());
  CHECK(a == 300);
  CHECK(b == 600);
}

TEST_CASE("a traveling wave translates under the Godunov scheme") {
  const WaveProfile p = branch_profile(0.0255, grid1000());
  const auto ev = evolve_wave_as_initial_data(p, 30.0, Disturbance::none, 0.0, 10.0);
  const StateField U = p.profile_field();
  for (const auto& snap : ev.trajectory.snapshots) {
    const double rel = l1_distance(snap, translated_profile(p, p.c * snap.time())) / U.l1_norm();
    CHECK(rel <= 0.05);
  }
  CHECK(ev.delta == 0.0);
  CHECK(ev.orbit.size() == ev.trajectory.steps + 1);
}

TEST_CASE("perturbed waves stay near the unperturbed orbit") {
  const WaveProfile p = branch_profile(0.0255, grid1000());
  const auto ref = evolve_wave_as_initial_data(p, 50.0, Disturbance::none, 0.0, 50.0);
  for (Disturbance d : {Disturbance::asymmetric, Disturbance::cos2}) {
    const auto ev = evolve_wave_as_initial_data(p, 50.0, d, 0.05, 50.0);
    CHECK(ev.delta == doctest::Approx(0.05 * p.amplitude()));
    CHECK(max_distance_to_curve(ev.orbit, ref.orbit) <= 3.0 * ev.delta);
  }
}

TEST_CASE("phase-plane equilibria") {
  CHECK(phase_equilibria(-1.0).empty());
  CHECK(phase_equilibria(-0.5) == std::vector<double>{-1.0});
  const auto eq = phase_equilibria(1.5);
  REQUIRE(eq.size() == 2);
  CHECK(eq[0] == doctest::Approx(-3.0));
  CHECK(eq[1] == doctest::Approx(1.0));
  for (double beta : {-0.4, 0.0, 0.5, 1.0}) {
    for (double y : phase_equilibria(beta)) {
      if (y == 0.0) continue;
      const auto t = phase_shoot(beta, y, 0.0);
      REQUIRE(t.status == ShootStatus::reached_end);
      for (const auto& s : t.samples) CHECK(std::hypot(s.Y - y, s.Z) < 1e-9);
    }
  }
}

TEST_CASE("shooting samples satisfy the phase-plane system") {
  const double beta = 0.0;
  const auto t = phase_shoot(beta, -2.01, 0.0);
  REQUIRE(t.status == ShootStatus::reached_end);
  REQUIRE(t.samples.size() == 1001);
  const double dx = 1e-3;
  for (std::size_t i = 1; i + 1 < t.samples.size(); ++i) {
    const auto& a = t.samples[i - 1];
    const auto& m = t.samples[i];
    const auto& b = t.samples[i + 1];
    const double dw = (0.5 * b.Y * b.Y - 0.5 * a.Y * a.Y) / (2 * dx);
    const double dz = (b.Z - a.Z) / (2 * dx);
    CHECK(std::abs(dw - m.Z) < 1e-5);
    CHECK(std::abs(dz - (0.5 * m.Y * m.Y + m.Y - beta)) < 1e-5);
  }
  CHECK(t.residual_norm() == doctest::Approx(std::hypot(t.residual_y, t.residual_z)));
}

TEST_CASE("shooting outcomes") {
  CHECK_THROWS_AS(phase_shoot(0.0, 0.0, 1.0), std::invalid_argument);
  // falls into Y = 0 with nonzero slope: a singular crossing
  const auto sing = phase_shoot(1.0, 0.1, -1.0);
  CHECK(sing.status == ShootStatus::singular_crossing);
  CHECK(std::isinf(sing.residual_norm()));
  const auto blow = phase_shoot(0.0, 9.0, 50.0, {.y_max = 10.0});
  CHECK(blow.status == ShootStatus::no_return);
}

TEST_CASE("no single-shock periodic wave in the scanned window") {
  for (double beta : {-1.0, -0.4, 0.0, 0.5, 1.0}) {
    const auto r = phase_scan(beta, 20, 11, 3.0, 3.0);
    CAPTURE(beta);
    CHECK(r.attempted == 220);
    CHECK(r.reached_end > 0);
    CHECK(r.min_residual > 1e-2);
  }
}
