#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fwlab/viscous.hpp"

using namespace fwlab;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

TEST_CASE("energy-stable step") {
  const PeriodicGrid g(1000);
  CHECK(energy_stable_time_step(g, 1e-3, 2.0) == doctest::Approx(1e-3 / 9.0));
  CHECK(energy_stable_time_step(g, 1.0, 2.0) == doctest::Approx(5e-4));
  CHECK_THROWS_AS(energy_stable_time_step(g, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("constants are steady") {
  const PeriodicGrid g(128);
  const ViscousStepper stepper(g, 1e-2, 1e-3);
  StateField u(g, std::vector<double>(128, 0.7));
  for (int i = 0; i < 20; ++i) u = stepper.step(u);
  for (std::size_t k = 0; k < u.size(); ++k) CHECK(u[k] == doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("pure diffusion damps a Fourier mode by the implicit factor") {
  const PeriodicGrid g(200);
  const double h = g.spacing(), eps = 3e-3, tau = 2e-3;
  const ViscousStepper stepper(g, eps, tau, {false, false});
  const StateField u = sample([](double x) { return std::cos(kTwoPi * x); }, g);
  const StateField v = stepper.step(u);
  const double lambda = 2.0 * (1.0 - std::cos(kTwoPi * h)) / (h * h);
  const double factor = 1.0 / (1.0 + eps * tau * lambda);
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(v[k] == doctest::Approx(factor * u[k]).epsilon(1e-12));
}

TEST_CASE("advection form conserves energy and mass") {
  // without diffusion the semi-discrete advection is orthogonal to u
  const PeriodicGrid g(256);
  const StateField u = sample(initial_data("data1"), g);
  const double h = g.spacing();
  double work = 0.0, mass = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double l = u[g.prev(k)], r = u[g.next(k)];
    const double a = (l + u[k] + r) * (r - l) / (6.0 * h);
    work += a * u[k] * h;
    mass += a * h;
  }
  CHECK(std::abs(work) < 1e-12);
  CHECK(std::abs(mass) < 1e-12);
}

TEST_CASE("energy ledger on data1") {
  const PeriodicGrid g(500);
  const StateField u0 = sample(initial_data("data1"), g);
  for (double eps : {1e-2, 3e-3, 1e-3}) {
    ViscousConfig cfg;
    cfg.grid = g;
    cfg.epsilon = eps;
    cfg.t_end = 0.5;
    const auto result = run_viscous(u0, cfg);
    const auto& ledger = result.ledger;
    REQUIRE(ledger.l2_half.size() == result.trajectory.steps + 1);
    double worst = 0.0;
    for (std::size_t i = 1; i < ledger.l2_half.size(); ++i) {
      worst = std::max(worst, (ledger.l2_half[i] - ledger.l2_half[i - 1]) / ledger.l2_half[i - 1]);
    }
    CHECK(worst <= 1e-8);
    for (std::size_t i = 0; i < ledger.nonlocal_work.size(); ++i) {
      CHECK(std::abs(ledger.nonlocal_work[i]) <= 1e-12 * (1.0 + 2.0 * ledger.l2_half[i]));
    }
    double max_abs = 0.0;
    for (const auto& d : result.trajectory.diagnostics) max_abs = std::max({max_abs, d.max, -d.min});
    CHECK(max_abs <= u0.max_abs() + 0.5 * u0.l2_norm());
    CHECK(std::abs(result.trajectory.snapshots.back().mass() - u0.mass()) < 1e-12);
  }
}

TEST_CASE("viscous solution approaches the Godunov solution as epsilon shrinks") {
  const PeriodicGrid g(500);
  const StateField u0 = sample(initial_data("data1"), g);
  GodunovConfig gc;
  gc.grid = g;
  gc.q = 2.0;
  gc.t_end = 0.5;
  const StateField reference = run(u0, gc).snapshots.back();
  double previous = 1e300;
  for (double eps : {1e-2, 3e-3, 1e-3}) {
    ViscousConfig cfg;
    cfg.grid = g;
    cfg.epsilon = eps;
    cfg.t_end = 0.5;
    const double d = l1_distance(run_viscous(u0, cfg).trajectory.snapshots.back(), reference);
    CHECK(d < previous);
    previous = d;
  }
}

TEST_CASE("diffusion smooths a step") {
  const PeriodicGrid g(400);
  const StateField u0 = sample([](double x) { return x < 0.5 ? 1.0 : 0.0; }, g);
  ViscousConfig cfg;
  cfg.grid = g;
  cfg.epsilon = 1e-2;
  cfg.t_end = 0.05;
  const StateField u = run_viscous(u0, cfg).trajectory.snapshots.back();
  CHECK(dissipation_rate(u, 1.0) < 0.1 * dissipation_rate(u0, 1.0));
  CHECK(u.max_abs() <= u0.max_abs() + cfg.t_end * u0.l2_norm());
}

TEST_CASE("argument checks") {
  const PeriodicGrid g(100);
  CHECK_THROWS_AS(ViscousStepper(g, 0.0, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(ViscousStepper(g, 1e-2, 0.0), std::invalid_argument);
  ViscousConfig cfg;
  cfg.grid = g;
  cfg.tau = 1.0;
  CHECK_THROWS_AS(run_viscous(sample(initial_data("data1"), g), cfg), std::invalid_argument);
}
