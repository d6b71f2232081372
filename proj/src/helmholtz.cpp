#include "fwlab/helmholtz.hpp"

#include <fftw3.h>

#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace fwlab {

namespace {

CyclicTridiagonal helmholtz_matrix(const PeriodicGrid& grid) {
  const std::size_t n = grid.size();
  const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
  std::vector<double> off(n, -inv_h2);
  std::vector<double> diag(n, 1.0 + 2.0 * inv_h2);
  return CyclicTridiagonal(off, diag, off);
}

// FFTW planning is not thread-safe.
std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(fftw_plan_mutex());
    fftw_destroy_plan(p);
  }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

}  // namespace

HelmholtzSolver::HelmholtzSolver(const PeriodicGrid& grid)
    : grid_(grid), matrix_(helmholtz_matrix(grid)) {}

void HelmholtzSolver::apply(std::span<const double> u, std::span<double> v) const {
  const std::size_t n = grid_.size();
  if (u.size() != n || v.size() != n) {
    throw std::invalid_argument("HelmholtzSolver::apply: grid mismatch");
  }
  const double inv_2h = 0.5 / grid_.spacing();
  v[0] = (u[1] - u[n - 1]) * inv_2h;
  for (std::size_t k = 1; k + 1 < n; ++k) v[k] = (u[k + 1] - u[k - 1]) * inv_2h;
  v[n - 1] = (u[0] - u[n - 2]) * inv_2h;
  matrix_.solve(v, v);
}

void HelmholtzSolver::invert(std::span<const double> r, std::span<double> w) const {
  if (r.size() != grid_.size() || w.size() != grid_.size()) {
    throw std::invalid_argument("HelmholtzSolver::invert: grid mismatch");
  }
  matrix_.solve(r, w);
}

StateField apply_nonlocal(const HelmholtzSolver& solver, const StateField& u) {
  if (!(u.grid() == solver.grid())) {
    throw std::invalid_argument("apply_nonlocal: field and solver grids differ");
  }
  StateField v(u.grid(), u.time());
  solver.apply(u.values(), v.values());
  return v;
}

StateField apply_nonlocal_spectral(const StateField& u) {
  const std::size_t n = u.size();
  if (n % 2 != 0) {
    throw std::invalid_argument("apply_nonlocal_spectral: needs an even number of cells");
  }
  std::vector<double> real(u.values().begin(), u.values().end());
  std::vector<std::complex<double>> modes(n / 2 + 1);
  auto* modes_ptr = reinterpret_cast<fftw_complex*>(modes.data());

  Plan forward;
  Plan backward;
  {
    std::lock_guard lock(fftw_plan_mutex());
    forward.reset(fftw_plan_dft_r2c_1d(static_cast<int>(n), real.data(), modes_ptr, FFTW_ESTIMATE));
    backward.reset(fftw_plan_dft_c2r_1d(static_cast<int>(n), modes_ptr, real.data(), FFTW_ESTIMATE));
  }
  fftw_execute(forward.get());

  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    const double k = two_pi * static_cast<double>(m);
    modes[m] *= std::complex<double>(0.0, k / (1.0 + k * k));
  }
  modes[n / 2] = 0.0;
  fftw_execute(backward.get());

  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : real) v *= scale;
  return StateField(u.grid(), std::move(real), u.time());
}

}  // namespace fwlab
