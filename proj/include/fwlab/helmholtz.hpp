#pragma once

#include <span>

#include "fwlab/cyclic_tridiagonal.hpp"
#include "fwlab/grid.hpp"

namespace fwlab {

/// Discrete (1 - d^2/dx^2)^{-1} d/dx on a periodic grid.
///
/// The inverse is the central-difference matrix with diagonal 1 + 2/h^2 and
/// off-diagonals -1/h^2; the derivative is the centered difference
/// (u[k+1] - u[k-1]) / 2h. Both are circulant, so the composite operator is
/// skew-symmetric. The matrix factorization is built once per grid.
class HelmholtzSolver {
 public:
  explicit HelmholtzSolver(const PeriodicGrid& grid);

  const PeriodicGrid& grid() const { return grid_; }

  /// v = (I - D2)^{-1} (D1 u). `u` and `v` must not alias.
  void apply(std::span<const double> u, std::span<double> v) const;

  /// w = (I - D2)^{-1} r, without the derivative. In-place is allowed.
  void invert(std::span<const double> r, std::span<double> w) const;

 private:
  PeriodicGrid grid_;
  CyclicTridiagonal matrix_;
};

StateField apply_nonlocal(const HelmholtzSolver& solver, const StateField& u);

/// Trigonometric-interpolation reference: Fourier mode m is multiplied by
/// 2 pi i m / (1 + (2 pi m)^2). Requires an even number of cells; the Nyquist
/// mode is mapped to zero.
StateField apply_nonlocal_spectral(const StateField& u);

}  // namespace fwlab
