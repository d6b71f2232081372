#include "fwlab/cyclic_tridiagonal.hpp"

#include <cmath>
#include <stdexcept>

namespace fwlab {

CyclicTridiagonal::CyclicTridiagonal(std::span<const double> lower, std::span<const double> diag,
                                     std::span<const double> upper)
    : lower_(lower.begin(), lower.end()), diag_(diag.begin(), diag.end()) {
  const std::size_t n = diag.size();
  if (n < 3 || lower.size() != n || upper.size() != n) {
    throw std::invalid_argument("CyclicTridiagonal: need three coefficient arrays of equal size >= 3");
  }

  // A = B + u v^T with u = (gamma, 0, ..., 0, upper[n-1]), v = (1, 0, ..., 0, lower[0]/gamma).
  corner_gamma_ = -diag[0];
  if (corner_gamma_ == 0.0) {
    throw std::invalid_argument("CyclicTridiagonal: zero leading diagonal entry");
  }
  corner_ratio_ = lower[0] / corner_gamma_;
  diag_[0] = diag[0] - corner_gamma_;
  diag_[n - 1] = diag[n - 1] - upper[n - 1] * corner_ratio_;

  inv_pivot_.resize(n);
  upper_scaled_.resize(n);
  double pivot = diag_[0];
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) pivot = diag_[k] - lower_[k] * upper_scaled_[k - 1];
    if (pivot == 0.0 || !std::isfinite(pivot)) {
      throw std::runtime_error("CyclicTridiagonal: singular pivot");
    }
    inv_pivot_[k] = 1.0 / pivot;
    upper_scaled_[k] = upper[k] * inv_pivot_[k];
  }

  std::vector<double> column(n, 0.0);
  column[0] = corner_gamma_;
  column[n - 1] = upper[n - 1];
  correction_.resize(n);
  thomas(column, correction_);
  correction_denominator_ = 1.0 + correction_[0] + corner_ratio_ * correction_[n - 1];
  if (correction_denominator_ == 0.0 || !std::isfinite(correction_denominator_)) {
    throw std::runtime_error("CyclicTridiagonal: singular matrix");
  }
}

void CyclicTridiagonal::thomas(std::span<const double> rhs, std::span<double> x) const {
  const std::size_t n = diag_.size();
  x[0] = rhs[0] * inv_pivot_[0];
  for (std::size_t k = 1; k < n; ++k) {
    x[k] = (rhs[k] - lower_[k] * x[k - 1]) * inv_pivot_[k];
  }
  for (std::size_t k = n - 1; k-- > 0;) {
    x[k] -= upper_scaled_[k] * x[k + 1];
  }
}

void CyclicTridiagonal::solve(std::span<const double> rhs, std::span<double> x) const {
  const std::size_t n = diag_.size();
  if (rhs.size() != n || x.size() != n) {
    throw std::invalid_argument("CyclicTridiagonal::solve: size mismatch");
  }
  thomas(rhs, x);
  const double factor = (x[0] + corner_ratio_ * x[n - 1]) / correction_denominator_;
  for (std::size_t k = 0; k < n; ++k) x[k] -= factor * correction_[k];
}

std::vector<double> CyclicTridiagonal::solve(std::span<const double> rhs) const {
  std::vector<double> x(rhs.size());
  solve(rhs, x);
  return x;
}

}  // namespace fwlab
