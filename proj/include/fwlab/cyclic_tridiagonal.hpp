#pragma once

#include <span>
#include <vector>

namespace fwlab {

/// Factorized periodic tridiagonal system
///
///   lower[k] x[k-1] + diag[k] x[k] + upper[k] x[k+1] = rhs[k]   (indices mod n)
///
/// solved by a Thomas sweep on the system with the corner entries removed,
/// followed by a Sherman-Morrison rank-one correction. The correction vector is
/// computed once at construction so each solve costs a single O(n) sweep.
class CyclicTridiagonal {
 public:
  CyclicTridiagonal(std::span<const double> lower, std::span<const double> diag,
                    std::span<const double> upper);

  std::size_t size() const { return diag_.size(); }

  void solve(std::span<const double> rhs, std::span<double> x) const;
  std::vector<double> solve(std::span<const double> rhs) const;

 private:
  void thomas(std::span<const double> rhs, std::span<double> x) const;

  std::vector<double> lower_;
  std::vector<double> diag_;       // diagonal of the corner-free matrix
  std::vector<double> inv_pivot_;  // 1 / eliminated pivots
  std::vector<double> upper_scaled_;
  std::vector<double> correction_;  // (corner-free matrix)^{-1} applied to the rank-one column
  double corner_gamma_ = 0.0;
  double corner_ratio_ = 0.0;  // v[n-1] = lower[0] / gamma
  double correction_denominator_ = 1.0;
};

}  // namespace fwlab
