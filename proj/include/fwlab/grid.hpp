#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fwlab {

/// Uniform discretization of the unit torus [0,1) into n cells of width 1/n.
class PeriodicGrid {
 public:
  static constexpr std::size_t kMinCells = 4;

  explicit PeriodicGrid(std::size_t n);

  std::size_t size() const { return n_; }
  double spacing() const { return h_; }

  /// Sample point of cell k (values are point samples at k*h).
  double x(std::size_t k) const { return static_cast<double>(k) * h_; }

  std::size_t next(std::size_t k) const { return k + 1 == n_ ? 0 : k + 1; }
  std::size_t prev(std::size_t k) const { return k == 0 ? n_ - 1 : k - 1; }
  std::size_t wrap(std::ptrdiff_t k) const;

  /// Signed shortest displacement b - a on the torus, in (-1/2, 1/2].
  static double torus_delta(double a, double b);

  bool operator==(const PeriodicGrid& other) const { return n_ == other.n_; }

 private:
  std::size_t n_;
  double h_;
};

PeriodicGrid make_grid(std::size_t n);

/// Cell values of one scalar field at one time level.
class StateField {
 public:
  StateField(PeriodicGrid grid, std::vector<double> values, double time = 0.0);
  /// Zero field.
  explicit StateField(PeriodicGrid grid, double time = 0.0);

  const PeriodicGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }

  bool all_finite() const;

  double max() const;
  double min() const;
  double max_abs() const;
  /// Riemann sums h * sum(...), exact for trigonometric polynomials.
  double mass() const;
  double l1_norm() const;
  double l2_norm() const;

 private:
  PeriodicGrid grid_;
  std::vector<double> values_;
  double time_;
};

double l1_distance(const StateField& a, const StateField& b);
/// h-weighted inner product.
double inner_product(const StateField& a, const StateField& b);

/// Green's function of (1 - d^2/dx^2) on the torus, valid on [0,1].
double eval_kernel(double x);
/// One-sided derivative K'(x) on the open interval (0,1).
double eval_kernel_derivative(double x);

/// u0 = mean + sum_{k<=3} a_k cos(2 pi k x) + b_k sin(2 pi k x).
struct FourierData {
  double mean = 0.0;
  std::vector<double> cos_coeffs;
  std::vector<double> sin_coeffs;

  double operator()(double x) const;
};

/// A named initial profile on the torus.
struct InitialData {
  std::string name;
  std::function<double(double)> profile;
  /// sup |u0|, used as the default CFL scale q.
  double typical_size = 0.0;
};

/// Presets: "data1", "data2", "cosine" (q*cos(2 pi x)).
InitialData initial_data(std::string_view name, double q = 1.0);
InitialData fourier_data(const FourierData& coeffs);

StateField sample(const InitialData& data, const PeriodicGrid& grid);
StateField sample(const std::function<double(double)>& profile, const PeriodicGrid& grid);

}  // namespace fwlab
