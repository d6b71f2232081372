#include "fwlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fwlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sampled_sup(const std::function<double(double)>& f) {
  constexpr int kSamples = 4096;
  double sup = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    sup = std::max(sup, std::abs(f(static_cast<double>(i) / kSamples)));
  }
  return sup;
}

}  // namespace

PeriodicGrid::PeriodicGrid(std::size_t n) : n_(n), h_(0.0) {
  if (n < kMinCells) {
    throw std::invalid_argument("PeriodicGrid: need at least 4 cells, got " + std::to_string(n));
  }
  h_ = 1.0 / static_cast<double>(n);
}

std::size_t PeriodicGrid::wrap(std::ptrdiff_t k) const {
  const auto n = static_cast<std::ptrdiff_t>(n_);
  auto r = k % n;
  if (r < 0) r += n;
  return static_cast<std::size_t>(r);
}

double PeriodicGrid::torus_delta(double a, double b) {
  double d = b - a;
  d -= std::floor(d);
  if (d > 0.5) d -= 1.0;
  return d;
}

PeriodicGrid make_grid(std::size_t n) { return PeriodicGrid(n); }

StateField::StateField(PeriodicGrid grid, std::vector<double> values, double time)
    : grid_(grid), values_(std::move(values)), time_(time) {
  if (values_.size() != grid_.size()) {
    throw std::invalid_argument("StateField: value count does not match grid size");
  }
  if (!(time_ >= 0.0)) {
    throw std::invalid_argument("StateField: negative time");
  }
}

StateField::StateField(PeriodicGrid grid, double time)
    : StateField(grid, std::vector<double>(grid.size(), 0.0), time) {}

bool StateField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double StateField::max() const { return *std::max_element(values_.begin(), values_.end()); }
double StateField::min() const { return *std::min_element(values_.begin(), values_.end()); }

double StateField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double StateField::mass() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s * grid_.spacing();
}

double StateField::l1_norm() const {
  double s = 0.0;
  for (double v : values_) s += std::abs(v);
  return s * grid_.spacing();
}

double StateField::l2_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s * grid_.spacing());
}

double l1_distance(const StateField& a, const StateField& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("l1_distance: grid mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return s * a.grid().spacing();
}

double inner_product(const StateField& a, const StateField& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("inner_product: grid mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s * a.grid().spacing();
}

double eval_kernel(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("eval_kernel: argument outside [0,1]");
  }
  const double e = std::numbers::e;
  return (std::exp(x) + std::exp(1.0 - x)) / (2.0 * (e - 1.0));
}

double eval_kernel_derivative(double x) {
  if (!(x > 0.0 && x < 1.0)) {
    throw std::domain_error("eval_kernel_derivative: argument outside (0,1)");
  }
  const double e = std::numbers::e;
  return (std::exp(x) - std::exp(1.0 - x)) / (2.0 * (e - 1.0));
}

double FourierData::operator()(double x) const {
  double u = mean;
  for (std::size_t k = 0; k < cos_coeffs.size(); ++k) {
    u += cos_coeffs[k] * std::cos(kTwoPi * static_cast<double>(k + 1) * x);
  }
  for (std::size_t k = 0; k < sin_coeffs.size(); ++k) {
    u += sin_coeffs[k] * std::sin(kTwoPi * static_cast<double>(k + 1) * x);
  }
  return u;
}

InitialData initial_data(std::string_view name, double q) {
  if (name == "data1") {
    return {"data1", [](double x) { return std::cos(kTwoPi * x + 0.5) + 1.0; }, 2.0};
  }
  if (name == "data2") {
    auto f = [](double x) {
      return 0.2 * std::cos(kTwoPi * x) + 0.1 * std::cos(2.0 * kTwoPi * x) -
             0.3 * std::sin(3.0 * kTwoPi * x) + 0.5;
    };
    return {"data2", f, sampled_sup(f)};
  }
  if (name == "cosine") {
    return {"cosine", [q](double x) { return q * std::cos(kTwoPi * x); }, std::abs(q)};
  }
  throw std::invalid_argument("initial_data: unknown preset '" + std::string(name) + "'");
}

InitialData fourier_data(const FourierData& coeffs) {
  if (coeffs.cos_coeffs.size() > 3 || coeffs.sin_coeffs.size() > 3) {
    throw std::invalid_argument("fourier_data: at most three harmonics");
  }
  std::function<double(double)> f = coeffs;
  const double sup = sampled_sup(f);
  return {"fourier", std::move(f), sup};
}

StateField sample(const std::function<double(double)>& profile, const PeriodicGrid& grid) {
  std::vector<double> values(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) values[k] = profile(grid.x(k));
  StateField field(grid, std::move(values));
  if (!field.all_finite()) throw std::domain_error("sample: profile produced non-finite values");
  return field;
}

StateField sample(const InitialData& data, const PeriodicGrid& grid) {
  return sample(data.profile, grid);
}

}  // namespace fwlab
