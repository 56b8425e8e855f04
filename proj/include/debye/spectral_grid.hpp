#pragma once

// Periodic 1-D grid on the unit torus [0, 1), Fourier differentiation,
// quadrature and Sobolev norms.
//
// Transform convention: the forward transform is unnormalized, the inverse
// carries the 1/N factor. Coefficient c_j of a field f sampled at x_i = i/N is
//   c_j = sum_i f(x_i) exp(-2 pi i j x_i),   f(x_i) = (1/N) sum_j c_j exp(...)
// Only the non-negative half spectrum (j = 0 .. N/2) is stored.

#include <complex>
#include <cstddef>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace debye {

/// Highest Sobolev order accepted by hs_norm and the triple norms.
inline constexpr int kMaxSobolevOrder = 4;
/// Highest derivative order accepted by derivative().
inline constexpr int kMaxDerivativeOrder = 2 * kMaxSobolevOrder;

namespace detail {
struct GridData;
}

class Grid {
 public:
  /// n_points must be a power of two and at least 32.
  explicit Grid(std::size_t n_points);

  std::size_t size() const noexcept;
  double dx() const noexcept;
  static constexpr double length() noexcept { return 1.0; }
  double x(std::size_t i) const noexcept { return static_cast<double>(i) * dx(); }

  /// Wavenumbers k_j = 2 pi j for j = -N/2 .. N/2-1, in that order.
  std::span<const double> wavenumbers() const noexcept;

  /// Number of stored half-spectrum coefficients, N/2 + 1.
  std::size_t spectrum_size() const noexcept { return size() / 2 + 1; }

  std::vector<std::complex<double>> forward(std::span<const double> values) const;
  std::vector<double> inverse(std::vector<std::complex<double>> coefficients) const;

  friend bool operator==(const Grid& a, const Grid& b) noexcept { return a.size() == b.size(); }

 private:
  std::shared_ptr<const detail::GridData> data_;
};

/// Real samples of a function on a Grid. Value semantics.
class Field {
 public:
  explicit Field(Grid grid);
  Field(Grid grid, std::vector<double> values);
  Field(Grid grid, double value);

  template <class F>
  static Field from_function(const Grid& grid, F&& f) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.x(i));
    return Field(grid, std::move(v));
  }

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }

  double min() const;
  double max() const;
  double max_abs() const;
  bool all_finite() const noexcept;

  template <class F>
  Field map(F&& f) const {
    Field out(*this);
    for (double& v : out.values_) v = f(v);
    return out;
  }

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(const Field& o);
  Field& operator*=(double a) noexcept;
  Field& operator/=(double a) noexcept;
  Field operator-() const;

  friend bool operator==(const Field& a, const Field& b) = default;

 private:
  Grid grid_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
/// Pointwise product (no dealiasing; wrap in dealias() where aliasing matters).
Field operator*(Field a, const Field& b);
Field operator*(double s, Field a);
Field operator*(Field a, double s);
Field operator/(Field a, double s);

/// Spectral derivative of the given order. The Nyquist mode is dropped for
/// every order >= 1, so derivative(f, 1) twice equals derivative(f, 2).
Field derivative(const Field& f, int order);

/// Trapezoid rule, exact for trigonometric polynomials of degree < N.
double integrate(const Field& f);
double l2_norm(const Field& f);
double hs_norm(const Field& f, int s);

/// 2/3-rule filter: zeroes every mode with |j| > N/3.
Field dealias(const Field& f);

/// Exponential filter exp(-alpha (|j|/(N/2))^order); not used by default.
Field exponential_filter(const Field& f, double alpha = 36.0, int order = 36);

/// Trigonometric interpolation onto a finer grid (zero padding).
Field refine(const Field& f, const Grid& fine);

/// Forward transform of the samples (unnormalized half spectrum).
std::vector<std::complex<double>> fourier_coefficients(const Field& f);

/// Random trigonometric polynomial c0 + sum_{m<=max_mode} a_m cos + b_m sin,
/// coefficients uniform in [-1, 1] drawn from the supplied engine.
struct BandLimited {
  std::vector<double> cos_coeffs;  // index 0 is the mean
  std::vector<double> sin_coeffs;

  static BandLimited random(int max_mode, std::mt19937_64& rng);
  double operator()(double x) const;
  Field sample(const Grid& grid) const;
};

/// CSV with header `x,value`, 17 significant digits.
std::string field_to_csv(const Field& f);

}  // namespace debye
