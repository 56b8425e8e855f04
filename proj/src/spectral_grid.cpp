#include "debye/spectral_grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "debye/csv_io.hpp"

namespace debye {

namespace detail {

// FFTW planning is not thread safe; execution through the new-array
// interface is. Plans are created once per size under a lock and shared.
// FFTW_ESTIMATE keeps plan selection (and hence round-off) deterministic.
struct GridData {
  std::size_t n = 0;
  double dx = 0.0;
  std::vector<double> wavenumbers;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;

  ~GridData() {
    std::lock_guard lock(planner_mutex());
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
  }

  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }
};

namespace {

std::shared_ptr<const GridData> grid_data_for(std::size_t n) {
  // Construct the planner mutex first so it outlives the cached plans.
  GridData::planner_mutex();
  static std::mutex cache_mutex;
  static std::map<std::size_t, std::shared_ptr<const GridData>> cache;

  std::lock_guard cache_lock(cache_mutex);
  if (auto it = cache.find(n); it != cache.end()) return it->second;

  auto d = std::make_shared<GridData>();
  d->n = n;
  d->dx = 1.0 / static_cast<double>(n);
  d->wavenumbers.resize(n);
  const long half = static_cast<long>(n / 2);
  for (long j = -half; j < half; ++j)
    d->wavenumbers[static_cast<std::size_t>(j + half)] = 2.0 * std::numbers::pi * static_cast<double>(j);

  std::vector<double> real(n);
  std::vector<std::complex<double>> spec(n / 2 + 1);
  {
    std::lock_guard plan_lock(GridData::planner_mutex());
    const int ni = static_cast<int>(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    d->r2c = fftw_plan_dft_r2c_1d(ni, real.data(), reinterpret_cast<fftw_complex*>(spec.data()), flags);
    d->c2r = fftw_plan_dft_c2r_1d(ni, reinterpret_cast<fftw_complex*>(spec.data()), real.data(), flags);
  }
  if (!d->r2c || !d->c2r) throw std::runtime_error("FFTW planning failed");
  cache.emplace(n, d);
  return d;
}

}  // namespace
}  // namespace detail

// ---------------------------------------------------------------------------
// Grid

Grid::Grid(std::size_t n_points) {
  if (n_points < 32 || !std::has_single_bit(n_points))
    throw std::invalid_argument("grid size must be a power of two >= 32, got " + std::to_string(n_points));
  data_ = detail::grid_data_for(n_points);
}

std::size_t Grid::size() const noexcept { return data_->n; }
double Grid::dx() const noexcept { return data_->dx; }
std::span<const double> Grid::wavenumbers() const noexcept { return data_->wavenumbers; }

std::vector<std::complex<double>> Grid::forward(std::span<const double> values) const {
  if (values.size() != size()) throw std::invalid_argument("forward transform: length mismatch");
  std::vector<double> in(values.begin(), values.end());
  std::vector<std::complex<double>> out(spectrum_size());
  fftw_execute_dft_r2c(data_->r2c, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> Grid::inverse(std::vector<std::complex<double>> coefficients) const {
  if (coefficients.size() != spectrum_size()) throw std::invalid_argument("inverse transform: length mismatch");
  std::vector<double> out(size());
  // c2r overwrites its input; `coefficients` is our own copy.
  fftw_execute_dft_c2r(data_->c2r, reinterpret_cast<fftw_complex*>(coefficients.data()), out.data());
  const double scale = 1.0 / static_cast<double>(size());
  for (double& v : out) v *= scale;
  return out;
}

// ---------------------------------------------------------------------------
// Field

Field::Field(Grid grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

Field::Field(Grid grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw std::invalid_argument("field length " + std::to_string(values_.size()) + " does not match grid size " +
                                std::to_string(grid_.size()));
}

Field::Field(Grid grid, double value) : grid_(std::move(grid)), values_(grid_.size(), value) {}

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool Field::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

namespace {
void require_same_grid(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("fields live on different grids");
}

void require_finite(const Field& f, const char* op) {
  if (!f.all_finite()) throw std::domain_error(std::string(op) + ": field has non-finite entries");
}
}  // namespace

Field& Field::operator+=(const Field& o) {
  require_same_grid(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& o) {
  require_same_grid(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

Field& Field::operator*=(const Field& o) {
  require_same_grid(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] *= o.values_[i];
  return *this;
}

Field& Field::operator*=(double a) noexcept {
  for (double& v : values_) v *= a;
  return *this;
}

Field& Field::operator/=(double a) noexcept {
  for (double& v : values_) v /= a;
  return *this;
}

Field Field::operator-() const {
  Field out(*this);
  for (double& v : out.values_) v = -v;
  return out;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(Field a, const Field& b) { return a *= b; }
Field operator*(double s, Field a) { return a *= s; }
Field operator*(Field a, double s) { return a *= s; }
Field operator/(Field a, double s) { return a /= s; }

// ---------------------------------------------------------------------------
// Spectral operations

Field derivative(const Field& f, int order) {
  if (order < 0 || order > kMaxDerivativeOrder)
    throw std::invalid_argument("derivative order " + std::to_string(order) + " outside [0, " +
                                std::to_string(kMaxDerivativeOrder) + "]");
  require_finite(f, "derivative");
  if (order == 0) return f;

  const Grid& g = f.grid();
  auto c = g.forward(f.values());
  const std::size_t nyquist = g.size() / 2;
  // (i k)^order = k^order * i^order, with i^order cycling through 1, i, -1, -i.
  static constexpr std::complex<double> kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const std::complex<double> phase = kIPow[order % 4];
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (j == nyquist) {
      c[j] = 0.0;
      continue;
    }
    const double k = 2.0 * std::numbers::pi * static_cast<double>(j);
    c[j] *= phase * std::pow(k, order);
  }
  c[0] = 0.0;
  return Field(g, g.inverse(std::move(c)));
}

double integrate(const Field& f) {
  require_finite(f, "integrate");
  double sum = 0.0;
  for (double v : f.values()) sum += v;
  return sum / static_cast<double>(f.size()) * Grid::length();
}

double l2_norm(const Field& f) { return std::sqrt(integrate(f * f)); }

double hs_norm(const Field& f, int s) {
  if (s < 0 || s > kMaxSobolevOrder)
    throw std::invalid_argument("Sobolev order " + std::to_string(s) + " outside [0, " +
                                std::to_string(kMaxSobolevOrder) + "]");
  double sum = 0.0;
  for (int a = 0; a <= s; ++a) {
    const double n = l2_norm(derivative(f, a));
    sum += n * n;
  }
  return std::sqrt(sum);
}

Field dealias(const Field& f) {
  const Grid& g = f.grid();
  auto c = g.forward(f.values());
  for (std::size_t j = 0; j < c.size(); ++j)
    if (3 * j > g.size()) c[j] = 0.0;
  return Field(g, g.inverse(std::move(c)));
}

Field exponential_filter(const Field& f, double alpha, int order) {
  const Grid& g = f.grid();
  auto c = g.forward(f.values());
  const double half = static_cast<double>(g.size() / 2);
  for (std::size_t j = 0; j < c.size(); ++j) c[j] *= std::exp(-alpha * std::pow(static_cast<double>(j) / half, order));
  return Field(g, g.inverse(std::move(c)));
}

Field refine(const Field& f, const Grid& fine) {
  const Grid& g = f.grid();
  if (fine.size() < g.size()) throw std::invalid_argument("refine: target grid is coarser");
  auto c = g.forward(f.values());
  std::vector<std::complex<double>> cf(fine.spectrum_size(), 0.0);
  const double ratio = static_cast<double>(fine.size()) / static_cast<double>(g.size());
  const std::size_t nyquist = g.size() / 2;
  for (std::size_t j = 0; j < c.size(); ++j) {
    // The coarse Nyquist coefficient stands for cos(pi N x); split between +-N/2.
    const double w = (j == nyquist && fine.size() != g.size()) ? 0.5 : 1.0;
    cf[j] = c[j] * ratio * w;
  }
  return Field(fine, fine.inverse(std::move(cf)));
}

std::vector<std::complex<double>> fourier_coefficients(const Field& f) { return f.grid().forward(f.values()); }

BandLimited BandLimited::random(int max_mode, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  BandLimited b;
  b.cos_coeffs.resize(static_cast<std::size_t>(max_mode) + 1);
  b.sin_coeffs.resize(static_cast<std::size_t>(max_mode) + 1, 0.0);
  for (int m = 0; m <= max_mode; ++m) {
    b.cos_coeffs[static_cast<std::size_t>(m)] = dist(rng);
    if (m > 0) b.sin_coeffs[static_cast<std::size_t>(m)] = dist(rng);
  }
  return b;
}

double BandLimited::operator()(double x) const {
  double v = cos_coeffs.empty() ? 0.0 : cos_coeffs[0];
  for (std::size_t m = 1; m < cos_coeffs.size(); ++m) {
    const double arg = 2.0 * std::numbers::pi * static_cast<double>(m) * x;
    v += cos_coeffs[m] * std::cos(arg) + sin_coeffs[m] * std::sin(arg);
  }
  return v;
}

Field BandLimited::sample(const Grid& grid) const {
  return Field::from_function(grid, [this](double x) { return (*this)(x); });
}

std::string field_to_csv(const Field& f) {
  CsvWriter w({"x", "value"});
  for (std::size_t i = 0; i < f.size(); ++i) {
    w.cell(f.grid().x(i)).cell(f[i]);
    w.end_row();
  }
  return w.str();
}

}  // namespace debye
