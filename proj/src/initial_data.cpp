#include "debye/initial_data.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace debye {

void InitParams::validate() const {
  if (!(n_base > 0.0)) throw std::invalid_argument("init: n_base must be positive");
  if (!(std::abs(n_amp) < n_base)) throw std::invalid_argument("init: |n_amp| must be smaller than n_base");
  if (mode < 1) throw std::invalid_argument("init: mode must be >= 1");
  if (!std::isfinite(u_amp) || !std::isfinite(phase_u)) throw std::invalid_argument("init: non-finite parameter");
}

double InitParams::density_floor() const noexcept { return n_base - std::abs(n_amp); }

namespace {

// Profile with sup norm <= 1: sin(2 pi m x + phase), or the normalized
// three-mode sum.
double profile(double x, int mode, double phase, bool multi) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (!multi) return std::sin(two_pi * mode * x + phase);
  double sum = 0.0;
  double weight = 0.0;
  for (int k = 1; k <= 3; ++k) {
    const double w = 1.0 / (k * k);
    sum += w * std::sin(two_pi * k * mode * x + phase);
    weight += w;
  }
  return sum / weight;
}

}  // namespace

InitialData make_initial(const InitParams& p, const Grid& g) {
  p.validate();
  const std::size_t top = static_cast<std::size_t>(p.mode) * (p.multi_mode ? 3 : 1);
  if (3 * top > g.size())
    throw std::invalid_argument("init: mode " + std::to_string(top) + " lies above the dealiasing cutoff of a " +
                                std::to_string(g.size()) + "-point grid");
  Field n0 = Field::from_function(g, [&](double x) { return p.n_base + p.n_amp * profile(x, p.mode, 0.0, p.multi_mode); });
  Field u0 = Field::from_function(g, [&](double x) { return p.u_amp * profile(x, p.mode, p.phase_u, p.multi_mode); });
  return {std::move(n0), std::move(u0)};
}

}  // namespace debye
