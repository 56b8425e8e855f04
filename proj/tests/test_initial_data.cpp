#include "doctest.h"

#include <cmath>
#include <numbers>

#include "debye/initial_data.hpp"

using namespace debye;
using std::numbers::pi;

TEST_CASE("default data") {
  const Grid g(256);
  const InitialData d = make_initial({}, g);
  CHECK(d.n0.min() == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(d.n0.max() == doctest::Approx(1.1).epsilon(1e-14));
  CHECK(integrate(d.n0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(hs_norm(d.n0 - Field(g, 1.0), 0) == doctest::Approx(0.070710678118654752).epsilon(1e-13));
  CHECK(d.u0.max() == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(std::abs(integrate(d.u0)) <= 1e-15);
}

TEST_CASE("zero amplitudes give the uniform equilibrium") {
  const Grid g(64);
  InitParams p;
  p.n_base = 1.7;
  p.n_amp = 0.0;
  p.u_amp = 0.0;
  const InitialData d = make_initial(p, g);
  CHECK(d.n0 == Field(g, 1.7));
  CHECK(d.u0 == Field(g, 0.0));
}

TEST_CASE("mode and phase follow the closed form") {
  const Grid g(64);
  InitParams p;
  p.mode = 3;
  p.phase_u = 0.4;
  p.n_amp = 0.2;
  p.u_amp = -0.3;
  const InitialData d = make_initial(p, g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.x(i);
    CHECK(d.n0[i] == doctest::Approx(1.0 + 0.2 * std::sin(6 * pi * x)).epsilon(1e-14));
    CHECK(d.u0[i] == doctest::Approx(-0.3 * std::sin(6 * pi * x + 0.4)).epsilon(1e-14));
  }
}

TEST_CASE("density stays above the guaranteed floor") {
  const Grid g(128);
  for (double amp : {0.0, 0.3, 0.9, -0.5}) {
    for (bool multi : {false, true}) {
      InitParams p;
      p.n_amp = amp;
      p.multi_mode = multi;
      const InitialData d = make_initial(p, g);
      CHECK(d.n0.min() >= p.n_base - std::abs(p.n_amp));
      CHECK(p.density_floor() == p.n_base - std::abs(p.n_amp));
    }
  }
}

TEST_CASE("multi-mode profile has 1/k^2 weights and bounded amplitude") {
  const Grid g(128);
  InitParams p;
  p.multi_mode = true;
  const InitialData d = make_initial(p, g);
  const auto c = fourier_coefficients(d.n0 - Field(g, 1.0));
  const double n = static_cast<double>(g.size());
  const double w = 1.0 + 0.25 + 1.0 / 9.0;
  for (int k = 1; k <= 3; ++k) CHECK(std::abs(c[k]) * 2.0 / n == doctest::Approx(0.1 / (k * k) / w).epsilon(1e-12));
  CHECK(std::abs(c[4]) <= 1e-12);
  CHECK((d.n0 - Field(g, 1.0)).max_abs() <= 0.1);
}

TEST_CASE("invalid parameters are rejected") {
  InitParams p;
  p.n_amp = 1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.n_base = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.mode = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.mode = 100;  // above the 2/3 cutoff of a 64-point grid
  CHECK_THROWS_AS(make_initial(p, Grid(64)), std::invalid_argument);
}

TEST_CASE("construction is deterministic") {
  const Grid g(64);
  const InitialData a = make_initial({}, g), b = make_initial({}, g);
  CHECK(a.n0 == b.n0);
  CHECK(a.u0 == b.u0);
}
