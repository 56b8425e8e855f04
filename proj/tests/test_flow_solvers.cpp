#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "debye/flow_solvers.hpp"
#include "debye/initial_data.hpp"

using namespace debye;
using std::numbers::pi;

namespace {

template <class State>
State make_state(const Grid& g, double n_amp, double u_amp) {
  InitParams p;
  p.n_amp = n_amp;
  p.u_amp = u_amp;
  const InitialData d = make_initial(p, g);
  return State{0.0, d.n0, d.u0};
}

// Coefficient of sin(2 pi x) in n - 1.
double sine_amplitude(const Field& n) {
  const Field s = Field::from_function(n.grid(), [](double x) { return std::sin(2 * pi * x); });
  return 2.0 * integrate((n - Field(n.grid(), 1.0)) * s);
}

// Angular frequency from consecutive zero crossings of the sine amplitude.
template <class State>
double measured_frequency(const Trajectory<State>& traj) {
  std::vector<double> crossings;
  for (std::size_t i = 1; i < traj.states.size(); ++i) {
    const double a0 = sine_amplitude(traj.states[i - 1].n), a1 = sine_amplitude(traj.states[i].n);
    if (a0 * a1 < 0.0) {
      const double t0 = traj.states[i - 1].t, t1 = traj.states[i].t;
      crossings.push_back(t0 + (t1 - t0) * a0 / (a0 - a1));
    }
  }
  REQUIRE(crossings.size() >= 2);
  return pi / (crossings[1] - crossings[0]);
}

}  // namespace

TEST_CASE("uniform equilibrium has zero tendency") {
  const Grid g(64);
  const EPState ep{0.0, Field(g, 1.3), Field(g)};
  const EPTendency k = rhs_ep(ep, 1e-2, {});
  CHECK(k.dn.max_abs() == 0.0);
  CHECK(k.du.max_abs() <= 1e-15);
  const Tendency kl = rhs_limit(LimitState{0.0, Field(g, 1.3), Field(g)});
  CHECK(kl.dn.max_abs() == 0.0);
  CHECK(kl.du.max_abs() <= 1e-15);
}

TEST_CASE("density tendency is a divergence") {
  const Grid g(128);
  for (double amp : {0.1, 0.4}) {
    const auto ep = make_state<EPState>(g, amp, 0.3);
    CHECK(std::abs(integrate(rhs_ep(ep, 1e-3, {}).dn)) <= 1e-14);
    const auto lim = make_state<LimitState>(g, amp, 0.3);
    CHECK(std::abs(integrate(rhs_limit(lim).dn)) <= 1e-14);
  }
}

TEST_CASE("velocity tendency at rest is minus the potential gradient") {
  const Grid g(128);
  const double eps = 1e-3;
  const Field n = Field::from_function(g, [](double x) { return 1.0 + 0.01 * std::sin(2 * pi * x); });
  const EPState st{0.0, n, Field(g)};
  const Field phi = solve_phi(n, eps).phi;
  CHECK((rhs_ep(st, eps, {}).du + dealias(derivative(phi, 1))).max_abs() <= 1e-10);
  CHECK(std::abs(rhs_ep(st, eps, {}).potential.residual_l2) <= 1e-12);
  CHECK_THROWS_AS(rhs_ep(st, 0.0, {}), std::invalid_argument);
}

TEST_CASE("limit flow oscillates at the sound frequency") {
  const Grid g(64);
  RunOptions o;
  o.t_end = 1.0;
  o.dt = 1e-3;
  LimitState st{0.0, Field::from_function(g, [](double x) { return 1.0 + 1e-6 * std::sin(2 * pi * x); }), Field(g)};
  const auto traj = evolve(st, o);
  REQUIRE_FALSE(traj.blew_up());
  CHECK(measured_frequency(traj) == doctest::Approx(2 * pi).epsilon(0.01));
}

TEST_CASE("Euler-Poisson flow follows the ion-acoustic dispersion relation") {
  const Grid g(64);
  const double eps = 1e-2;
  RunOptions o;
  o.t_end = 1.0;
  o.dt = 1e-3;
  o.eps = eps;
  EPState st{0.0, Field::from_function(g, [](double x) { return 1.0 + 1e-6 * std::sin(2 * pi * x); }), Field(g)};
  const auto traj = evolve(st, o);
  REQUIRE_FALSE(traj.blew_up());
  const double k = 2 * pi;
  CHECK(measured_frequency(traj) == doctest::Approx(k / std::sqrt(1 + eps * k * k)).epsilon(0.01));
}

TEST_CASE("uniform state is a fixed point of one step") {
  const Grid g(64);
  RunOptions o;
  o.dt = 1e-3;
  const LimitState lim{0.0, Field(g, 1.2), Field(g)};
  const LimitState lim1 = step(lim, o);
  CHECK((lim1.n - lim.n).max_abs() <= 1e-12);
  CHECK(lim1.u.max_abs() <= 1e-12);
  CHECK(lim1.t == doctest::Approx(1e-3));
  o.eps = 1e-2;
  const EPState ep{0.0, Field(g, 1.2), Field(g)};
  const EPState ep1 = step(ep, o);
  CHECK((ep1.n - ep.n).max_abs() <= 1e-12);
  CHECK(ep1.u.max_abs() <= 1e-12);
}

TEST_CASE("mass is conserved over 1000 steps") {
  const Grid g(64);
  RunOptions o;
  o.dt = 5e-4;
  o.t_end = 0.5;
  o.record_every = 100;
  const auto lim = evolve(make_state<LimitState>(g, 0.2, 0.2), o);
  REQUIRE(lim.steps == 1000);
  for (const auto& s : lim.states) CHECK(std::abs(integrate(s.n) - 1.0) <= 1e-11);
  o.eps = 1e-2;
  const auto ep = evolve(make_state<EPState>(g, 0.2, 0.2), o);
  REQUIRE(ep.steps == 1000);
  for (const auto& s : ep.states) CHECK(std::abs(integrate(s.n) - 1.0) <= 1e-11);
}

TEST_CASE("time stepping converges at fourth order") {
  auto final_state = [](double dt, double eps) {
    const Grid g(32);
    RunOptions o;
    o.dt = dt;
    o.t_end = 0.08;
    o.eps = eps;
    const auto traj = evolve(make_state<EPState>(g, 0.2, 0.3), o);
    return traj.states.back();
  };
  for (double eps : {0.0, 1e-2}) {
    const EPState a = final_state(0.02, eps), b = final_state(0.01, eps), c = final_state(0.005, eps);
    const double e1 = l2_norm(a.n - b.n) + l2_norm(a.u - b.u);
    const double e2 = l2_norm(b.n - c.n) + l2_norm(b.u - c.u);
    CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.1));
  }
}

TEST_CASE("limit flow is time reversible") {
  const Grid g(64);
  RunOptions o;
  o.dt = 1e-4;
  o.t_end = 1e-2;  // 100 steps
  const LimitState start = make_state<LimitState>(g, 0.1, 0.1);
  const LimitState fwd = evolve(start, o).states.back();
  const LimitState back = evolve(LimitState{0.0, fwd.n, -fwd.u}, o).states.back();
  CHECK((back.n - start.n).max_abs() <= 1e-8);
  CHECK((-back.u - start.u).max_abs() <= 1e-8);
}

TEST_CASE("evolve records, honours t_end = 0 and keeps equilibria") {
  const Grid g(32);
  RunOptions o;
  o.t_end = 0.0;
  const auto none = evolve(make_state<LimitState>(g, 0.1, 0.1), o);
  CHECK(none.states.size() == 1);
  CHECK(none.steps == 0);

  o.t_end = 0.05;
  o.dt = 1e-3;
  o.eps = 1e-2;
  o.record_every = 7;
  const EPState eq{0.0, Field(g, 1.0), Field(g)};
  int seen = 0;
  const auto traj = evolve(eq, o, [&](const EPState&) { ++seen; });
  CHECK(traj.steps == 50);
  CHECK(traj.states.size() == 1 + 7 + 1);  // initial, 7 multiples of 7, final
  CHECK(seen == static_cast<int>(traj.states.size()));
  CHECK(traj.states.back().t == doctest::Approx(0.05).epsilon(1e-14));
  for (const auto& s : traj.states) {
    CHECK((s.n - eq.n).max_abs() <= 1e-12);
    CHECK(s.u.max_abs() <= 1e-12);
  }
}

TEST_CASE("Euler-Poisson solutions approach the limit as eps decreases") {
  const Grid g(64);
  RunOptions o;
  o.t_end = 0.1;
  o.dt = 1e-3;
  const LimitState lim = evolve(make_state<LimitState>(g, 0.1, 0.1), o).states.back();
  double previous = INFINITY;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    o.eps = eps;
    const EPState ep = evolve(make_state<EPState>(g, 0.1, 0.1), o).states.back();
    const double d = l2_norm(ep.n - lim.n);
    CHECK(d < previous);
    previous = d;
  }
}

TEST_CASE("quasineutrality residual is bounded by eps |phi''| along a trajectory") {
  const Grid g(64);
  RunOptions o;
  o.t_end = 0.05;
  o.dt = 1e-3;
  o.eps = 1e-2;
  o.record_every = 10;
  const auto traj = evolve(make_state<EPState>(g, 0.2, 0.1), o);
  for (const auto& s : traj.states) {
    const Field phi = solve_phi(s.n, o.eps, o.pb).phi;
    const double gap = l2_norm(phi.map([](double v) { return std::exp(v); }) - s.n);
    CHECK(gap <= o.eps * l2_norm(derivative(phi, 2)) + o.pb.tol);
  }
}

TEST_CASE("blow-up guards stop the run and keep the partial trajectory") {
  const Grid g(32);
  RunOptions o;
  o.t_end = 0.01;
  o.dt = 1e-3;
  o.density_floor = 0.95;  // initial minimum is 0.9
  const auto floor_hit = evolve(make_state<LimitState>(g, 0.1, 0.1), o);
  CHECK(floor_hit.blew_up());
  CHECK(floor_hit.states.size() == 1);
  CHECK(floor_hit.event->reason.find("floor") != std::string::npos);

  o.density_floor = 1e-6;
  o.norm_ceiling = 1.0;  // H^2 norm of the data is ~3
  o.eps = 1e-2;
  const auto ceiling_hit = evolve(make_state<EPState>(g, 0.1, 0.1), o);
  CHECK(ceiling_hit.blew_up());
  CHECK(ceiling_hit.event->reason.find("ceiling") != std::string::npos);
  CHECK(ceiling_hit.event->t == doctest::Approx(1e-3));
}

TEST_CASE("run options validation and step planning") {
  RunOptions o;
  CHECK_NOTHROW(o.validate());
  o.eps = -1.0;
  CHECK_THROWS_AS(o.validate(), std::invalid_argument);
  o = {};
  o.dt = 1.0;
  o.t_end = 0.5;
  CHECK_THROWS_AS(o.validate(), std::invalid_argument);
  o = {};
  o.record_every = 0;
  CHECK_THROWS_AS(o.validate(), std::invalid_argument);
  o = {};
  o.density_floor = 0.0;
  CHECK_THROWS_AS(o.validate(), std::invalid_argument);

  const StepPlan p = plan_steps(0.3, 1.0);
  CHECK(p.steps == 4);
  CHECK(p.dt == doctest::Approx(0.25));
  CHECK(plan_steps(0.1, 0.5).steps == 5);
  CHECK(plan_steps(0.1, 0.0).steps == 0);

  const Grid g(256);
  CHECK(default_time_step(Field(g, 0.1)) == doctest::Approx(0.25 / 256 / 1.6));
}
