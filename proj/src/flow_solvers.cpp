#include "debye/flow_solvers.hpp"

#include <cmath>
#include <string>

namespace debye {

void RunOptions::validate() const {
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw std::invalid_argument("run: dt must be >= 0 (0 = automatic)");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("run: t_end must be >= 0");
  if (dt > 0.0 && t_end > 0.0 && dt > t_end) throw std::invalid_argument("run: dt must not exceed t_end");
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw std::invalid_argument("run: eps must be >= 0");
  if (!(density_floor > 0.0)) throw std::invalid_argument("run: density_floor must be positive");
  if (!(norm_ceiling > 0.0)) throw std::invalid_argument("run: norm_ceiling must be positive");
  if (monitor_s < 0 || monitor_s > kMaxSobolevOrder) throw std::invalid_argument("run: monitor_s out of range");
  if (record_every < 1) throw std::invalid_argument("run: record_every must be >= 1");
  pb.validate();
}

double default_time_step(const Field& u) { return 0.25 * u.grid().dx() / (u.max_abs() + 1.5); }

namespace {

Field flux_divergence(const Field& n, const Field& u) { return -derivative(dealias(n * u), 1); }

// -u u_x - phi_x, projected as a whole onto |j| <= N/3. Leaving the potential
// gradient unfiltered lets modes just below the cutoff grow through aliasing
// in the exponential nonlinearity.
Field velocity_tendency(const Field& u, const Field& phi) { return -dealias(u * derivative(u, 1) + derivative(phi, 1)); }

template <class State>
void check_stage(const State& s, double density_floor) {
  if (!s.n.all_finite() || !s.u.all_finite()) throw BlowUpError({s.t, "non-finite field"});
  const double m = s.n.min();
  if (m < density_floor)
    throw BlowUpError({s.t, "density " + std::to_string(m) + " below floor " + std::to_string(density_floor)});
}

template <class State>
void check_norms(const State& s, const RunOptions& opts) {
  const double nn = hs_norm(s.n, opts.monitor_s);
  const double nu = hs_norm(s.u, opts.monitor_s);
  if (!(nn <= opts.norm_ceiling) || !(nu <= opts.norm_ceiling))
    throw BlowUpError({s.t, "H^" + std::to_string(opts.monitor_s) + " norm exceeded ceiling " +
                                std::to_string(opts.norm_ceiling) + " (n: " + std::to_string(nn) +
                                ", u: " + std::to_string(nu) + ")"});
}

template <class State>
State advance(const State& s, const Tendency& k, double h) {
  return State{s.t + h, s.n + h * k.dn, s.u + h * k.du};
}

// Classical RK4. `rhs(state, stage)` returns the tendency at a stage state.
template <class State, class Rhs>
State rk4(const State& s, const RunOptions& opts, Rhs&& rhs) {
  const double dt = opts.dt;
  check_stage(s, opts.density_floor);
  const Tendency k1 = rhs(s, 0);
  const State s2 = advance(s, k1, 0.5 * dt);
  check_stage(s2, opts.density_floor);
  const Tendency k2 = rhs(s2, 1);
  const State s3 = advance(s, k2, 0.5 * dt);
  check_stage(s3, opts.density_floor);
  const Tendency k3 = rhs(s3, 2);
  const State s4 = advance(s, k3, dt);
  check_stage(s4, opts.density_floor);
  const Tendency k4 = rhs(s4, 3);

  State out{s.t + dt, s.n, s.u};
  const double w = dt / 6.0;
  out.n += w * (k1.dn + 2.0 * k2.dn + 2.0 * k3.dn + k4.dn);
  out.u += w * (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du);
  if (opts.spectral_filter) {
    out.n = exponential_filter(out.n);
    out.u = exponential_filter(out.u);
  }
  check_stage(out, opts.density_floor);
  check_norms(out, opts);
  return out;
}

void require_step_size(const RunOptions& opts) {
  if (!(opts.dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
}

}  // namespace

EPTendency rhs_ep(const EPState& state, double eps, const PBSolveOptions& pb, const std::optional<Field>& phi_init) {
  if (!(eps > 0.0)) throw std::invalid_argument("rhs_ep: eps must be positive");
  check_stage(state, 0.0);
  PBSolution potential = solve_phi(state.n, eps, pb, phi_init);
  Field dn = flux_divergence(state.n, state.u);
  Field du = velocity_tendency(state.u, potential.phi);
  return EPTendency{{std::move(dn), std::move(du)}, std::move(potential)};
}

Tendency rhs_limit(const LimitState& state) {
  check_stage(state, 0.0);
  Field dn = flux_divergence(state.n, state.u);
  Field du = velocity_tendency(state.u, solve_phi_limit(state.n));
  return Tendency{std::move(dn), std::move(du)};
}

EPState step(const EPState& state, const RunOptions& opts) {
  require_step_size(opts);
  if (opts.eps == 0.0) {
    return rk4(state, opts, [](const EPState& s, int) { return rhs_limit(LimitState{s.t, s.n, s.u}); });
  }
  if (!(opts.eps > 0.0)) throw std::invalid_argument("step: eps must be >= 0");
  // Later stages start Newton from the previous stage's potential.
  std::optional<Field> warm;
  return rk4(state, opts, [&](const EPState& s, int stage) -> Tendency {
    EPTendency k = rhs_ep(s, opts.eps, opts.pb, stage == 0 ? std::nullopt : warm);
    warm = std::move(k.potential.phi);
    return static_cast<Tendency&&>(k);
  });
}

LimitState step(const LimitState& state, const RunOptions& opts) {
  require_step_size(opts);
  return rk4(state, opts, [](const LimitState& s, int) { return rhs_limit(s); });
}

StepPlan plan_steps(double dt, double t_end) {
  if (t_end <= 0.0) return {0, dt};
  const long steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  return {steps, t_end / static_cast<double>(steps)};
}

namespace {

template <class State>
Trajectory<State> evolve_impl(const State& initial, const RunOptions& opts, const Observer<State>& observer) {
  opts.validate();
  Trajectory<State> traj;
  const double dt_req = opts.dt > 0.0 ? opts.dt : default_time_step(initial.u);
  const StepPlan plan = plan_steps(dt_req, opts.t_end);
  traj.dt = plan.dt;

  RunOptions local = opts;
  local.dt = plan.dt;

  auto record = [&](const State& s) {
    traj.states.push_back(s);
    if (observer) observer(s);
  };

  State current = initial;
  record(current);
  try {
    for (long k = 1; k <= plan.steps; ++k) {
      current = step(current, local);
      // Rebuild t from the step count so both flows share bit-identical times.
      current.t = initial.t + static_cast<double>(k) * plan.dt;
      traj.steps = k;
      if (k % opts.record_every == 0 || k == plan.steps) record(current);
    }
  } catch (const BlowUpError& e) {
    traj.event = e.event();
  }
  return traj;
}

}  // namespace

Trajectory<EPState> evolve(const EPState& initial, const RunOptions& opts, const Observer<EPState>& observer) {
  return evolve_impl(initial, opts, observer);
}

Trajectory<LimitState> evolve(const LimitState& initial, const RunOptions& opts,
                              const Observer<LimitState>& observer) {
  return evolve_impl(initial, opts, observer);
}

}  // namespace debye
