#pragma once

// Time integration of the cold-ion Euler-Poisson system
//   n_t + (n u)_x = 0,  u_t + u u_x = -phi_x,  eps phi_xx = exp(phi) - n
// and of its quasineutral limit (phi = ln n), on the unit torus.
// Classical RK4 in time, Fourier pseudospectral in space.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "debye/poisson_boltzmann.hpp"
#include "debye/spectral_grid.hpp"

namespace debye {

template <class Tag>
struct FlowState {
  double t = 0.0;
  Field n;  // ion density
  Field u;  // velocity

  friend bool operator==(const FlowState&, const FlowState&) = default;
};

struct EulerPoissonTag;
struct LimitTag;
using EPState = FlowState<EulerPoissonTag>;
using LimitState = FlowState<LimitTag>;

struct RunOptions {
  double dt = 0.0;  // 0 selects default_time_step() at run start
  double t_end = 0.5;
  double eps = 0.0;  // 0 selects the limit flow
  double density_floor = 1e-6;
  double norm_ceiling = 1e6;
  int monitor_s = 2;  // Sobolev order of the norm-ceiling monitor
  PBSolveOptions pb;
  int record_every = 1;
  bool spectral_filter = false;

  void validate() const;
};

struct BlowUpEvent {
  double t = 0.0;
  std::string reason;
};

class BlowUpError : public std::runtime_error {
 public:
  explicit BlowUpError(BlowUpEvent e) : std::runtime_error(e.reason), event_(std::move(e)) {}
  const BlowUpEvent& event() const noexcept { return event_; }

 private:
  BlowUpEvent event_;
};

struct Tendency {
  Field dn;
  Field du;
};

struct EPTendency : Tendency {
  PBSolution potential;
};

/// 0.25 dx / (max|u| + 1.5).
double default_time_step(const Field& u);

EPTendency rhs_ep(const EPState& state, double eps, const PBSolveOptions& pb,
                  const std::optional<Field>& phi_init = std::nullopt);
Tendency rhs_limit(const LimitState& state);

/// One RK4 step of size opts.dt. The EP overload dispatches to the limit
/// right-hand side when opts.eps == 0. Throws BlowUpError when the density
/// drops below opts.density_floor, a field becomes non-finite, or the H^s
/// monitor of n or u exceeds opts.norm_ceiling.
EPState step(const EPState& state, const RunOptions& opts);
LimitState step(const LimitState& state, const RunOptions& opts);

template <class State>
struct Trajectory {
  std::vector<State> states;
  std::optional<BlowUpEvent> event;
  double dt = 0.0;  // step actually used
  long steps = 0;

  bool blew_up() const noexcept { return event.has_value(); }
};

template <class State>
using Observer = std::function<void(const State&)>;

/// Number of steps and uniform step size covering [0, t_end]; the requested
/// dt is shortened so that an integer number of steps lands on t_end.
struct StepPlan {
  long steps = 0;
  double dt = 0.0;
};
StepPlan plan_steps(double dt, double t_end);

/// Steps to opts.t_end, recording the initial state and every
/// opts.record_every-th step (the final state is always recorded). The
/// observer sees each recorded state. On blow-up the partial trajectory is
/// returned together with the event.
Trajectory<EPState> evolve(const EPState& initial, const RunOptions& opts, const Observer<EPState>& observer = {});
Trajectory<LimitState> evolve(const LimitState& initial, const RunOptions& opts,
                              const Observer<LimitState>& observer = {});

}  // namespace debye
