#pragma once

// First-order remainders of the quasineutral expansion
//   n^eps = n0 + eps n1,  u^eps = u0 + eps u1,  phi^eps = phi0 + eps phi1,
// with phi0 = ln n0, and the eps-weighted norms that control them.

#include <span>
#include <vector>

#include "debye/flow_solvers.hpp"

namespace debye {

struct Remainder {
  double t = 0.0;
  double eps = 0.0;
  Field n1;
  Field u1;
  Field phi1;
};

/// n1_part = |n1|_{H^s}
/// u1_part^2 = |u1|_{H^s}^2 + eps |u1'|_{H^s}^2
/// phi1_part^2 = |phi1|_{H^s}^2 + eps |phi1'|_{H^s}^2 + eps^2 |phi1''|_{H^s}^2
/// combined^2 = u1_part^2 + phi1_part^2
struct TripleNorm {
  int s = 0;
  double n1_part = 0.0;
  double u1_part = 0.0;
  double phi1_part = 0.0;
  double combined = 0.0;
};

/// Builds the remainder from a matched pair of snapshots and the solved
/// potential phi^eps of `ep`.
Remainder form_remainder(const EPState& ep, const LimitState& lim, const Field& phi_eps, double eps);
/// Same, solving for phi^eps first.
Remainder form_remainder(const EPState& ep, const LimitState& lim, double eps, const PBSolveOptions& pb = {});

/// eps^{-3/2} (n0 + eps n0 phi1 - exp(phi0 + eps phi1)). Requires n0 = exp(phi0)
/// to 1e-10 relative.
Field r1_field(const Field& phi0, const Field& phi1, const Field& n0, double eps);

/// Pointwise majorant from the integral Taylor form,
///   sqrt(eps) exp(phi0) phi1^2 * int_0^1 exp(theta eps phi1) (1 - theta) dtheta.
/// Equals |r1_field| in exact arithmetic.
Field r1_majorant(const Field& phi0, const Field& phi1, double eps);

TripleNorm triple_norm(const Remainder& rem, int s);

struct RemainderResidual {
  double res_n = 0.0;
  double res_u = 0.0;
  double res_phi = 0.0;
};

/// L2 defects of the remainder equations between two recorded times. Time
/// derivatives are differences across the pair; spatial terms are averaged
/// over both ends (second order about the midpoint). res_phi is the larger of
/// the two instantaneous elliptic defects.
RemainderResidual remainder_residual(const Remainder& a, const Remainder& b, const LimitState& lim_a,
                                     const LimitState& lim_b);

/// Empirical elliptic-estimate ratios at derivative order k:
///   n_over_phi = |n1|_{H^k}^2 / (1 + |phi1|_{H^k}^2 + eps^2 |phi1''|_{H^k}^2)
///   phi_over_n = (|phi1|_{H^k}^2 + eps |phi1'|_{H^k}^2 + eps^2 |phi1''|_{H^k}^2) / (1 + |n1|_{H^k}^2)
struct EllipticRatios {
  double n_over_phi = 0.0;
  double phi_over_n = 0.0;
};
EllipticRatios elliptic_ratios(const Remainder& rem, int k);

/// A matched EP/limit snapshot pair with its solved potential and remainder.
struct CoupledSample {
  EPState ep;
  LimitState lim;
  Field phi_eps;
  Remainder rem;
};

/// Pairs the recorded states of two runs that used the same dt and
/// record_every; stops at the shorter trajectory.
std::vector<CoupledSample> couple(const Trajectory<EPState>& ep, const Trajectory<LimitState>& lim, double eps,
                                  const PBSolveOptions& pb = {});

}  // namespace debye
