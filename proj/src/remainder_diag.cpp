#include "debye/remainder_diag.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace debye {

namespace {

void require_positive_eps(double eps, const char* op) {
  if (!(eps > 0.0)) throw std::invalid_argument(std::string(op) + ": eps must be positive");
}

void require_matched_times(double a, double b, const char* op) {
  if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)))
    throw std::invalid_argument(std::string(op) + ": time mismatch (" + std::to_string(a) + " vs " +
                                std::to_string(b) + ")");
}

double sq(double v) { return v * v; }

// int_0^1 exp(theta a) (1 - theta) dtheta = (e^a - 1 - a) / a^2
double taylor_kernel(double a) {
  if (std::abs(a) < 1e-2)
    return 0.5 + a * (1.0 / 6.0 + a * (1.0 / 24.0 + a * (1.0 / 120.0 + a * (1.0 / 720.0 + a / 5040.0))));
  return (std::expm1(a) - a) / (a * a);
}

}  // namespace

Remainder form_remainder(const EPState& ep, const LimitState& lim, const Field& phi_eps, double eps) {
  require_positive_eps(eps, "form_remainder");
  require_matched_times(ep.t, lim.t, "form_remainder");
  if (!(ep.n.min() > 0.0)) throw std::domain_error("form_remainder: EP density not positive");
  const Field phi0 = solve_phi_limit(lim.n);
  return Remainder{ep.t, eps, (ep.n - lim.n) / eps, (ep.u - lim.u) / eps, (phi_eps - phi0) / eps};
}

Remainder form_remainder(const EPState& ep, const LimitState& lim, double eps, const PBSolveOptions& pb) {
  require_positive_eps(eps, "form_remainder");
  return form_remainder(ep, lim, solve_phi(ep.n, eps, pb).phi, eps);
}

Field r1_field(const Field& phi0, const Field& phi1, const Field& n0, double eps) {
  require_positive_eps(eps, "r1_field");
  double worst = 0.0;
  for (std::size_t i = 0; i < n0.size(); ++i)
    worst = std::max(worst, std::abs(n0[i] - std::exp(phi0[i])) / std::max(1.0, std::abs(n0[i])));
  if (!(worst <= 1e-10))
    throw std::invalid_argument("r1_field: n0 must equal exp(phi0) (mismatch " + std::to_string(worst) + ")");

  const double scale = std::pow(eps, -1.5);
  Field out(n0.grid());
  // n0 (1 + a - e^a) + (n0 - e^phi0) e^a with a = eps phi1; avoids cancelling
  // two O(1) terms down to O(eps^2).
  for (std::size_t i = 0; i < n0.size(); ++i) {
    const double a = eps * phi1[i];
    out[i] = scale * (n0[i] * (a - std::expm1(a)) + (n0[i] - std::exp(phi0[i])) * std::exp(a));
  }
  return out;
}

Field r1_majorant(const Field& phi0, const Field& phi1, double eps) {
  require_positive_eps(eps, "r1_majorant");
  const double root = std::sqrt(eps);
  Field out(phi0.grid());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = root * std::exp(phi0[i]) * taylor_kernel(eps * phi1[i]) * sq(phi1[i]);
  return out;
}

TripleNorm triple_norm(const Remainder& rem, int s) {
  const double eps = rem.eps;
  TripleNorm tn;
  tn.s = s;
  tn.n1_part = hs_norm(rem.n1, s);
  tn.u1_part = std::sqrt(sq(hs_norm(rem.u1, s)) + eps * sq(hs_norm(derivative(rem.u1, 1), s)));
  tn.phi1_part = std::sqrt(sq(hs_norm(rem.phi1, s)) + eps * sq(hs_norm(derivative(rem.phi1, 1), s)) +
                           eps * eps * sq(hs_norm(derivative(rem.phi1, 2), s)));
  tn.combined = std::hypot(tn.u1_part, tn.phi1_part);
  return tn;
}

namespace {

// Spatial part of the n1 equation: (n0 u1 + u0 n1 + eps n1 u1)_x
Field n1_flux(const Remainder& r, const LimitState& lim) {
  return derivative(dealias(lim.n * r.u1 + lim.u * r.n1 + r.eps * (r.n1 * r.u1)), 1);
}

// Spatial part of the u1 equation: u0 u1_x + u1 u0_x + eps u1 u1_x + phi1_x
Field u1_terms(const Remainder& r, const LimitState& lim) {
  const Field du1 = derivative(r.u1, 1);
  const Field du0 = derivative(lim.u, 1);
  return dealias(lim.u * du1 + r.u1 * du0 + r.eps * (r.u1 * du1)) + derivative(r.phi1, 1);
}

// -eps phi1'' - phi0'' - n1 + n0 phi1 - sqrt(eps) R1
double elliptic_defect(const Remainder& r, const LimitState& lim) {
  const Field phi0 = solve_phi_limit(lim.n);
  const Field r1 = r1_field(phi0, r.phi1, lim.n, r.eps);
  const Field defect = -r.eps * derivative(r.phi1, 2) - derivative(phi0, 2) - r.n1 + lim.n * r.phi1 -
                       std::sqrt(r.eps) * r1;
  return l2_norm(dealias(defect));
}

}  // namespace

RemainderResidual remainder_residual(const Remainder& a, const Remainder& b, const LimitState& lim_a,
                                     const LimitState& lim_b) {
  require_matched_times(a.t, lim_a.t, "remainder_residual");
  require_matched_times(b.t, lim_b.t, "remainder_residual");
  if (a.eps != b.eps) throw std::invalid_argument("remainder_residual: eps differs between snapshots");
  const double dt = b.t - a.t;
  if (!(dt > 0.0)) throw std::invalid_argument("remainder_residual: snapshots must be in increasing time order");

  RemainderResidual out;
  out.res_n = l2_norm((b.n1 - a.n1) / dt + 0.5 * (n1_flux(a, lim_a) + n1_flux(b, lim_b)));
  out.res_u = l2_norm((b.u1 - a.u1) / dt + 0.5 * (u1_terms(a, lim_a) + u1_terms(b, lim_b)));
  out.res_phi = std::max(elliptic_defect(a, lim_a), elliptic_defect(b, lim_b));
  return out;
}

EllipticRatios elliptic_ratios(const Remainder& rem, int k) {
  const double eps = rem.eps;
  const double n1 = sq(hs_norm(rem.n1, k));
  const double p0 = sq(hs_norm(rem.phi1, k));
  const double p1 = sq(hs_norm(derivative(rem.phi1, 1), k));
  const double p2 = sq(hs_norm(derivative(rem.phi1, 2), k));
  return EllipticRatios{n1 / (1.0 + p0 + eps * eps * p2), (p0 + eps * p1 + eps * eps * p2) / (1.0 + n1)};
}

std::vector<CoupledSample> couple(const Trajectory<EPState>& ep, const Trajectory<LimitState>& lim, double eps,
                                  const PBSolveOptions& pb) {
  require_positive_eps(eps, "couple");
  const std::size_t count = std::min(ep.states.size(), lim.states.size());
  std::vector<CoupledSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const EPState& e = ep.states[i];
    const LimitState& l = lim.states[i];
    Field phi = solve_phi(e.n, eps, pb).phi;
    Remainder rem = form_remainder(e, l, phi, eps);
    out.push_back(CoupledSample{e, l, std::move(phi), std::move(rem)});
  }
  return out;
}

}  // namespace debye
