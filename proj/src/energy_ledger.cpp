#include "debye/energy_ledger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace debye {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double weighted_square(const Field& weight, const Field& f) { return integrate(weight * f * f); }

}  // namespace

EnergySnapshot energy_snapshot(const EPState& ep, const LimitState& lim, const Remainder& rem, int gamma) {
  if (std::abs(ep.t - lim.t) > 1e-12 * std::max(1.0, std::abs(ep.t)) ||
      std::abs(rem.t - lim.t) > 1e-12 * std::max(1.0, std::abs(rem.t)))
    throw std::invalid_argument("energy_snapshot: inconsistent times");
  const double eps = rem.eps;
  const Field& n0 = lim.n;
  const Field n_eps = n0 + eps * rem.n1;

  const double lo = 0.5 * n0.min();
  const double hi = 2.0 * n0.max();
  if (!(n_eps.min() > lo && n_eps.max() < hi))
    throw std::domain_error("energy_snapshot: density bracket violated, n^eps in [" + std::to_string(n_eps.min()) +
                            ", " + std::to_string(n_eps.max()) + "] but must lie in (" + std::to_string(lo) + ", " +
                            std::to_string(hi) + ")");

  const Field inv_n = n_eps.map([](double v) { return 1.0 / v; });
  const Field dg_u1 = derivative(rem.u1, gamma);
  const Field dg_phi1 = derivative(rem.phi1, gamma);
  const Field du1 = derivative(rem.u1, 1);
  const Field du0 = derivative(lim.u, 1);

  EnergySnapshot e;
  e.t = rem.t;
  e.gamma = gamma;
  e.e_kin = 0.5 * integrate(dg_u1 * dg_u1);
  e.e_phi = 0.5 * weighted_square(n0 * inv_n, dg_phi1);
  e.e_grad = 0.5 * eps * weighted_square(inv_n, derivative(rem.phi1, gamma + 1));
  const Field dg_du1 = derivative(rem.u1, gamma + 1);
  e.e_visc = 0.5 * eps * integrate(dg_du1 * dg_du1);
  e.e_lap = 0.5 * eps * eps * weighted_square(inv_n, derivative(rem.phi1, gamma + 2));

  // Products are dealiased exactly as in the flow right-hand side.
  e.term_I = -integrate(derivative(rem.phi1, gamma + 1) * dg_u1);
  e.term_II = -eps * integrate(derivative(dealias(rem.u1 * du1), gamma) * dg_u1);
  e.term_III = -integrate(derivative(dealias(lim.u * du1), gamma) * dg_u1);
  e.term_IV = -integrate(derivative(dealias(rem.u1 * du0), gamma) * dg_u1);
  return e;
}

IdentityCheck energy_identity_check(std::span<const CoupledSample> samples, int gamma) {
  IdentityCheck out;
  if (samples.empty()) return out;
  out.snapshots.reserve(samples.size());
  for (const auto& s : samples) out.snapshots.push_back(energy_snapshot(s.ep, s.lim, s.rem, gamma));

  const std::size_t m = samples.size();
  out.lhs.assign(m, kNaN);
  out.defect.assign(m, kNaN);
  if (m < 3) return out;

  const double spacing = samples[1].rem.t - samples[0].rem.t;
  if (!(spacing > 0.0) || spacing > 1e-3 * (1.0 + 1e-9))
    throw std::invalid_argument("energy_identity_check: record spacing must lie in (0, 1e-3]");
  for (std::size_t i = 1; i < m; ++i) {
    const double d = samples[i].rem.t - samples[i - 1].rem.t;
    if (std::abs(d - spacing) > 1e-9 * spacing)
      throw std::invalid_argument("energy_identity_check: samples are not equally spaced");
  }

  for (std::size_t i = 1; i + 1 < m; ++i)
    out.scale = std::max(out.scale, std::abs(out.snapshots[i].kinetic_rate()));
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const double dt = samples[i + 1].rem.t - samples[i - 1].rem.t;
    out.lhs[i] = (out.snapshots[i + 1].e_kin - out.snapshots[i - 1].e_kin) / dt;
    const double diff = std::abs(out.lhs[i] - out.snapshots[i].kinetic_rate());
    out.defect[i] = out.scale > 0.0 ? diff / out.scale : diff;
    out.max_defect = std::max(out.max_defect, out.defect[i]);
  }
  return out;
}

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Pass:
      return "PASS";
    case Verdict::Fail:
      return "FAIL";
    case Verdict::Inconclusive:
      return "INCONCLUSIVE";
  }
  return "?";
}

double sup_combined_triple_norm(std::span<const CoupledSample> samples, int s) {
  double sup = 0.0;
  for (const auto& smp : samples) sup = std::max(sup, triple_norm(smp.rem, s).combined);
  return sup;
}

GronwallReport gronwall_monitor(std::span<const GronwallMember> members, double bound_factor) {
  if (members.empty()) throw std::invalid_argument("gronwall_monitor: empty sweep");
  if (!(bound_factor > 0.0)) throw std::invalid_argument("gronwall_monitor: bound_factor must be positive");

  GronwallReport rep;
  rep.bound_factor = bound_factor;
  rep.members.assign(members.begin(), members.end());

  for (const auto& m : members) {
    if (m.event) {
      rep.verdict = Verdict::Inconclusive;
      rep.note = "run at eps=" + std::to_string(m.eps) + " blew up at t=" + std::to_string(m.event->t) + ": " +
                 m.event->reason;
      return rep;
    }
  }

  const auto ref = std::max_element(members.begin(), members.end(),
                                    [](const auto& a, const auto& b) { return a.eps < b.eps; });
  rep.reference = ref->sup_combined;
  for (const auto& m : members) {
    const double ratio = rep.reference > 0.0 ? m.sup_combined / rep.reference : (m.sup_combined > 0.0 ? INFINITY : 0.0);
    rep.worst_ratio = std::max(rep.worst_ratio, ratio);
    if (!(m.sup_combined <= bound_factor * rep.reference)) rep.verdict = Verdict::Fail;
  }
  return rep;
}

CommutatorSample kato_ponce_sample(const Field& f, const Field& g, int k) {
  if (k < 1) throw std::invalid_argument("kato_ponce_sample: k must be >= 1");
  if (!(f.grid() == g.grid())) throw std::invalid_argument("kato_ponce_sample: grid mismatch");
  const Grid fine(2 * f.grid().size());
  const Field ff = refine(f, fine);
  const Field gf = refine(g, fine);

  CommutatorSample out;
  out.lhs = l2_norm(derivative(ff * gf, k) - ff * derivative(gf, k));
  out.rhs = derivative(ff, 1).max_abs() * l2_norm(derivative(gf, k - 1)) + l2_norm(derivative(ff, k)) * gf.max_abs();
  return out;
}

std::vector<CommutatorBattery> kato_ponce_battery(std::size_t n_points, std::span<const int> ks, int samples,
                                                  std::uint64_t seed, int max_mode) {
  const Grid grid(n_points);
  std::vector<CommutatorBattery> out;
  for (int k : ks) out.push_back(CommutatorBattery{k, 0.0, {}});

  std::mt19937_64 rng(seed);
  for (int i = 0; i < samples; ++i) {
    const Field f = BandLimited::random(max_mode, rng).sample(grid);
    const Field g = BandLimited::random(max_mode, rng).sample(grid);
    for (auto& b : out) {
      const CommutatorSample s = kato_ponce_sample(f, g, b.k);
      const double r = s.lhs / s.rhs;
      b.ratios.push_back(r);
      b.max_ratio = std::max(b.max_ratio, r);
    }
  }
  return out;
}

}  // namespace debye
