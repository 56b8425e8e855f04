#pragma once

// Weighted energies of the remainder, the exact balance
//   d/dt (1/2)|D^g u1|^2 = I + II + III + IV
// checked against finite differences of recorded snapshots, the
// uniform-boundedness monitor for the eps sweep, and sampling of the
// commutator estimate |D^k(fg) - f D^k g|.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "debye/remainder_diag.hpp"

namespace debye {

struct EnergySnapshot {
  double t = 0.0;
  int gamma = 0;
  double e_kin = 0.0;   // (1/2) |D^g u1|^2
  double e_phi = 0.0;   // (1/2) int (n0/n^eps) |D^g phi1|^2
  double e_grad = 0.0;  // (eps/2) int (1/n^eps) |D^g phi1'|^2
  double e_visc = 0.0;  // (eps/2) int |D^g u1'|^2
  double e_lap = 0.0;   // (eps^2/2) int (1/n^eps) |D^g phi1''|^2
  // -int D^g phi1' D^g u1, -eps int D^g(u1 u1') D^g u1,
  // -int D^g(u0 u1') D^g u1, -int D^g(u1 u0') D^g u1
  double term_I = 0.0;
  double term_II = 0.0;
  double term_III = 0.0;
  double term_IV = 0.0;

  double kinetic_rate() const noexcept { return term_I + term_II + term_III + term_IV; }
};

/// n^eps is rebuilt as n0 + eps n1. Throws std::domain_error if n^eps leaves
/// the bracket (min n0 / 2, 2 max n0).
EnergySnapshot energy_snapshot(const EPState& ep, const LimitState& lim, const Remainder& rem, int gamma);

struct IdentityCheck {
  std::vector<EnergySnapshot> snapshots;
  std::vector<double> lhs;     // centered difference of e_kin (NaN at the ends)
  std::vector<double> defect;  // |lhs - rhs| / scale (NaN at the ends)
  double scale = 0.0;          // max_t |I + II + III + IV| over the window
  double max_defect = 0.0;
};

/// Compares the centered difference of e_kin with I + II + III + IV at each
/// interior sample. Defects are normalized by the window maximum of
/// |I + II + III + IV|; an identically zero window gives defect 0.
/// Samples must be equally spaced with spacing <= 1e-3.
IdentityCheck energy_identity_check(std::span<const CoupledSample> samples, int gamma);

enum class Verdict { Pass, Fail, Inconclusive };
const char* to_string(Verdict v) noexcept;

struct GronwallMember {
  double eps = 0.0;
  double sup_combined = 0.0;             // sup_t of the combined triple norm
  std::optional<BlowUpEvent> event;      // set when the member run blew up
};

struct GronwallReport {
  Verdict verdict = Verdict::Pass;
  double reference = 0.0;  // value at the largest eps
  double bound_factor = 2.0;
  double worst_ratio = 0.0;
  std::vector<GronwallMember> members;
  std::string note;
};

double sup_combined_triple_norm(std::span<const CoupledSample> samples, int s);

/// PASS when every member's sup is at most bound_factor times the member with
/// the largest eps; INCONCLUSIVE if any member blew up.
GronwallReport gronwall_monitor(std::span<const GronwallMember> members, double bound_factor = 2.0);

struct CommutatorSample {
  double lhs = 0.0;  // |D^k(fg) - f D^k g|
  double rhs = 0.0;  // max|f'| |D^{k-1} g| + |D^k f| max|g|
};

/// Products are formed on a grid refined by 2x to suppress aliasing.
CommutatorSample kato_ponce_sample(const Field& f, const Field& g, int k);

struct CommutatorBattery {
  int k = 0;
  double max_ratio = 0.0;
  std::vector<double> ratios;
};

/// Random band-limited pairs (modes <= max_mode) drawn from a seeded engine.
std::vector<CommutatorBattery> kato_ponce_battery(std::size_t n_points, std::span<const int> ks, int samples,
                                                  std::uint64_t seed, int max_mode = 8);

}  // namespace debye
