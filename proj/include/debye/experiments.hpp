#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "debye/energy_ledger.hpp"
#include "debye/initial_data.hpp"

namespace debye {

struct SweepSpec {
  std::vector<double> eps_list{1e-1, 1e-2, 1e-3, 1e-4};
  std::size_t n_points = 256;
  RunOptions run;  // eps is ignored; each row uses its own
  InitParams init;
  std::vector<int> s_list{0, 1, 2};
  int s_fit = 2;  // Sobolev order of the convergence-order fits
  std::uint64_t seed = 0;
  int identity_gamma = 0;

  // Verdict thresholds.
  double bound_factor = 2.0;
  double ratio_factor = 3.0;
  double order_lo = 0.85;
  double order_hi = 1.15;
  double r2_min = 0.99;
  double identity_tol = 1e-4;
  double gap_identity_tol = 1e-9;

  /// Requires a non-empty, non-increasing eps_list of positive values (a
  /// repeated value yields a repeated row). Order fits additionally need
  /// three distinct values spanning two decades; otherwise they are skipped.
  void validate() const;
  bool fits_possible() const;
};

struct OrderFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_ci_low = 0.0;   // 95% confidence interval on the slope
  double slope_ci_high = 0.0;  // (infinite for two points)
};

/// Ordinary least squares of log(err) against log(eps). Needs >= 2 pairs
/// (>= 3 for a meaningful r^2), all strictly positive.
OrderFit fit_order(std::span<const std::pair<double, double>> pairs);

struct QuasineutralityGap {
  double sup_gap = 0.0;              // sup_t |exp(phi^eps) - n^eps|_{L2}
  double max_identity_defect = 0.0;  // sup_t | gap - eps |phi^eps''|_{L2} |
};

QuasineutralityGap quasineutrality_gap(std::span<const CoupledSample> samples, double eps);

/// One line of the remainder time series. Residuals compare the record with
/// its predecessor and are NaN on the first record.
struct RemainderPoint {
  double t = 0.0;
  int s = 0;
  TripleNorm norm;
  RemainderResidual residual;
};

struct SweepRow {
  double eps = 0.0;
  bool blew_up = false;
  std::string event;
  long records = 0;
  double wall_seconds = 0.0;

  // Indexed like SweepSpec::s_list.
  std::vector<double> sup_n1_hs;
  std::vector<double> sup_u1_triple;
  std::vector<double> sup_phi1_triple;
  std::vector<double> sup_combined;
  std::vector<double> err_n_hs;  // sup_t |n^eps - n0|_{H^s}
  std::vector<double> err_u_hs;  // sup_t |u^eps - u0|_{H^s}
  // Indexed by k = 0..max(s_list).
  std::vector<double> ratio_n_over_phi;
  std::vector<double> ratio_phi_over_n;

  QuasineutralityGap gap;
  std::optional<double> identity_defect;  // absent when record spacing > 1e-3
  double min_n_eps = 0.0;
  std::vector<RemainderPoint> series;  // per record and s
};

struct FitResult {
  std::string quantity;
  OrderFit fit;
  bool excluded_largest = false;
  std::size_t points = 0;
  Verdict verdict = Verdict::Inconclusive;
};

struct NamedVerdict {
  std::string name;
  Verdict verdict = Verdict::Pass;
  std::string detail;
};

struct SweepReport {
  SweepSpec spec;
  double dt = 0.0;
  std::vector<SweepRow> rows;
  std::vector<FitResult> fits;
  std::vector<GronwallReport> gronwall;  // indexed like s_list
  std::vector<NamedVerdict> verdicts;

  bool any_blowup() const;
  bool any_fail() const;
};

/// Evolves the limit flow once and every EP member (concurrently, up to
/// `jobs` at a time) from identical data, then aggregates. Rows follow
/// eps_list order; results do not depend on `jobs`.
SweepReport run_sweep(const SweepSpec& spec, int jobs = 1);

/// Per-row statistics from coupled samples (exposed for the CLI and tests).
SweepRow summarize_run(double eps, std::span<const CoupledSample> samples, const std::vector<int>& s_list,
                       int identity_gamma, const std::optional<BlowUpEvent>& event);

/// Longest prefix of `samples` with uniform time spacing (the final record of
/// a run may sit closer to its predecessor).
std::span<const CoupledSample> uniform_prefix(std::span<const CoupledSample> samples);

nlohmann::json to_json(const SweepSpec& spec);
nlohmann::json to_json(const SweepReport& report);
std::string to_csv(const SweepReport& report);
/// Header t,eps,s,n1_Hs,u1_triple,phi1_triple,combined,res_n,res_u,res_phi.
std::string remainder_series_csv(const SweepReport& report);

}  // namespace debye
