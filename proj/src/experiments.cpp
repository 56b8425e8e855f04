#include "debye/experiments.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <set>
#include <stdexcept>
#include <thread>

#include "debye/csv_io.hpp"

namespace debye {

void SweepSpec::validate() const {
  if (eps_list.empty()) throw std::invalid_argument("sweep: eps_list is empty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0) || !std::isfinite(eps_list[i]))
      throw std::invalid_argument("sweep: every eps must be positive and finite");
    if (i > 0 && eps_list[i] > eps_list[i - 1]) throw std::invalid_argument("sweep: eps_list must be decreasing");
  }
  if (s_list.empty()) throw std::invalid_argument("sweep: s_list is empty");
  for (int s : s_list)
    if (s < 0 || s > 2) throw std::invalid_argument("sweep: Sobolev orders must lie in [0, 2]");
  if (std::find(s_list.begin(), s_list.end(), s_fit) == s_list.end())
    throw std::invalid_argument("sweep: s_fit must be one of s_list");
  if (identity_gamma < 0 || identity_gamma > 2) throw std::invalid_argument("sweep: identity_gamma must lie in [0, 2]");
  if (!(bound_factor > 0.0) || !(ratio_factor > 0.0)) throw std::invalid_argument("sweep: factors must be positive");
  if (!(order_lo <= order_hi)) throw std::invalid_argument("sweep: order_lo must not exceed order_hi");
  (void)Grid(n_points);
  init.validate();
  RunOptions r = run;
  r.eps = 0.0;
  r.validate();
}

bool SweepSpec::fits_possible() const {
  std::set<double> distinct(eps_list.begin(), eps_list.end());
  return distinct.size() >= 3 && *distinct.rbegin() / *distinct.begin() >= 100.0 * (1.0 - 1e-12);
}

OrderFit fit_order(std::span<const std::pair<double, double>> pairs) {
  if (pairs.size() < 2) throw std::invalid_argument("fit_order: need at least two points");
  for (const auto& [e, r] : pairs)
    if (!(e > 0.0) || !(r > 0.0)) throw std::invalid_argument("fit_order: entries must be strictly positive");

  const double m = static_cast<double>(pairs.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [e, r] : pairs) {
    mx += std::log(e);
    my += std::log(r);
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [e, r] : pairs) {
    const double dx = std::log(e) - mx;
    const double dy = std::log(r) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_order: eps values must not all coincide");

  OrderFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double sse = std::max(0.0, syy - fit.slope * sxy);
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;

  const double dof = m - 2.0;
  if (dof >= 1.0) {
    const boost::math::students_t dist(dof);
    const double tq = boost::math::quantile(boost::math::complement(dist, 0.025));
    const double se = std::sqrt(sse / dof / sxx);
    fit.slope_ci_low = fit.slope - tq * se;
    fit.slope_ci_high = fit.slope + tq * se;
  } else {
    fit.slope_ci_low = -std::numeric_limits<double>::infinity();
    fit.slope_ci_high = std::numeric_limits<double>::infinity();
  }
  return fit;
}

QuasineutralityGap quasineutrality_gap(std::span<const CoupledSample> samples, double eps) {
  QuasineutralityGap out;
  for (const auto& s : samples) {
    const double gap = l2_norm(s.phi_eps.map([](double v) { return std::exp(v); }) - s.ep.n);
    const double lap = eps * l2_norm(derivative(s.phi_eps, 2));
    out.sup_gap = std::max(out.sup_gap, gap);
    out.max_identity_defect = std::max(out.max_identity_defect, std::abs(gap - lap));
  }
  return out;
}

std::span<const CoupledSample> uniform_prefix(std::span<const CoupledSample> samples) {
  if (samples.size() < 3) return samples;
  const double h = samples[1].rem.t - samples[0].rem.t;
  std::size_t m = 2;
  while (m < samples.size() && std::abs(samples[m].rem.t - samples[m - 1].rem.t - h) <= 1e-9 * h) ++m;
  return samples.first(m);
}

SweepRow summarize_run(double eps, std::span<const CoupledSample> samples, const std::vector<int>& s_list,
                       int identity_gamma, const std::optional<BlowUpEvent>& event) {
  SweepRow row;
  row.eps = eps;
  row.blew_up = event.has_value();
  if (event) row.event = "t=" + format_double(event->t) + ": " + event->reason;
  row.records = static_cast<long>(samples.size());

  const std::size_t ns = s_list.size();
  row.sup_n1_hs.assign(ns, 0.0);
  row.sup_u1_triple.assign(ns, 0.0);
  row.sup_phi1_triple.assign(ns, 0.0);
  row.sup_combined.assign(ns, 0.0);
  row.err_n_hs.assign(ns, 0.0);
  row.err_u_hs.assign(ns, 0.0);
  const int k_max = *std::max_element(s_list.begin(), s_list.end());
  row.ratio_n_over_phi.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  row.ratio_phi_over_n.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  row.min_n_eps = std::numeric_limits<double>::infinity();

  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const CoupledSample& smp = samples[j];
    const RemainderResidual res = j == 0 ? RemainderResidual{nan, nan, nan}
                                         : remainder_residual(samples[j - 1].rem, smp.rem, samples[j - 1].lim, smp.lim);
    row.min_n_eps = std::min(row.min_n_eps, smp.ep.n.min());
    const Field dn = smp.ep.n - smp.lim.n;
    const Field du = smp.ep.u - smp.lim.u;
    for (std::size_t i = 0; i < ns; ++i) {
      const TripleNorm tn = triple_norm(smp.rem, s_list[i]);
      row.sup_n1_hs[i] = std::max(row.sup_n1_hs[i], tn.n1_part);
      row.sup_u1_triple[i] = std::max(row.sup_u1_triple[i], tn.u1_part);
      row.sup_phi1_triple[i] = std::max(row.sup_phi1_triple[i], tn.phi1_part);
      row.sup_combined[i] = std::max(row.sup_combined[i], tn.combined);
      row.err_n_hs[i] = std::max(row.err_n_hs[i], hs_norm(dn, s_list[i]));
      row.err_u_hs[i] = std::max(row.err_u_hs[i], hs_norm(du, s_list[i]));
      row.series.push_back({smp.rem.t, s_list[i], tn, res});
    }
    for (int k = 0; k <= k_max; ++k) {
      const EllipticRatios r = elliptic_ratios(smp.rem, k);
      auto ki = static_cast<std::size_t>(k);
      row.ratio_n_over_phi[ki] = std::max(row.ratio_n_over_phi[ki], r.n_over_phi);
      row.ratio_phi_over_n[ki] = std::max(row.ratio_phi_over_n[ki], r.phi_over_n);
    }
  }
  row.gap = quasineutrality_gap(samples, eps);

  const auto uniform = uniform_prefix(samples);
  if (uniform.size() >= 3 && uniform[1].rem.t - uniform[0].rem.t <= 1e-3 * (1.0 + 1e-9))
    row.identity_defect = energy_identity_check(uniform, identity_gamma).max_defect;
  return row;
}

bool SweepReport::any_blowup() const {
  return std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.blew_up; });
}

bool SweepReport::any_fail() const {
  return std::any_of(verdicts.begin(), verdicts.end(), [](const NamedVerdict& v) { return v.verdict == Verdict::Fail; });
}

namespace {

FitResult fit_quantity(const std::string& name, const std::vector<std::pair<double, double>>& all,
                       const SweepSpec& spec, bool usable) {
  FitResult res;
  res.quantity = name;
  if (!usable) {
    res.verdict = Verdict::Inconclusive;
    return res;
  }
  std::vector<std::pair<double, double>> pts = all;
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  res.fit = fit_order(pts);
  if (res.fit.r_squared < spec.r2_min && pts.size() >= 4) {
    // Pre-asymptotic guard: drop the largest eps once.
    pts.erase(pts.begin());
    res.fit = fit_order(pts);
    res.excluded_largest = true;
  }
  res.points = pts.size();
  const bool ok = res.fit.slope >= spec.order_lo && res.fit.slope <= spec.order_hi && res.fit.r_squared >= spec.r2_min;
  res.verdict = ok ? Verdict::Pass : Verdict::Fail;
  return res;
}

void evaluate_verdicts(SweepReport& rep) {
  const SweepSpec& spec = rep.spec;
  const bool blown = rep.any_blowup();
  const bool usable = !blown && spec.fits_possible();

  const auto s_fit_idx = static_cast<std::size_t>(
      std::find(spec.s_list.begin(), spec.s_list.end(), spec.s_fit) - spec.s_list.begin());
  std::vector<std::pair<double, double>> n_pts, u_pts, g_pts;
  bool positive = true;
  for (const auto& r : rep.rows) {
    n_pts.emplace_back(r.eps, r.err_n_hs[s_fit_idx]);
    u_pts.emplace_back(r.eps, r.err_u_hs[s_fit_idx]);
    g_pts.emplace_back(r.eps, r.gap.sup_gap);
    positive = positive && r.err_n_hs[s_fit_idx] > 0.0 && r.err_u_hs[s_fit_idx] > 0.0 && r.gap.sup_gap > 0.0;
  }
  const std::string hs = "_H" + std::to_string(spec.s_fit);
  rep.fits.push_back(fit_quantity("err_n" + hs, n_pts, spec, usable && positive));
  rep.fits.push_back(fit_quantity("err_u" + hs, u_pts, spec, usable && positive));
  rep.fits.push_back(fit_quantity("quasineutral_gap", g_pts, spec, usable && positive));
  for (const auto& f : rep.fits) {
    NamedVerdict v{"order_" + f.quantity, f.verdict, ""};
    if (f.verdict != Verdict::Inconclusive)
      v.detail = "slope " + format_double(f.fit.slope) + ", r2 " + format_double(f.fit.r_squared) +
                 (f.excluded_largest ? " (largest eps excluded)" : "");
    else
      v.detail = blown ? "blow-up in sweep" : "fit needs 3 distinct eps spanning 2 decades with positive errors";
    rep.verdicts.push_back(std::move(v));
  }

  for (std::size_t i = 0; i < spec.s_list.size(); ++i) {
    std::vector<GronwallMember> members;
    for (const auto& r : rep.rows) {
      GronwallMember m{r.eps, r.sup_combined[i], std::nullopt};
      if (r.blew_up) m.event = BlowUpEvent{0.0, r.event};
      members.push_back(std::move(m));
    }
    GronwallReport g = gronwall_monitor(members, spec.bound_factor);
    rep.verdicts.push_back({"gronwall_s" + std::to_string(spec.s_list[i]), g.verdict,
                            g.note.empty() ? "worst ratio " + format_double(g.worst_ratio) : g.note});
    rep.gronwall.push_back(std::move(g));
  }

  // Elliptic-estimate ratios against the largest-eps row.
  const auto ref = std::max_element(rep.rows.begin(), rep.rows.end(),
                                    [](const SweepRow& a, const SweepRow& b) { return a.eps < b.eps; });
  {
    Verdict v = blown ? Verdict::Inconclusive : Verdict::Pass;
    double worst = 0.0;
    if (!blown) {
      for (std::size_t k = 0; k < ref->ratio_n_over_phi.size(); ++k) {
        for (const auto& r : rep.rows) {
          const double a = r.ratio_n_over_phi[k], b = r.ratio_phi_over_n[k];
          const double ra = ref->ratio_n_over_phi[k], rb = ref->ratio_phi_over_n[k];
          if (a > spec.ratio_factor * ra || b > spec.ratio_factor * rb) v = Verdict::Fail;
          if (ra > 0.0) worst = std::max(worst, a / ra);
          if (rb > 0.0) worst = std::max(worst, b / rb);
        }
      }
    }
    rep.verdicts.push_back({"elliptic_ratios", v, "worst ratio to largest eps " + format_double(worst)});
  }

  {
    double worst = 0.0;
    for (const auto& r : rep.rows) worst = std::max(worst, r.gap.max_identity_defect);
    rep.verdicts.push_back({"quasineutral_identity", worst <= spec.gap_identity_tol ? Verdict::Pass : Verdict::Fail,
                            "max |gap - eps |phi''|| = " + format_double(worst)});
  }

  {
    Verdict v = Verdict::Pass;
    double worst = 0.0;
    bool any = false;
    for (const auto& r : rep.rows) {
      if (!r.identity_defect) continue;
      any = true;
      worst = std::max(worst, *r.identity_defect);
      if (!(*r.identity_defect <= spec.identity_tol)) v = Verdict::Fail;
    }
    if (!any) v = Verdict::Inconclusive;
    rep.verdicts.push_back({"energy_identity", v,
                            any ? "max defect " + format_double(worst) : "record spacing above 1e-3"});
  }
}

}  // namespace

SweepReport run_sweep(const SweepSpec& spec, int jobs) {
  spec.validate();
  const Grid grid(spec.n_points);
  const InitialData init = make_initial(spec.init, grid);

  SweepReport rep;
  rep.spec = spec;
  rep.dt = plan_steps(spec.run.dt > 0.0 ? spec.run.dt : default_time_step(init.u0), spec.run.t_end).dt;

  RunOptions base = spec.run;
  base.dt = rep.dt;
  RunOptions lim_opts = base;
  lim_opts.eps = 0.0;
  const Trajectory<LimitState> lim = evolve(LimitState{0.0, init.n0, init.u0}, lim_opts);

  const std::size_t count = spec.eps_list.size();
  rep.rows.resize(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        const auto start = std::chrono::steady_clock::now();
        RunOptions opts = base;
        opts.eps = spec.eps_list[i];
        const Trajectory<EPState> ep = evolve(EPState{0.0, init.n0, init.u0}, opts);
        const auto samples = couple(ep, lim, opts.eps, opts.pb);
        std::optional<BlowUpEvent> event = ep.event ? ep.event : lim.event;
        rep.rows[i] = summarize_run(opts.eps, samples, spec.s_list, spec.identity_gamma, event);
        rep.rows[i].wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(count)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  evaluate_verdicts(rep);
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json to_json(const SweepSpec& spec) {
  return {
      {"eps_list", spec.eps_list},
      {"n_points", spec.n_points},
      {"s_list", spec.s_list},
      {"s_fit", spec.s_fit},
      {"seed", spec.seed},
      {"identity_gamma", spec.identity_gamma},
      {"run",
       {{"dt", spec.run.dt},
        {"t_end", spec.run.t_end},
        {"density_floor", spec.run.density_floor},
        {"norm_ceiling", spec.run.norm_ceiling},
        {"record_every", spec.run.record_every},
        {"spectral_filter", spec.run.spectral_filter},
        {"pb", {{"tol", spec.run.pb.tol}, {"max_newton_iters", spec.run.pb.max_newton_iters}, {"damping_min", spec.run.pb.damping_min}}}}},
      {"init",
       {{"n_base", spec.init.n_base},
        {"n_amp", spec.init.n_amp},
        {"u_amp", spec.init.u_amp},
        {"mode", spec.init.mode},
        {"phase_u", spec.init.phase_u},
        {"multi_mode", spec.init.multi_mode}}},
      {"thresholds",
       {{"bound_factor", spec.bound_factor},
        {"ratio_factor", spec.ratio_factor},
        {"order_lo", spec.order_lo},
        {"order_hi", spec.order_hi},
        {"r2_min", spec.r2_min},
        {"identity_tol", spec.identity_tol},
        {"gap_identity_tol", spec.gap_identity_tol}}},
  };
}

nlohmann::json to_json(const SweepReport& report) {
  nlohmann::json j;
  j["spec"] = to_json(report.spec);
  j["dt"] = report.dt;

  j["rows"] = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json sup, err;
    for (std::size_t i = 0; i < report.spec.s_list.size(); ++i) {
      const std::string key = "s" + std::to_string(report.spec.s_list[i]);
      sup[key] = {{"n1_hs", r.sup_n1_hs[i]},
                  {"u1_triple", r.sup_u1_triple[i]},
                  {"phi1_triple", r.sup_phi1_triple[i]},
                  {"combined", r.sup_combined[i]}};
      err["n_hs_" + key] = r.err_n_hs[i];
      err["u_hs_" + key] = r.err_u_hs[i];
    }
    err["quasineutral_gap"] = r.gap.sup_gap;
    nlohmann::json row = {{"eps", r.eps},
                          {"status", r.blew_up ? "BLOWUP" : "OK"},
                          {"sup_norms", sup},
                          {"errors", err},
                          {"elliptic_ratios", {{"n_over_phi", r.ratio_n_over_phi}, {"phi_over_n", r.ratio_phi_over_n}}},
                          {"quasineutral_identity_defect", r.gap.max_identity_defect},
                          {"energy_identity_defect", r.identity_defect ? nlohmann::json(*r.identity_defect) : nlohmann::json(nullptr)},
                          {"min_density", number_or_null(r.min_n_eps)},
                          {"records", r.records},
                          {"wall_seconds", r.wall_seconds}};
    if (r.blew_up) row["event"] = r.event;
    j["rows"].push_back(std::move(row));
  }

  j["fits"] = nlohmann::json::object();
  for (const auto& f : report.fits) {
    j["fits"][f.quantity] = {{"slope", f.fit.slope},
                             {"intercept", f.fit.intercept},
                             {"r_squared", f.fit.r_squared},
                             {"slope_ci95", {number_or_null(f.fit.slope_ci_low), number_or_null(f.fit.slope_ci_high)}},
                             {"points", f.points},
                             {"excluded_largest_eps", f.excluded_largest},
                             {"verdict", to_string(f.verdict)}};
  }

  j["verdicts"] = nlohmann::json::object();
  for (const auto& v : report.verdicts) j["verdicts"][v.name] = {{"verdict", to_string(v.verdict)}, {"detail", v.detail}};
  return j;
}

std::string to_csv(const SweepReport& report) {
  CsvWriter w({"eps", "status", "s", "sup_n1_hs", "sup_u1_triple", "sup_phi1_triple", "sup_combined", "err_n_hs",
               "err_u_hs", "ratio_n_over_phi", "ratio_phi_over_n", "quasineutral_gap", "quasineutral_identity_defect",
               "energy_identity_defect", "wall_seconds"});
  for (const auto& r : report.rows) {
    for (std::size_t i = 0; i < report.spec.s_list.size(); ++i) {
      const int s = report.spec.s_list[i];
      const auto k = static_cast<std::size_t>(s);
      w.cell(r.eps)
          .cell(r.blew_up ? "BLOWUP" : "OK")
          .cell(static_cast<long long>(s))
          .cell(r.sup_n1_hs[i])
          .cell(r.sup_u1_triple[i])
          .cell(r.sup_phi1_triple[i])
          .cell(r.sup_combined[i])
          .cell(r.err_n_hs[i])
          .cell(r.err_u_hs[i])
          .cell(r.ratio_n_over_phi[k])
          .cell(r.ratio_phi_over_n[k])
          .cell(r.gap.sup_gap)
          .cell(r.gap.max_identity_defect)
          .cell(r.identity_defect ? *r.identity_defect : std::numeric_limits<double>::quiet_NaN())
          .cell(r.wall_seconds);
      w.end_row();
    }
  }
  return w.str();
}

std::string remainder_series_csv(const SweepReport& report) {
  CsvWriter w({"t", "eps", "s", "n1_Hs", "u1_triple", "phi1_triple", "combined", "res_n", "res_u", "res_phi"});
  for (const auto& r : report.rows) {
    for (const auto& p : r.series) {
      w.cell(p.t)
          .cell(r.eps)
          .cell(static_cast<long long>(p.s))
          .cell(p.norm.n1_part)
          .cell(p.norm.u1_part)
          .cell(p.norm.phi1_part)
          .cell(p.norm.combined)
          .cell(p.residual.res_n)
          .cell(p.residual.res_u)
          .cell(p.residual.res_phi);
      w.end_row();
    }
  }
  return w.str();
}

}  // namespace debye
