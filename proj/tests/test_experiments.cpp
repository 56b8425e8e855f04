#include "doctest.h"

#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "debye/experiments.hpp"

using namespace debye;

namespace {

using Pairs = std::vector<std::pair<double, double>>;

SweepSpec small_sweep() {
  SweepSpec s;
  s.eps_list = {1e-1, 1e-2, 1e-3};
  s.n_points = 32;
  s.run.t_end = 0.02;
  s.run.dt = 1e-3;
  return s;
}

// Row numbers without wall-clock times.
nlohmann::json numbers_of(const SweepReport& r) {
  nlohmann::json j = to_json(r);
  for (auto& row : j["rows"]) row.erase("wall_seconds");
  return j;
}

}  // namespace

TEST_CASE("order fit recovers exact power laws") {
  const OrderFit lin = fit_order(Pairs{{0.1, 0.1}, {0.01, 0.01}, {0.001, 0.001}});
  CHECK(lin.slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lin.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  const OrderFit quad = fit_order(Pairs{{0.1, 0.01}, {0.01, 1e-4}, {1e-3, 1e-6}});
  CHECK(quad.slope == doctest::Approx(2.0).epsilon(1e-12));
  const OrderFit flat = fit_order(Pairs{{0.1, 3.0}, {0.01, 3.0}, {0.001, 3.0}});
  CHECK(std::abs(flat.slope) <= 1e-12);

  for (double p : {0.5, 1.0, 1.5, 3.0}) {
    Pairs pts;
    for (double e : {1e-1, 1e-2, 1e-3, 1e-4}) pts.emplace_back(e, 7.0 * std::pow(e, p));
    const OrderFit f = fit_order(pts);
    CHECK(std::abs(f.slope - p) <= 1e-12);
    CHECK(std::exp(f.intercept) == doctest::Approx(7.0).epsilon(1e-10));
  }
}

TEST_CASE("order fit confidence interval brackets the slope") {
  const OrderFit f = fit_order(Pairs{{1e-1, 0.12}, {1e-2, 0.009}, {1e-3, 0.0011}, {1e-4, 0.0001}});
  CHECK(f.slope_ci_low < f.slope);
  CHECK(f.slope_ci_high > f.slope);
  CHECK(f.r_squared < 1.0);
  const OrderFit two = fit_order(Pairs{{1e-1, 0.1}, {1e-2, 0.01}});
  CHECK(std::isinf(two.slope_ci_low));
}

TEST_CASE("order fit rejects non-positive or degenerate input") {
  CHECK_THROWS_AS(fit_order(Pairs{{0.1, 0.0}, {0.01, 0.1}, {0.001, 0.1}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_order(Pairs{{-0.1, 1.0}, {0.01, 0.1}, {0.001, 0.1}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_order(Pairs{{0.1, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_order(Pairs{{0.1, 1.0}, {0.1, 2.0}}), std::invalid_argument);
}

TEST_CASE("sweep specification validation") {
  SweepSpec s;
  CHECK_NOTHROW(s.validate());
  CHECK(s.fits_possible());
  s.eps_list = {};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.eps_list = {1e-3, 1e-2};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.eps_list = {1e-2, -1e-3};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.eps_list = {1e-2, 1e-2, 1e-3};
  CHECK_NOTHROW(s.validate());
  CHECK_FALSE(s.fits_possible());
  s = {};
  s.s_fit = 3;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = {};
  s.s_list = {0, 4};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = {};
  s.n_points = 100;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("sweep rows are deterministic and independent of the worker count") {
  SweepSpec s = small_sweep();
  s.eps_list = {1e-1, 1e-2, 1e-2, 1e-3};
  const SweepReport a = run_sweep(s, 1);
  const SweepReport b = run_sweep(s, 3);
  REQUIRE(a.rows.size() == 4);
  CHECK(numbers_of(a) == numbers_of(b));
  const nlohmann::json j = numbers_of(a);
  CHECK(j["rows"][1] == j["rows"][2]);
}

TEST_CASE("zero-amplitude data gives errors at solver tolerance") {
  SweepSpec s = small_sweep();
  s.init.n_amp = 0.0;
  s.init.u_amp = 0.0;
  const SweepReport r = run_sweep(s);
  for (const auto& row : r.rows) {
    CHECK_FALSE(row.blew_up);
    for (double v : row.err_n_hs) CHECK(v <= 1e-10);
    for (double v : row.err_u_hs) CHECK(v <= 1e-10);
    CHECK(row.gap.sup_gap <= 1e-10);
  }
  // Zero errors cannot be fitted on a log scale.
  for (const auto& f : r.fits) CHECK(f.verdict == Verdict::Inconclusive);
}

TEST_CASE("report lists every eps once with finite non-negative errors") {
  const SweepSpec s = small_sweep();
  const SweepReport r = run_sweep(s);
  REQUIRE(r.rows.size() == s.eps_list.size());
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    CHECK(r.rows[i].eps == s.eps_list[i]);
    CHECK_FALSE(r.rows[i].blew_up);
    for (double v : r.rows[i].err_n_hs) CHECK((std::isfinite(v) && v >= 0.0));
    for (double v : r.rows[i].err_u_hs) CHECK((std::isfinite(v) && v >= 0.0));
    CHECK((std::isfinite(r.rows[i].gap.sup_gap) && r.rows[i].gap.sup_gap >= 0.0));
    CHECK(r.rows[i].identity_defect.has_value());
    CHECK(r.rows[i].series.size() == r.rows[i].records * s.s_list.size());
  }
  // Per snapshot, the gap equals eps |phi''| up to the solve tolerance.
  for (const auto& row : r.rows) CHECK(row.gap.max_identity_defect <= 1e-9);

  const nlohmann::json j = to_json(r);
  for (const char* key : {"spec", "rows", "fits", "verdicts"}) CHECK(j.contains(key));
  CHECK(j["rows"].size() == 3);
  for (const auto& row : j["rows"]) {
    CHECK(row["status"] == "OK");
    CHECK(row.contains("sup_norms"));
    CHECK(row.contains("errors"));
  }
  for (const char* v : {"order_err_n_H2", "order_err_u_H2", "order_quasineutral_gap", "gronwall_s0", "gronwall_s1",
                        "gronwall_s2", "elliptic_ratios", "quasineutral_identity", "energy_identity"})
    CHECK(j["verdicts"].contains(v));

  std::istringstream csv(to_csv(r));
  std::string line;
  std::size_t lines = 0;
  while (std::getline(csv, line)) ++lines;
  CHECK(lines == 1 + 3 * s.s_list.size());

  std::istringstream series(remainder_series_csv(r));
  std::getline(series, line);
  CHECK(line == "t,eps,s,n1_Hs,u1_triple,phi1_triple,combined,res_n,res_u,res_phi");
}

TEST_CASE("blow-up is recorded per row and the sweep continues") {
  SweepSpec s = small_sweep();
  s.run.density_floor = 0.95;  // above the initial minimum 0.9
  const SweepReport r = run_sweep(s);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.any_blowup());
  for (const auto& row : r.rows) {
    CHECK(row.blew_up);
    CHECK_FALSE(row.event.empty());
  }
  for (const auto& v : r.verdicts)
    if (v.name.rfind("gronwall", 0) == 0 || v.name.rfind("order", 0) == 0) CHECK(v.verdict == Verdict::Inconclusive);
  CHECK(to_json(r)["rows"][0]["status"] == "BLOWUP");
}

TEST_CASE("quasineutrality gap of an equilibrium is at solver tolerance") {
  const Grid g(32);
  const EPState ep{0.0, Field(g, 1.0), Field(g)};
  const LimitState lim{0.0, Field(g, 1.0), Field(g)};
  const Field phi = solve_phi(ep.n, 0.1).phi;
  const std::vector<CoupledSample> samples{{ep, lim, phi, form_remainder(ep, lim, phi, 0.1)}};
  const QuasineutralityGap q = quasineutrality_gap(samples, 0.1);
  CHECK(q.sup_gap <= 1e-12);
  CHECK(q.max_identity_defect <= 1e-12);
}

TEST_CASE("tiny bound factor forces a boundedness failure") {
  SweepSpec s = small_sweep();
  s.bound_factor = 1e-9;
  const SweepReport r = run_sweep(s);
  CHECK(r.any_fail());
  for (const auto& g : r.gronwall) CHECK(g.verdict == Verdict::Fail);
}
