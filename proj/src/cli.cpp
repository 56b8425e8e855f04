#include "debye/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>

#include "CLI11.hpp"

#include "debye/config.hpp"
#include "debye/csv_io.hpp"

#ifndef DEBYE_LIMIT_VERSION
#define DEBYE_LIMIT_VERSION "0.0.0"
#endif

namespace debye {

const char* version_string() noexcept { return DEBYE_LIMIT_VERSION; }

namespace {

struct Overrides {
  std::optional<std::string> config;
  std::optional<double> eps;
  std::optional<std::string> flow;
  std::optional<std::size_t> grid;
  std::optional<double> t_end;
  std::optional<double> dt;
  std::optional<int> s;
  std::optional<std::string> out;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed;
  std::optional<double> n_amp;
  std::optional<double> u_amp;
  std::optional<double> bound_factor;
  std::optional<int> record_every;
};

void add_flags(CLI::App& app, Overrides& o) {
  const Config d;
  app.add_option("--config", o.config, "Configuration file ([section] / key = value)")->default_str("none");
  app.add_option("--eps", o.eps, "eps for simulate and check (simulate: 0 = limit flow)")
      ->default_str(format_tag(d.run.eps) + " (simulate), " + format_tag(d.check.eps) + " (check)");
  app.add_option("--flow", o.flow, "Flow integrated by simulate")
      ->check(CLI::IsMember({"ep", "limit"}))
      ->default_str(to_string(d.flow));
  app.add_option("--grid", o.grid, "Grid points (power of two >= 32)")->default_str(std::to_string(d.n_points));
  app.add_option("--t-end", o.t_end, "Final time")->default_str(format_tag(d.run.t_end));
  app.add_option("--dt", o.dt, "Time step (0 = 0.25 dx / (max|u| + 1.5))")->default_str(format_tag(d.run.dt));
  app.add_option("--s", o.s, "Sobolev order: simulate norms and blow-up monitor, sweep fits, check energy order")
      ->default_str(std::to_string(d.run.monitor_s));
  app.add_option("--out", o.out, "Output directory (default: $DEBYE_LIMIT_OUT, else the working directory)")
      ->default_str(".");
  app.add_option("--jobs", o.jobs, "Concurrent eps runs in sweep")->default_str(std::to_string(d.jobs));
  app.add_option("--seed", o.seed, "Seed of the randomized commutator sampling")
      ->default_str(std::to_string(d.sweep.seed));
  app.add_option("--n-amp", o.n_amp, "Density perturbation amplitude")->default_str(format_tag(d.init.n_amp));
  app.add_option("--u-amp", o.u_amp, "Velocity perturbation amplitude")->default_str(format_tag(d.init.u_amp));
  app.add_option("--bound-factor", o.bound_factor, "Uniform-boundedness factor of the sweep verdicts")
      ->default_str(format_tag(d.sweep.bound_factor));
  app.add_option("--record-every", o.record_every, "Record every k-th step")
      ->default_str(std::to_string(d.run.record_every));
}

Config resolve(const Overrides& o, std::string_view command) {
  Config cfg = o.config ? load_config(*o.config) : Config{};
  if (o.eps) {
    if (command == "sweep") throw std::invalid_argument("--eps does not apply to sweep; set sweep.eps_list");
    (command == "check" ? cfg.check.eps : cfg.run.eps) = *o.eps;
  }
  if (o.flow) cfg.flow = parse_flow(*o.flow);
  if (o.grid) cfg.n_points = *o.grid;
  if (o.t_end) cfg.run.t_end = *o.t_end;
  if (o.dt) cfg.run.dt = *o.dt;
  if (o.s) cfg.run.monitor_s = cfg.sweep.s_fit = cfg.check.gamma = *o.s;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.seed) cfg.sweep.seed = *o.seed;
  if (o.n_amp) cfg.init.n_amp = *o.n_amp;
  if (o.u_amp) cfg.init.u_amp = *o.u_amp;
  if (o.bound_factor) cfg.sweep.bound_factor = *o.bound_factor;
  if (o.record_every) cfg.run.record_every = *o.record_every;
  if (o.out) {
    cfg.out_dir = *o.out;
  } else if (cfg.out_dir.empty()) {
    const char* env = std::getenv("DEBYE_LIMIT_OUT");
    cfg.out_dir = env && *env ? env : ".";
  }
  cfg.validate();
  return cfg;
}

std::filesystem::path output_dir(const Config& cfg) {
  std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

const char* flow_name(const Config& cfg) { return cfg.flow == FlowKind::Limit ? "limit" : "ep"; }

// --- simulate ---------------------------------------------------------------

int cmd_simulate(const Config& cfg, std::ostream& out) {
  const Grid grid(cfg.n_points);
  const InitialData init = make_initial(cfg.init, grid);
  RunOptions opts = cfg.run;
  const bool limit = cfg.flow == FlowKind::Limit;
  if (limit) opts.eps = 0.0;
  const int s = opts.monitor_s;
  const std::filesystem::path dir = output_dir(cfg);
  const std::string tag = std::string(flow_name(cfg)) + "_" + format_tag(opts.eps);

  CsvWriter w({"t", "norm_n_Hs", "norm_u_Hs", "mass", "min_n", "max_n", "quasineutral_residual"});
  auto record = [&](double t, const Field& n, const Field& u) {
    const Field phi = opts.eps > 0.0 ? solve_phi(n, opts.eps, opts.pb).phi : solve_phi_limit(n);
    const double residual = l2_norm(phi.map([](double v) { return std::exp(v); }) - n);
    w.cell(t).cell(hs_norm(n, s)).cell(hs_norm(u, s)).cell(integrate(n)).cell(n.min()).cell(n.max()).cell(residual);
    w.end_row();
    if (cfg.snapshots) {
      CsvWriter snap({"x", "n", "u", "phi"});
      for (std::size_t i = 0; i < grid.size(); ++i) {
        snap.cell(grid.x(i)).cell(n[i]).cell(u[i]).cell(phi[i]);
        snap.end_row();
      }
      write_file_atomic(dir / ("snap_" + tag + "_" + format_tag(t) + ".csv"), snap.str());
    }
  };

  std::optional<BlowUpEvent> event;
  double dt = 0.0;
  try {
    if (limit) {
      const auto traj = evolve(LimitState{0.0, init.n0, init.u0}, opts,
                               [&](const LimitState& st) { record(st.t, st.n, st.u); });
      event = traj.event;
      dt = traj.dt;
    } else {
      const auto traj =
          evolve(EPState{0.0, init.n0, init.u0}, opts, [&](const EPState& st) { record(st.t, st.n, st.u); });
      event = traj.event;
      dt = traj.dt;
    }
  } catch (const PBConvergenceError& e) {
    event = BlowUpEvent{std::nan(""), std::string("potential solve failed: ") + e.what()};
  }

  if (event)
    w.comment("status=BLOWUP t=" + format_double(event->t) + " reason=" + event->reason);
  else
    w.comment("status=OK");
  const auto path = dir / ("trajectory_" + tag + ".csv");
  write_file_atomic(path, w.str());
  out << "simulate flow=" << flow_name(cfg) << " eps=" << format_tag(opts.eps) << " dt=" << format_double(dt)
      << " status=" << (event ? "BLOWUP" : "OK") << "\n";
  if (event) out << "blow-up at t=" << format_double(event->t) << ": " << event->reason << "\n";
  out << "wrote " << path.string() << "\n";
  return event ? kExitBlowUp : kExitOk;
}

// --- sweep ------------------------------------------------------------------

int cmd_sweep(const Config& cfg, std::ostream& out) {
  const SweepReport rep = run_sweep(cfg.sweep_spec(), cfg.jobs);
  const std::filesystem::path dir = output_dir(cfg);
  write_file_atomic(dir / "sweep_report.json", to_json(rep).dump(2) + "\n");
  write_file_atomic(dir / "sweep_report.csv", to_csv(rep));
  write_file_atomic(dir / "remainder_series.csv", remainder_series_csv(rep));

  out << "sweep dt=" << format_double(rep.dt) << "\n";
  for (const auto& r : rep.rows) {
    out << "  eps=" << format_tag(r.eps) << " " << (r.blew_up ? "BLOWUP " + r.event : std::string("OK")) << "\n";
  }
  for (const auto& v : rep.verdicts) out << "  " << to_string(v.verdict) << " " << v.name << ": " << v.detail << "\n";
  out << "wrote " << (dir / "sweep_report.json").string() << "\n";
  if (rep.any_blowup()) return kExitBlowUp;
  return rep.any_fail() ? kExitVerdict : kExitOk;
}

// --- check ------------------------------------------------------------------

int cmd_check(const Config& cfg, std::ostream& out) {
  const CheckSettings& chk = cfg.check;
  const Grid grid(cfg.n_points);
  const InitialData init = make_initial(cfg.init, grid);
  RunOptions opts = cfg.run;
  opts.eps = chk.eps;
  opts.dt = plan_steps(opts.dt > 0.0 ? opts.dt : default_time_step(init.u0), opts.t_end).dt;
  const double spacing = opts.dt * opts.record_every;
  if (spacing > 1e-3 * (1.0 + 1e-9))
    throw std::invalid_argument("check: record spacing dt * record_every = " + format_double(spacing) +
                                " exceeds 1e-3");

  RunOptions lim_opts = opts;
  lim_opts.eps = 0.0;
  const auto lim = evolve(LimitState{0.0, init.n0, init.u0}, lim_opts);
  const auto ep = evolve(EPState{0.0, init.n0, init.u0}, opts);
  const auto samples = couple(ep, lim, opts.eps, opts.pb);
  const auto window = uniform_prefix(samples);
  const std::filesystem::path dir = output_dir(cfg);

  bool ok = true;

  // Energy balance of the remainder velocity.
  const IdentityCheck id = energy_identity_check(window, chk.gamma);
  {
    CsvWriter w({"t", "gamma", "e_kin", "e_phi", "e_grad", "e_visc", "e_lap", "I", "II", "III", "IV", "defect"});
    for (std::size_t i = 0; i < id.snapshots.size(); ++i) {
      const EnergySnapshot& e = id.snapshots[i];
      w.cell(e.t)
          .cell(static_cast<long long>(e.gamma))
          .cell(e.e_kin)
          .cell(e.e_phi)
          .cell(e.e_grad)
          .cell(e.e_visc)
          .cell(e.e_lap)
          .cell(e.term_I)
          .cell(e.term_II)
          .cell(e.term_III)
          .cell(e.term_IV)
          .cell(id.defect[i]);
      w.end_row();
    }
    write_file_atomic(dir / "energy_ledger.csv", w.str());
  }
  const bool id_ok = id.max_defect <= chk.identity_tol;
  ok = ok && id_ok;
  out << (id_ok ? "PASS" : "FAIL") << " energy_identity: max defect " << format_double(id.max_defect) << " (tol "
      << format_double(chk.identity_tol) << ")\n";

  // Remainder-system residuals between consecutive records.
  double max_res_phi = 0.0;
  {
    CsvWriter w({"t", "res_n", "res_u", "res_phi"});
    for (std::size_t i = 1; i < samples.size(); ++i) {
      const RemainderResidual r =
          remainder_residual(samples[i - 1].rem, samples[i].rem, samples[i - 1].lim, samples[i].lim);
      max_res_phi = std::max(max_res_phi, r.res_phi);
      w.cell(samples[i].rem.t).cell(r.res_n).cell(r.res_u).cell(r.res_phi);
      w.end_row();
    }
    write_file_atomic(dir / "remainder_residual.csv", w.str());
  }
  const bool res_ok = max_res_phi <= chk.residual_tol;
  ok = ok && res_ok;
  out << (res_ok ? "PASS" : "FAIL") << " remainder_residual: max res_phi " << format_double(max_res_phi) << " (tol "
      << format_double(chk.residual_tol) << ")\n";

  // Commutator sampling.
  const auto battery =
      kato_ponce_battery(cfg.n_points, chk.kp_orders, chk.kp_samples, cfg.sweep.seed, chk.kp_max_mode);
  {
    CsvWriter w({"k", "sample", "ratio"});
    for (const auto& b : battery) {
      for (std::size_t i = 0; i < b.ratios.size(); ++i) {
        w.cell(static_cast<long long>(b.k)).cell(static_cast<long long>(i)).cell(b.ratios[i]);
        w.end_row();
      }
    }
    write_file_atomic(dir / "commutator.csv", w.str());
  }
  for (const auto& b : battery) {
    const bool kp_ok = std::isfinite(b.max_ratio) && b.max_ratio <= chk.kp_ratio_max;
    ok = ok && kp_ok;
    out << (kp_ok ? "PASS" : "FAIL") << " commutator k=" << b.k << ": max ratio " << format_double(b.max_ratio)
        << "\n";
  }

  if (ep.event || lim.event) {
    const BlowUpEvent& e = ep.event ? *ep.event : *lim.event;
    out << "blow-up at t=" << format_double(e.t) << ": " << e.reason << "\n";
    return kExitBlowUp;
  }
  return ok ? kExitOk : kExitVerdict;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Euler-Poisson / quasineutral-limit simulator and convergence harness", "debye_limit"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  add_flags(app, o);
  auto* simulate = app.add_subcommand("simulate", "Integrate one flow; writes trajectory_<flow>_<eps>.csv");
  auto* sweep = app.add_subcommand("sweep", "eps sweep with convergence and boundedness verdicts");
  auto* check = app.add_subcommand("check", "Energy balance, remainder residuals and commutator sampling");
  auto* version = app.add_subcommand("version", "Print the version");
  app.footer(
      "Exit codes: 0 success, 2 usage or configuration error, 3 blow-up, 4 verdict failure.\n"
      "Configuration keys: see README; flags override file values.");

  std::vector<std::string> argv_store{"debye_limit"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  if (version->parsed()) {
    out << "debye_limit " << version_string() << "\n";
    return kExitOk;
  }

  Config cfg;
  try {
    cfg = resolve(o, app.get_subcommands().front()->get_name());
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(cfg, out);
    if (sweep->parsed()) return cmd_sweep(cfg, out);
    if (check->parsed()) return cmd_check(cfg, out);
  } catch (const std::invalid_argument& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BlowUpError& e) {
    err << "blow-up: " << e.what() << "\n";
    return kExitBlowUp;
  } catch (const PBConvergenceError& e) {
    err << "potential solve failed: " << e.what() << "\n";
    return kExitBlowUp;
  } catch (const std::domain_error& e) {
    err << "blow-up: " << e.what() << "\n";
    return kExitBlowUp;
  }
  return kExitConfig;
}

}  // namespace debye
