#include "doctest.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "debye/cli.hpp"
#include "debye/config.hpp"

using namespace debye;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("debye_test_" + tag + "_" + std::to_string(std::rand()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  return lines;
}

bool has_tmp_files(const fs::path& dir) {
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename().string().find(".tmp") != std::string::npos) return true;
  return false;
}

const char* kSmall =
    "[grid]\nn_points = 32\n"
    "[run]\nt_end = 0.01\ndt = 1e-3\n"
    "[sweep]\neps_list = [1e-1, 1e-2, 1e-3]\n"
    "[check]\nkp_samples = 5\n";

}  // namespace

TEST_CASE("config defaults and key table") {
  const Config c = parse_config("");
  CHECK(c.n_points == 256);
  CHECK(c.flow == FlowKind::EulerPoisson);
  CHECK_NOTHROW(c.validate());
  const auto keys = config_keys();
  for (const char* k : {"grid.n_points", "run.eps", "sweep.eps_list", "check.kp_orders", "output.dir"})
    CHECK(std::find(keys.begin(), keys.end(), k) != keys.end());
}

TEST_CASE("config values, lists and comments") {
  const Config c = parse_config(
      "# comment\n[grid]\nn_points = 64 ; trailing\n"
      "[run]\nflow = limit\neps = 0\n"
      "[sweep]\neps_list = 1e-1, 1e-2, 1e-3\ns_list = [0, 1]\n"
      "[output]\nsnapshots = true\n");
  CHECK(c.n_points == 64);
  CHECK(c.flow == FlowKind::Limit);
  CHECK(c.run.eps == 0.0);
  CHECK(c.sweep.eps_list == std::vector<double>{1e-1, 1e-2, 1e-3});
  CHECK(c.sweep.s_list == std::vector<int>{0, 1});
  CHECK(c.snapshots);
  const SweepSpec s = c.sweep_spec();
  CHECK(s.n_points == 64);
}

TEST_CASE("config errors carry line and column") {
  auto error_of = [](const std::string& text) {
    try {
      parse_config(text, "cfg.ini");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(error_of("[nope]\n").rfind("cfg.ini:1:", 0) == 0);
  CHECK(error_of("[run]\n\nbogus = 1\n") == "cfg.ini:3:1: unknown key 'bogus' in section [run]");
  CHECK(error_of("[run]\ndt = 1e-3\ndt = 2e-3\n").rfind("cfg.ini:3:", 0) == 0);
  CHECK(error_of("[grid]\nn_points = abc\n").rfind("cfg.ini:2:12:", 0) == 0);
  CHECK(error_of("[grid]\nn_points =\n").rfind("cfg.ini:2:", 0) == 0);
  CHECK(error_of("eps = 1\n").rfind("cfg.ini:1:", 0) == 0);
  CHECK_THROWS_AS(parse_config("[grid]\nn_points = 100\n").validate(), std::invalid_argument);
}

TEST_CASE("version and help exit cleanly") {
  const Outcome v = run({"version"});
  CHECK(v.code == kExitOk);
  CHECK(v.out.find(version_string()) != std::string::npos);
  const Outcome h = run({"--help"});
  CHECK(h.code == kExitOk);
  CHECK(h.out.find("--eps") != std::string::npos);
  CHECK(run({}).code == kExitConfig);
  CHECK(run({"simulate", "--bogus"}).code == kExitConfig);
}

TEST_CASE("simulate writes a trajectory with monotone time") {
  TempDir d("sim");
  const Outcome o = run({"simulate", "--flow", "limit", "--eps", "0", "--grid", "32", "--t-end", "0.05", "--dt", "1e-3",
                         "--out", d.path.string()});
  REQUIRE(o.code == kExitOk);
  const auto lines = read_lines(d.path / "trajectory_limit_0.csv");
  REQUIRE(lines.size() > 3);
  CHECK(lines.front() == "t,norm_n_Hs,norm_u_Hs,mass,min_n,max_n,quasineutral_residual");
  CHECK(lines.back() == "# status=OK");
  double prev = -1.0;
  for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
    const double t = std::stod(lines[i].substr(0, lines[i].find(',')));
    CHECK(t > prev);
    prev = t;
  }
  CHECK(prev == doctest::Approx(0.05));
  CHECK_FALSE(has_tmp_files(d.path));
}

TEST_CASE("invalid arguments exit with the configuration code") {
  TempDir d("bad");
  CHECK(run({"simulate", "--eps", "-1", "--out", d.path.string()}).code == kExitConfig);
  CHECK(run({"simulate", "--grid", "100", "--out", d.path.string()}).code == kExitConfig);
  CHECK(run({"sweep", "--eps", "1e-2", "--out", d.path.string()}).code == kExitConfig);
  const fs::path cfg = d.path / "empty.ini";
  write(cfg, "[sweep]\neps_list = []\n");
  CHECK(run({"sweep", "--config", cfg.string(), "--out", d.path.string()}).code == kExitConfig);
  write(cfg, "[run]\nbogus = 1\n");
  const Outcome o = run({"simulate", "--config", cfg.string()});
  CHECK(o.code == kExitConfig);
  CHECK(o.err.find(":2:1:") != std::string::npos);
  CHECK(run({"simulate", "--config", (d.path / "missing.ini").string()}).code == kExitConfig);
}

TEST_CASE("blow-up exit code agrees with the trajectory status") {
  TempDir d("blow");
  const Outcome o = run({"simulate", "--flow", "ep", "--eps", "1e-2", "--n-amp", "0.9", "--grid", "64", "--t-end", "0.5",
                         "--out", d.path.string()});
  CHECK(o.code == kExitBlowUp);
  const auto lines = read_lines(d.path / "trajectory_ep_0.01.csv");
  REQUIRE_FALSE(lines.empty());
  CHECK(lines.back().rfind("# status=BLOWUP", 0) == 0);
}

TEST_CASE("flags override the configuration file") {
  TempDir d("override");
  const fs::path cfg = d.path / "c.ini";
  write(cfg, "[grid]\nn_points = 64\n[run]\nflow = ep\neps = 0.1\nt_end = 0.01\ndt = 1e-3\n");
  const Outcome o =
      run({"simulate", "--config", cfg.string(), "--flow", "limit", "--eps", "0", "--out", d.path.string()});
  CHECK(o.code == kExitOk);
  CHECK(fs::exists(d.path / "trajectory_limit_0.csv"));
  CHECK_FALSE(fs::exists(d.path / "trajectory_ep_0.1.csv"));
}

TEST_CASE("output directory falls back to the environment") {
  TempDir d("env");
  ::setenv("DEBYE_LIMIT_OUT", d.path.string().c_str(), 1);
  const Outcome o = run({"simulate", "--flow", "limit", "--eps", "0", "--grid", "32", "--t-end", "0.01", "--dt", "1e-3"});
  ::unsetenv("DEBYE_LIMIT_OUT");
  CHECK(o.code == kExitOk);
  CHECK(fs::exists(d.path / "trajectory_limit_0.csv"));
}

TEST_CASE("sweep writes its reports and fails verdicts on a tiny bound") {
  TempDir d("sweep");
  const fs::path cfg = d.path / "c.ini";
  write(cfg, kSmall);
  const Outcome ok = run({"sweep", "--config", cfg.string(), "--out", d.path.string()});
  CHECK((ok.code == kExitOk || ok.code == kExitVerdict));
  for (const char* f : {"sweep_report.json", "sweep_report.csv", "remainder_series.csv"})
    CHECK(fs::exists(d.path / f));
  CHECK_FALSE(has_tmp_files(d.path));
  const Outcome fail = run({"sweep", "--config", cfg.string(), "--bound-factor", "1e-9", "--out", d.path.string()});
  CHECK(fail.code == kExitVerdict);
  CHECK(fail.out.find("FAIL") != std::string::npos);
}

TEST_CASE("check passes on an equilibrium and fails with a zero tolerance") {
  TempDir d("check");
  const fs::path cfg = d.path / "c.ini";
  write(cfg, std::string(kSmall) + "[init]\nn_amp = 0\nu_amp = 0\n");
  const Outcome eq = run({"check", "--config", cfg.string(), "--out", d.path.string()});
  CHECK(eq.code == kExitOk);
  for (const char* f : {"energy_ledger.csv", "remainder_residual.csv", "commutator.csv"})
    CHECK(fs::exists(d.path / f));

  write(cfg, std::string(kSmall) + "identity_tol = 0\n");
  const Outcome strict = run({"check", "--config", cfg.string(), "--out", d.path.string()});
  CHECK(strict.code == kExitVerdict);
}
