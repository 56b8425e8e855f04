#pragma once

// Run configuration: `[section]` headers and `key = value` lines, `#` or `;`
// comments. Every key has a built-in default, so an empty file (or none) is
// a valid configuration. Unknown sections and keys are errors.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "debye/experiments.hpp"

namespace debye {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string source, int line, int column, const std::string& what);
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

enum class FlowKind { EulerPoisson, Limit };

struct CheckSettings {
  double eps = 1e-2;
  int gamma = 0;
  double identity_tol = 1e-5;   // max relative defect of the energy balance
  double residual_tol = 1e-8;   // max elliptic defect of the remainder system
  int kp_samples = 100;
  std::vector<int> kp_orders{1, 2, 3};
  int kp_max_mode = 8;
  double kp_ratio_max = std::numeric_limits<double>::infinity();
};

struct Config {
  std::size_t n_points = 256;
  InitParams init;
  RunOptions run;  // run.eps is the single-run eps
  FlowKind flow = FlowKind::EulerPoisson;
  SweepSpec sweep;  // n_points, run and init are taken from the fields above
  int jobs = 1;
  CheckSettings check;
  std::string out_dir;  // empty: DEBYE_LIMIT_OUT, then the working directory
  bool snapshots = false;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  /// The sweep with grid, run template and initial data filled in.
  SweepSpec sweep_spec() const;
};

/// Parses configuration text on top of `base`. `source` names the input in
/// diagnostics.
Config parse_config(std::string_view text, const std::string& source = "<config>", Config base = {});
Config load_config(const std::filesystem::path& path, Config base = {});

/// Every accepted key as "section.key", in documentation order.
std::vector<std::string> config_keys();

std::string to_string(FlowKind f);
FlowKind parse_flow(std::string_view s);

}  // namespace debye
