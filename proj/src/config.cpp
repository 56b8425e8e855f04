#include "debye/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace debye {

ConfigError::ConfigError(std::string source, int line, int column, const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

std::string to_string(FlowKind f) { return f == FlowKind::Limit ? "limit" : "ep"; }

FlowKind parse_flow(std::string_view s) {
  if (s == "ep") return FlowKind::EulerPoisson;
  if (s == "limit") return FlowKind::Limit;
  throw std::invalid_argument("flow must be 'ep' or 'limit', got '" + std::string(s) + "'");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw std::invalid_argument("cannot parse '" + std::string(s) + "' as a number");
  return v;
}

bool parse_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw std::invalid_argument("cannot parse '" + std::string(s) + "' as a boolean");
}

template <class T>
std::vector<T> parse_list(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = trim(s.substr(1, s.size() - 2));
  std::vector<T> out;
  if (s.empty()) return out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(parse_number<T>(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

std::string parse_string(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

struct Key {
  std::string_view section;
  std::string_view name;
  std::function<void(Config&, std::string_view)> set;
};

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      {"grid", "n_points", [](Config& c, auto v) { c.n_points = parse_number<std::size_t>(v); }},

      {"init", "n_base", [](Config& c, auto v) { c.init.n_base = parse_number<double>(v); }},
      {"init", "n_amp", [](Config& c, auto v) { c.init.n_amp = parse_number<double>(v); }},
      {"init", "u_amp", [](Config& c, auto v) { c.init.u_amp = parse_number<double>(v); }},
      {"init", "mode", [](Config& c, auto v) { c.init.mode = parse_number<int>(v); }},
      {"init", "phase_u", [](Config& c, auto v) { c.init.phase_u = parse_number<double>(v); }},
      {"init", "multi_mode", [](Config& c, auto v) { c.init.multi_mode = parse_bool(v); }},

      {"run", "flow", [](Config& c, auto v) { c.flow = parse_flow(parse_string(v)); }},
      {"run", "eps", [](Config& c, auto v) { c.run.eps = parse_number<double>(v); }},
      {"run", "dt", [](Config& c, auto v) { c.run.dt = parse_number<double>(v); }},
      {"run", "t_end", [](Config& c, auto v) { c.run.t_end = parse_number<double>(v); }},
      {"run", "density_floor", [](Config& c, auto v) { c.run.density_floor = parse_number<double>(v); }},
      {"run", "norm_ceiling", [](Config& c, auto v) { c.run.norm_ceiling = parse_number<double>(v); }},
      {"run", "s", [](Config& c, auto v) { c.run.monitor_s = parse_number<int>(v); }},
      {"run", "record_every", [](Config& c, auto v) { c.run.record_every = parse_number<int>(v); }},
      {"run", "spectral_filter", [](Config& c, auto v) { c.run.spectral_filter = parse_bool(v); }},

      {"pb", "tol", [](Config& c, auto v) { c.run.pb.tol = parse_number<double>(v); }},
      {"pb", "max_newton_iters", [](Config& c, auto v) { c.run.pb.max_newton_iters = parse_number<int>(v); }},
      {"pb", "damping_min", [](Config& c, auto v) { c.run.pb.damping_min = parse_number<double>(v); }},

      {"sweep", "eps_list", [](Config& c, auto v) { c.sweep.eps_list = parse_list<double>(v); }},
      {"sweep", "s_list", [](Config& c, auto v) { c.sweep.s_list = parse_list<int>(v); }},
      {"sweep", "s_fit", [](Config& c, auto v) { c.sweep.s_fit = parse_number<int>(v); }},
      {"sweep", "seed", [](Config& c, auto v) { c.sweep.seed = parse_number<std::uint64_t>(v); }},
      {"sweep", "identity_gamma", [](Config& c, auto v) { c.sweep.identity_gamma = parse_number<int>(v); }},
      {"sweep", "bound_factor", [](Config& c, auto v) { c.sweep.bound_factor = parse_number<double>(v); }},
      {"sweep", "ratio_factor", [](Config& c, auto v) { c.sweep.ratio_factor = parse_number<double>(v); }},
      {"sweep", "order_lo", [](Config& c, auto v) { c.sweep.order_lo = parse_number<double>(v); }},
      {"sweep", "order_hi", [](Config& c, auto v) { c.sweep.order_hi = parse_number<double>(v); }},
      {"sweep", "r2_min", [](Config& c, auto v) { c.sweep.r2_min = parse_number<double>(v); }},
      {"sweep", "identity_tol", [](Config& c, auto v) { c.sweep.identity_tol = parse_number<double>(v); }},
      {"sweep", "gap_identity_tol", [](Config& c, auto v) { c.sweep.gap_identity_tol = parse_number<double>(v); }},
      {"sweep", "jobs", [](Config& c, auto v) { c.jobs = parse_number<int>(v); }},

      {"check", "eps", [](Config& c, auto v) { c.check.eps = parse_number<double>(v); }},
      {"check", "gamma", [](Config& c, auto v) { c.check.gamma = parse_number<int>(v); }},
      {"check", "identity_tol", [](Config& c, auto v) { c.check.identity_tol = parse_number<double>(v); }},
      {"check", "residual_tol", [](Config& c, auto v) { c.check.residual_tol = parse_number<double>(v); }},
      {"check", "kp_samples", [](Config& c, auto v) { c.check.kp_samples = parse_number<int>(v); }},
      {"check", "kp_orders", [](Config& c, auto v) { c.check.kp_orders = parse_list<int>(v); }},
      {"check", "kp_max_mode", [](Config& c, auto v) { c.check.kp_max_mode = parse_number<int>(v); }},
      {"check", "kp_ratio_max", [](Config& c, auto v) { c.check.kp_ratio_max = parse_number<double>(v); }},

      {"output", "dir", [](Config& c, auto v) { c.out_dir = parse_string(v); }},
      {"output", "snapshots", [](Config& c, auto v) { c.snapshots = parse_bool(v); }},
  };
  return table;
}

int column_of(std::string_view line, std::string_view part) {
  return static_cast<int>(part.data() - line.data()) + 1;
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : keys()) out.push_back(std::string(k.section) + "." + std::string(k.name));
  return out;
}

Config parse_config(std::string_view text, const std::string& source, Config base) {
  Config cfg = std::move(base);
  std::string_view section;
  std::set<std::string> seen;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    std::string_view line = raw;
    if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(source, line_no, column_of(raw, line), "unterminated section header");
      const std::string_view name = trim(line.substr(1, line.size() - 2));
      const bool known = std::any_of(keys().begin(), keys().end(), [&](const Key& k) { return k.section == name; });
      if (!known)
        throw ConfigError(source, line_no, column_of(raw, line), "unknown section [" + std::string(name) + "]");
      section = name;
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(source, line_no, column_of(raw, line), "expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(source, line_no, column_of(raw, line), "missing key before '='");
    if (section.empty())
      throw ConfigError(source, line_no, column_of(raw, key), "key '" + std::string(key) + "' outside any section");
    const auto it = std::find_if(keys().begin(), keys().end(),
                                 [&](const Key& k) { return k.section == section && k.name == key; });
    if (it == keys().end())
      throw ConfigError(source, line_no, column_of(raw, key),
                        "unknown key '" + std::string(key) + "' in section [" + std::string(section) + "]");
    const std::string full = std::string(section) + "." + std::string(key);
    if (!seen.insert(full).second)
      throw ConfigError(source, line_no, column_of(raw, key), "duplicate key '" + full + "'");
    if (value.empty()) throw ConfigError(source, line_no, column_of(raw, key), "missing value for '" + full + "'");
    try {
      it->set(cfg, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(source, line_no, column_of(raw, value), full + ": " + e.what());
    }
  }
  return cfg;
}

Config load_config(const std::filesystem::path& path, Config base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), 0, 0, "cannot open configuration file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string(), std::move(base));
}

void Config::validate() const {
  if (n_points < 32 || (n_points & (n_points - 1)) != 0)
    throw std::invalid_argument("grid.n_points must be a power of two >= 32");
  init.validate();
  run.validate();
  if (jobs < 1) throw std::invalid_argument("sweep.jobs must be >= 1");
  sweep_spec().validate();
  if (!(check.eps > 0.0)) throw std::invalid_argument("check.eps must be positive");
  if (check.gamma < 0 || check.gamma > kMaxSobolevOrder)
    throw std::invalid_argument("check.gamma must lie in [0, " + std::to_string(kMaxSobolevOrder) + "]");
  if (!(check.identity_tol >= 0.0) || !(check.residual_tol >= 0.0) || !(check.kp_ratio_max >= 0.0))
    throw std::invalid_argument("check tolerances must be >= 0");
  if (check.kp_samples < 1) throw std::invalid_argument("check.kp_samples must be >= 1");
  if (check.kp_orders.empty()) throw std::invalid_argument("check.kp_orders must not be empty");
  for (int k : check.kp_orders)
    if (k < 1 || k + 1 > kMaxDerivativeOrder) throw std::invalid_argument("check.kp_orders entries must lie in [1, 7]");
  if (check.kp_max_mode < 1 || static_cast<std::size_t>(check.kp_max_mode) * 3 > n_points)
    throw std::invalid_argument("check.kp_max_mode must lie in [1, n_points / 3]");
}

SweepSpec Config::sweep_spec() const {
  SweepSpec s = sweep;
  s.n_points = n_points;
  s.run = run;
  s.run.eps = 0.0;
  s.init = init;
  return s;
}

}  // namespace debye
