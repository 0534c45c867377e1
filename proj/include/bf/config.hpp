#pragma once

// Flat `key = value` configuration files with `#` comments. Parsing fills
// defaults, rejects unknown keys and validates physical consistency; every
// failure is a ConfigError naming the offending key. echo() renders the
// fully resolved job in sorted key order, and parse(echo(job)) reproduces it.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bf/sim_config.hpp"
#include "bf/steady.hpp"
#include "bf/verify.hpp"

namespace bf::config {

enum class Command { simulate, steady, sweep, verify, oracle_check };

struct JobSpec {
  SimConfig sim;
  steady::Method steady_method = steady::Method::newton;
  double steady_tol = 1e-9;
  std::vector<double> sweep_amplitudes;
  verify::VerifyOptions verify;
  verify::OracleOptions oracle;
  std::string out;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

template <class T>
T parse_integer(const std::string& key, const std::string& v) {
  T out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw ConfigError(key + ": expected an integer, got '" + v + "'", key);
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(out))
    throw ConfigError(key + ": expected a finite number, got '" + v + "'", key);
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'", key);
}

template <class E>
E parse_enum(const std::string& key, const std::string& v, std::initializer_list<std::pair<const char*, E>> opts) {
  std::string names;
  for (const auto& [name, e] : opts) {
    if (v == name) return e;
    names += names.empty() ? name : std::string(", ") + name;
  }
  throw ConfigError(key + ": expected one of " + names + ", got '" + v + "'", key);
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  if (v.empty()) return out;
  for (const auto& item : split(v, ',')) out.push_back(parse_double(key, item));
  return out;
}

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

inline void require(bool ok, const std::string& key, const std::string& msg) {
  if (!ok) throw ConfigError(msg, key);
}

}  // namespace detail

inline const char* to_string(Command c) {
  switch (c) {
    case Command::simulate: return "simulate";
    case Command::steady: return "steady";
    case Command::sweep: return "sweep";
    case Command::verify: return "verify";
    case Command::oracle_check: return "oracle-check";
  }
  return "simulate";
}

inline std::vector<std::string> required_keys(Command c) {
  switch (c) {
    case Command::steady: return {"dim", "n", "length"};
    case Command::sweep: return {"dim", "n", "length", "sweep.amplitudes"};
    default: return {"dim", "n", "length", "dt", "t_end"};
  }
}

/// Key/value pairs of a config text, in file order.
inline std::vector<std::pair<std::string, std::string>> tokenize(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string> seen;
  std::size_t lineno = 0, pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'", detail::trim(t));
    std::string key = detail::trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key", "");
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", key);
    out.emplace_back(std::move(key), detail::trim(t.substr(eq + 1)));
  }
  return out;
}

inline JobSpec parse_config(std::string_view text, Command cmd) {
  using detail::parse_double;
  using detail::require;
  const auto entries = tokenize(text);
  std::map<std::string, std::string> kv(entries.begin(), entries.end());

  std::vector<std::string> missing;
  for (const auto& k : required_keys(cmd))
    if (!kv.count(k)) missing.push_back(k);
  if (!missing.empty()) {
    std::string list;
    for (const auto& k : missing) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError(std::string(to_string(cmd)) + ": missing required keys: " + list, missing.front());
  }

  JobSpec job;
  SimConfig& s = job.sim;
  double ma = s.model.a(), mb = s.model.b(), mr = s.model.r();
  bool menabled = s.model.enabled();
  bool sample_given = false;

  for (const auto& [key, v] : entries) {
    if (key == "dim") s.grid.dim = detail::parse_integer<int>(key, v);
    else if (key == "n") s.grid.n = detail::parse_integer<int>(key, v);
    else if (key == "length") s.grid.length = parse_double(key, v);
    else if (key == "scheme")
      s.scheme = detail::parse_enum<Scheme>(key, v, {{"imex1", Scheme::imex1}, {"imex2", Scheme::imex2}});
    else if (key == "dt") s.dt = parse_double(key, v);
    else if (key == "t_end") s.t_end = parse_double(key, v);
    else if (key == "sample_dt") {
      s.sample_dt = parse_double(key, v);
      sample_given = true;
    } else if (key == "convective") s.convective = detail::parse_bool(key, v);
    else if (key == "model.a") ma = parse_double(key, v);
    else if (key == "model.b") mb = parse_double(key, v);
    else if (key == "model.r") mr = parse_double(key, v);
    else if (key == "model.enabled") menabled = detail::parse_bool(key, v);
    else if (key == "forcing.kind")
      s.forcing.kind = detail::parse_enum<ForcingKind>(key, v,
                                                       {{"zero", ForcingKind::zero},
                                                        {"single_mode", ForcingKind::single_mode},
                                                        {"random_smooth", ForcingKind::random_smooth}});
    else if (key == "forcing.amplitude") s.forcing.amplitude = parse_double(key, v);
    else if (key == "forcing.seed") s.forcing.seed = detail::parse_integer<std::uint64_t>(key, v);
    else if (key == "forcing.mode") {
      const auto parts = detail::split(v, ',');
      require(parts.size() == 2 || parts.size() == 3, key, "forcing.mode expects 2 or 3 comma-separated integers");
      s.forcing.mode = {0, 0, 0};
      for (std::size_t i = 0; i < parts.size(); ++i) s.forcing.mode[i] = detail::parse_integer<int>(key, parts[i]);
    } else if (key == "init.kind")
      s.init.kind = detail::parse_enum<InitKind>(key, v,
                                                 {{"zero", InitKind::zero},
                                                  {"random_smooth", InitKind::random_smooth},
                                                  {"random_rough", InitKind::random_rough},
                                                  {"file", InitKind::file}});
    else if (key == "init.amplitude") s.init.amplitude = parse_double(key, v);
    else if (key == "init.seed") s.init.seed = detail::parse_integer<std::uint64_t>(key, v);
    else if (key == "init.file") s.init.file = v;
    else if (key == "out") job.out = v;
    else if (key == "steady.method")
      job.steady_method = detail::parse_enum<steady::Method>(
          key, v, {{"newton", steady::Method::newton}, {"pseudo_time", steady::Method::pseudo_time}});
    else if (key == "steady.tol") job.steady_tol = parse_double(key, v);
    else if (key == "sweep.amplitudes") job.sweep_amplitudes = detail::parse_list(key, v);
    else if (key == "verify.perturbation.kind")
      job.verify.perturbation = detail::parse_enum<verify::PerturbationKind>(
          key, v,
          {{"random_smooth", verify::PerturbationKind::random_smooth},
           {"lowest_shell", verify::PerturbationKind::lowest_shell}});
    else if (key == "verify.perturbation.amplitude") job.verify.perturbation_amplitude = parse_double(key, v);
    else if (key == "verify.perturbation.seed")
      job.verify.perturbation_seed = detail::parse_integer<std::uint64_t>(key, v);
    else if (key == "verify.tolerance") job.verify.tolerance = parse_double(key, v);
    else if (key == "verify.rate_tolerance") job.verify.rate_tolerance = parse_double(key, v);
    else if (key == "verify.headroom") job.verify.headroom = parse_double(key, v);
    else if (key == "verify.burn_in") job.verify.burn_in = parse_double(key, v);
    else if (key == "verify.ensemble") job.verify.ensemble = detail::parse_integer<int>(key, v);
    else if (key == "oracle.dts") job.oracle.dts = detail::parse_list(key, v);
    else if (key == "oracle.tol") job.oracle.tol = parse_double(key, v);
    else if (key == "oracle.order_tolerance") job.oracle.order_tolerance = parse_double(key, v);
    else if (key == "oracle.quadrature_n") job.oracle.quadrature_n = detail::parse_integer<int>(key, v);
    else throw ConfigError("unknown key '" + key + "'", key);
  }

  // Grid.
  require(s.grid.dim == 2 || s.grid.dim == 3, "dim", "dim must be 2 or 3");
  require(s.grid.n >= 4 && (s.grid.n & (s.grid.n - 1)) == 0, "n", "n must be a power of two >= 4");
  require(s.grid.length > 0.0, "length", "length must be positive");

  // Time stepping.
  require(s.dt > 0.0, "dt", "dt must be positive");
  require(s.t_end > 0.0, "t_end", "t_end must be positive");
  if (!sample_given) s.sample_dt = std::min(s.sample_dt, s.t_end);
  require(s.sample_dt > 0.0, "sample_dt", "sample_dt must be positive");
  require(s.dt <= s.sample_dt * (1.0 + 1e-12), "sample_dt", "sample_dt must be at least dt");
  require(s.sample_dt <= s.t_end * (1.0 + 1e-12), "sample_dt", "sample_dt must not exceed t_end");

  // Model; PowerLaw reports its own keys.
  s.model = model::PowerLaw(ma, mb, mr, menabled);
  if (menabled) require(s.dt * ma > -1.0, "dt", "dt * model.a must exceed -1");

  // Data.
  require(s.forcing.amplitude >= 0.0, "forcing.amplitude", "forcing.amplitude must be nonnegative");
  require(s.init.amplitude >= 0.0, "init.amplitude", "init.amplitude must be nonnegative");
  if (s.forcing.kind == ForcingKind::single_mode) {
    const auto& m = s.forcing.mode;
    bool nonzero = false, in_band = true;
    for (int d = 0; d < 3; ++d) {
      nonzero = nonzero || m[static_cast<std::size_t>(d)] != 0;
      if (d >= s.grid.dim && m[static_cast<std::size_t>(d)] != 0) in_band = false;
      if (3 * std::abs(m[static_cast<std::size_t>(d)]) > s.grid.n) in_band = false;
    }
    require(nonzero, "forcing.mode", "forcing.mode must be nonzero");
    require(in_band, "forcing.mode", "forcing.mode must lie in the dealiased band of the grid");
  }
  if (s.init.kind == InitKind::file) require(!s.init.file.empty(), "init.file", "init.kind = file requires init.file");

  // Extensions.
  require(job.steady_tol > 0.0, "steady.tol", "steady.tol must be positive");
  for (std::size_t i = 0; i < job.sweep_amplitudes.size(); ++i) {
    require(job.sweep_amplitudes[i] >= 0.0, "sweep.amplitudes", "sweep.amplitudes must be nonnegative");
    if (i > 0)
      require(job.sweep_amplitudes[i] > job.sweep_amplitudes[i - 1], "sweep.amplitudes",
              "sweep.amplitudes must be strictly increasing");
  }
  if (cmd == Command::sweep) require(!job.sweep_amplitudes.empty(), "sweep.amplitudes", "sweep.amplitudes is empty");
  const auto& vo = job.verify;
  require(vo.perturbation_amplitude >= 0.0, "verify.perturbation.amplitude",
          "verify.perturbation.amplitude must be nonnegative");
  require(vo.tolerance > 0.0, "verify.tolerance", "verify.tolerance must be positive");
  require(vo.rate_tolerance > 0.0, "verify.rate_tolerance", "verify.rate_tolerance must be positive");
  require(vo.headroom >= 1.0, "verify.headroom", "verify.headroom must be at least 1");
  require(vo.burn_in >= 0.0, "verify.burn_in", "verify.burn_in must be nonnegative");
  require(vo.ensemble >= 1, "verify.ensemble", "verify.ensemble must be at least 1");
  for (std::size_t i = 0; i < job.oracle.dts.size(); ++i) {
    require(job.oracle.dts[i] > 0.0, "oracle.dts", "oracle.dts must be positive");
    if (i > 0) require(job.oracle.dts[i] < job.oracle.dts[i - 1], "oracle.dts", "oracle.dts must be decreasing");
  }
  require(job.oracle.tol > 0.0, "oracle.tol", "oracle.tol must be positive");
  require(job.oracle.order_tolerance > 0.0, "oracle.order_tolerance", "oracle.order_tolerance must be positive");
  require(job.oracle.quadrature_n >= 0, "oracle.quadrature_n", "oracle.quadrature_n must be nonnegative");
  return job;
}

/// Every resolved key in sorted order.
inline std::map<std::string, std::string> echo_map(const JobSpec& job) {
  auto e = echo_entries(job.sim);
  e["steady.method"] = steady::to_string(job.steady_method);
  e["steady.tol"] = format_double(job.steady_tol);
  if (!job.sweep_amplitudes.empty()) e["sweep.amplitudes"] = detail::join(job.sweep_amplitudes);
  e["verify.perturbation.kind"] = verify::to_string(job.verify.perturbation);
  e["verify.perturbation.amplitude"] = format_double(job.verify.perturbation_amplitude);
  e["verify.perturbation.seed"] = std::to_string(job.verify.perturbation_seed);
  e["verify.tolerance"] = format_double(job.verify.tolerance);
  e["verify.rate_tolerance"] = format_double(job.verify.rate_tolerance);
  e["verify.headroom"] = format_double(job.verify.headroom);
  e["verify.burn_in"] = format_double(job.verify.burn_in);
  e["verify.ensemble"] = std::to_string(job.verify.ensemble);
  e["oracle.dts"] = detail::join(job.oracle.dts);
  e["oracle.tol"] = format_double(job.oracle.tol);
  e["oracle.order_tolerance"] = format_double(job.oracle.order_tolerance);
  e["oracle.quadrature_n"] = std::to_string(job.oracle.quadrature_n);
  if (!job.out.empty()) e["out"] = job.out;
  return e;
}

inline std::string echo(const JobSpec& job) {
  std::string s;
  for (const auto& [k, v] : echo_map(job)) s += k + " = " + v + "\n";
  return s;
}

/// Replaces every seed: forcing gets `seed`, initial data `seed + 1` and the
/// verification perturbation `seed + 2`.
inline void override_seeds(JobSpec& job, std::uint64_t seed) {
  job.sim.forcing.seed = seed;
  job.sim.init.seed = seed + 1;
  job.verify.perturbation_seed = seed + 2;
}

}  // namespace bf::config
