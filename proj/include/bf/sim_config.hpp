#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numbers>
#include <string>

#include "bf/model.hpp"

namespace bf {

enum class Scheme { imex1, imex2 };
enum class ForcingKind { zero, single_mode, random_smooth };
enum class InitKind { zero, random_smooth, random_rough, file };

struct GridSpec {
  int dim = 2;
  int n = 32;
  double length = 2.0 * std::numbers::pi;
};

/// Forcing g. `amplitude` is the L2 norm for random_smooth and the peak
/// value for single_mode.
struct ForcingSpec {
  ForcingKind kind = ForcingKind::zero;
  double amplitude = 0.0;
  std::uint64_t seed = 1;
  std::array<int, 3> mode{1, 0, 0};
};

/// Initial data u0. `amplitude` is the L2 norm after projection, except for
/// random_rough where it scales a fixed |k|^{-1} coefficient envelope.
struct InitSpec {
  InitKind kind = InitKind::zero;
  double amplitude = 0.0;
  std::uint64_t seed = 2;
  std::string file;
};

struct SimConfig {
  GridSpec grid;
  model::PowerLaw model{0.0, 1.0, 3.0, true};
  bool convective = false;
  ForcingSpec forcing;
  InitSpec init;
  double dt = 1e-3;
  double t_end = 1.0;
  double sample_dt = 0.01;
  Scheme scheme = Scheme::imex2;
};

inline const char* to_string(Scheme s) { return s == Scheme::imex1 ? "imex1" : "imex2"; }
inline const char* to_string(ForcingKind k) {
  switch (k) {
    case ForcingKind::zero: return "zero";
    case ForcingKind::single_mode: return "single_mode";
    case ForcingKind::random_smooth: return "random_smooth";
  }
  return "zero";
}
inline const char* to_string(InitKind k) {
  switch (k) {
    case InitKind::zero: return "zero";
    case InitKind::random_smooth: return "random_smooth";
    case InitKind::random_rough: return "random_rough";
    case InitKind::file: return "file";
  }
  return "zero";
}

/// Scheme order used by the refinement checks.
inline int nominal_order(Scheme s) { return s == Scheme::imex1 ? 1 : 2; }

/// Round-trip decimal form of a double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Normalized key/value form of a SimConfig, in key order.
inline std::map<std::string, std::string> echo_entries(const SimConfig& c) {
  std::map<std::string, std::string> e;
  e["dim"] = std::to_string(c.grid.dim);
  e["n"] = std::to_string(c.grid.n);
  e["length"] = format_double(c.grid.length);
  e["scheme"] = to_string(c.scheme);
  e["dt"] = format_double(c.dt);
  e["t_end"] = format_double(c.t_end);
  e["sample_dt"] = format_double(c.sample_dt);
  e["convective"] = c.convective ? "true" : "false";
  e["model.a"] = format_double(c.model.a());
  e["model.b"] = format_double(c.model.b());
  e["model.r"] = format_double(c.model.r());
  e["model.enabled"] = c.model.enabled() ? "true" : "false";
  e["forcing.kind"] = to_string(c.forcing.kind);
  e["forcing.amplitude"] = format_double(c.forcing.amplitude);
  e["forcing.seed"] = std::to_string(c.forcing.seed);
  e["forcing.mode"] = std::to_string(c.forcing.mode[0]) + "," + std::to_string(c.forcing.mode[1]) + "," +
                      std::to_string(c.forcing.mode[2]);
  e["init.kind"] = to_string(c.init.kind);
  e["init.amplitude"] = format_double(c.init.amplitude);
  e["init.seed"] = std::to_string(c.init.seed);
  if (!c.init.file.empty()) e["init.file"] = c.init.file;
  return e;
}

}  // namespace bf
