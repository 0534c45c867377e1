#pragma once

#include <cstdint>
#include <random>

#include "bf/sim_config.hpp"
#include "bf/spectral.hpp"

namespace bf::test {

/// Real field with i.i.d. standard normal point values, in spectral form.
inline spectral::SpectralField random_real(const GridPtr& g, int ncomp, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  spectral::PhysicalField p(g, ncomp);
  for (auto& comp : p.comps)
    for (auto& v : comp) v = normal(rng);
  return spectral::to_spectral(p);
}

inline spectral::SpectralField random_real(const GridPtr& g, std::uint64_t seed) {
  return random_real(g, g->dim(), seed);
}

/// Projected, dealiased random velocity field.
inline spectral::SpectralField random_velocity(const GridPtr& g, std::uint64_t seed) {
  return spectral::dealias(spectral::leray_project(random_real(g, seed)));
}

inline double max_coefficient(const spectral::SpectralField& u) {
  double m = 0.0;
  for (const auto& comp : u.comps)
    for (const auto& v : comp) m = std::max(m, std::abs(v));
  return m;
}

/// 2D torus of side 2 pi, cubic power law, smooth forcing and initial data.
inline SimConfig small_config(int n = 16) {
  SimConfig c;
  c.grid = {2, n, 2.0 * std::numbers::pi};
  c.model = model::PowerLaw(1.0, 1.0, 3.0);
  c.forcing.kind = ForcingKind::random_smooth;
  c.forcing.amplitude = 2.0;
  c.forcing.seed = 1;
  c.init.kind = InitKind::random_smooth;
  c.init.amplitude = 2.0;
  c.init.seed = 2;
  c.dt = 1e-3;
  c.t_end = 0.2;
  c.sample_dt = 0.01;
  return c;
}

}  // namespace bf::test
