#pragma once

// Seeded generators for forcing and initial data. Every generator returns a
// projected, mean-zero, dealiased, real (conjugate-symmetric) field.

#include <cmath>
#include <cstdint>
#include <random>

#include "bf/checkpoint.hpp"
#include "bf/sim_config.hpp"
#include "bf/spectral.hpp"

namespace bf::fields {

using spectral::SpectralField;

namespace detail {

/// Symmetrize through physical space, then project and truncate.
inline SpectralField finalize(SpectralField u) {
  u = spectral::to_spectral(spectral::to_physical(u));
  return spectral::dealias(spectral::leray_project(std::move(u)));
}

inline SpectralField normalize_l2(SpectralField u, double amplitude) {
  const double l2 = spectral::sobolev_norm(u, 0.0);
  if (l2 > 0.0) u *= amplitude / l2;
  return u;
}

}  // namespace detail

/// u(x) = amplitude * e cos(k.x) with e a unit vector orthogonal to k.
inline SpectralField single_mode(const GridPtr& g, const Lattice& m, double amplitude) {
  const int dim = g->dim();
  double e[3] = {0.0, 0.0, 0.0};
  if (dim == 2) {
    e[0] = -m[1];
    e[1] = m[0];
  } else {
    // m x z, or m x x when m is parallel to z.
    e[0] = m[1];
    e[1] = -m[0];
    e[2] = 0.0;
    if (m[0] == 0 && m[1] == 0) {
      e[0] = 0.0;
      e[1] = m[2];
      e[2] = -m[1];
    }
  }
  const double en = std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
  if (en == 0.0) throw ContractViolation("single_mode: wavevector must be nonzero");
  SpectralField u = spectral::zeros(g);
  const std::size_t ip = g->index_of(m);
  const std::size_t in = g->conjugate_index(ip);
  for (int c = 0; c < dim; ++c) {
    u[c][ip] += 0.5 * amplitude * e[c] / en;
    u[c][in] += 0.5 * amplitude * e[c] / en;
  }
  return spectral::dealias(spectral::leray_project(std::move(u)));
}

/// Gaussian spectrum exp(-|m|^2 / 8) with random complex Gaussian
/// coefficients, normalized to the requested L2 norm.
inline SpectralField random_smooth(const GridPtr& g, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  SpectralField u(g, g->dim());
  for (std::size_t i = 0; i < g->size(); ++i) {
    const auto& m = g->lattice(i);
    const double msq = static_cast<double>(m[0] * m[0] + m[1] * m[1] + m[2] * m[2]);
    const double w = std::exp(-msq / 8.0);
    for (int c = 0; c < g->dim(); ++c) {
      const double re = normal(rng), im = normal(rng);
      u[c][i] = w * cplx(re, im);
    }
  }
  return detail::normalize_l2(detail::finalize(std::move(u)), amplitude);
}

/// Coefficient magnitudes amplitude * k0 / (|k| sqrt(V)) with uniform random
/// phases on every in-band mode. Each phase is seeded by its lattice point,
/// so refining the grid adds modes without touching the coarse ones; the
/// result is a truncation of one fixed field whose L2 norm grows like
/// sqrt(log n) in 2D, so it leaves H (and H1) in the continuum limit.
inline SpectralField random_rough(const GridPtr& g, double amplitude, std::uint64_t seed) {
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  SpectralField u(g, g->dim());
  const auto lo = static_cast<std::uint32_t>(seed), hi = static_cast<std::uint32_t>(seed >> 32);
  const double scale = amplitude * g->k0() / std::sqrt(g->volume());
  for (std::size_t i = 1; i < g->size(); ++i) {
    if (!g->in_band(i)) continue;
    const double mag = scale / std::sqrt(g->ksq(i));
    const auto& m = g->lattice(i);
    std::seed_seq ss{lo, hi, static_cast<std::uint32_t>(m[0]), static_cast<std::uint32_t>(m[1]),
                     static_cast<std::uint32_t>(m[2])};
    std::mt19937_64 rng(ss);
    for (int c = 0; c < g->dim(); ++c) u[c][i] = std::polar(mag, phase(rng));
  }
  return detail::finalize(std::move(u));
}

inline SpectralField make_forcing(const GridPtr& g, const ForcingSpec& spec) {
  switch (spec.kind) {
    case ForcingKind::zero: return spectral::zeros(g);
    case ForcingKind::single_mode: return single_mode(g, spec.mode, spec.amplitude);
    case ForcingKind::random_smooth: return random_smooth(g, spec.amplitude, spec.seed);
  }
  return spectral::zeros(g);
}

inline SpectralField make_initial(const GridPtr& g, const InitSpec& spec) {
  switch (spec.kind) {
    case InitKind::zero: return spectral::zeros(g);
    case InitKind::random_smooth: return random_smooth(g, spec.amplitude, spec.seed);
    case InitKind::random_rough: return random_rough(g, spec.amplitude, spec.seed);
    case InitKind::file: {
      auto u = checkpoint::load(spec.file);
      if (!u.grid->same_as(*g)) throw ConfigError("init.file grid does not match the configured grid", "init.file");
      // Rebind to the caller's grid so later grid checks compare the same object.
      u.grid = g;
      return detail::finalize(std::move(u));
    }
  }
  return spectral::zeros(g);
}

}  // namespace bf::fields
