#pragma once

// Spectral and collocation fields on the torus, the Leray projector,
// Laplacian/inverse Stokes, dealiasing and Sobolev/Lebesgue norms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "bf/error.hpp"
#include "bf/grid.hpp"

namespace bf::spectral {

/// Fourier coefficients of a real field with `components()` components
/// (dim for velocities, 1 for scalars such as pressure).
struct SpectralField {
  GridPtr grid;
  std::vector<std::vector<cplx>> comps;
  bool divergence_free = false;
  bool mean_zero = false;
  bool dealiased = false;

  SpectralField() = default;
  SpectralField(GridPtr g, int ncomp)
      : grid(std::move(g)), comps(static_cast<std::size_t>(ncomp), std::vector<cplx>(grid->size())) {}

  int components() const noexcept { return static_cast<int>(comps.size()); }
  std::vector<cplx>& operator[](int c) { return comps[static_cast<std::size_t>(c)]; }
  const std::vector<cplx>& operator[](int c) const { return comps[static_cast<std::size_t>(c)]; }

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s) {
    for (auto& c : comps)
      for (auto& v : c) v *= s;
    return *this;
  }
  /// this += s * o
  SpectralField& axpy(double s, const SpectralField& o);
};

/// Real values on the n^dim collocation grid.
struct PhysicalField {
  GridPtr grid;
  std::vector<std::vector<double>> comps;

  PhysicalField() = default;
  PhysicalField(GridPtr g, int ncomp)
      : grid(std::move(g)), comps(static_cast<std::size_t>(ncomp), std::vector<double>(grid->size())) {}

  int components() const noexcept { return static_cast<int>(comps.size()); }
  std::vector<double>& operator[](int c) { return comps[static_cast<std::size_t>(c)]; }
  const std::vector<double>& operator[](int c) const { return comps[static_cast<std::size_t>(c)]; }
};

inline void require_same_grid(const GridPtr& a, const GridPtr& b, const char* op) {
  if (!a || !b || !a->same_as(*b))
    throw ContractViolation(std::string(op) + ": fields live on different grids");
}

inline void require_same_shape(const SpectralField& a, const SpectralField& b, const char* op) {
  require_same_grid(a.grid, b.grid, op);
  if (a.components() != b.components())
    throw ContractViolation(std::string(op) + ": component count mismatch");
}

inline SpectralField& SpectralField::operator+=(const SpectralField& o) {
  return axpy(1.0, o);
}
inline SpectralField& SpectralField::operator-=(const SpectralField& o) {
  return axpy(-1.0, o);
}
inline SpectralField& SpectralField::axpy(double s, const SpectralField& o) {
  require_same_shape(*this, o, "axpy");
  for (std::size_t c = 0; c < comps.size(); ++c) {
    auto& dst = comps[c];
    const auto& src = o.comps[c];
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += s * src[i];
  }
  divergence_free = divergence_free && o.divergence_free;
  mean_zero = mean_zero && o.mean_zero;
  dealiased = dealiased && o.dealiased;
  return *this;
}

inline SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
inline SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
inline SpectralField operator*(double s, SpectralField a) { return a *= s; }

inline SpectralField zeros(const GridPtr& g, int ncomp) {
  SpectralField u(g, ncomp);
  u.divergence_free = u.mean_zero = u.dealiased = true;
  return u;
}
inline SpectralField zeros(const GridPtr& g) { return zeros(g, g->dim()); }

// ---------------------------------------------------------------- transforms

inline PhysicalField to_physical(const SpectralField& u) {
  if (!u.grid) throw ContractViolation("to_physical: field has no grid");
  const Grid& g = *u.grid;
  PhysicalField out(u.grid, u.components());
  std::vector<cplx> buf(g.size());
  for (int c = 0; c < u.components(); ++c) {
    std::copy(u[c].begin(), u[c].end(), buf.begin());
    g.backward(buf);
    auto& dst = out[c];
    for (std::size_t i = 0; i < buf.size(); ++i) dst[i] = buf[i].real();
  }
  return out;
}

inline SpectralField to_spectral(const PhysicalField& u) {
  if (!u.grid) throw ContractViolation("to_spectral: field has no grid");
  const Grid& g = *u.grid;
  SpectralField out(u.grid, u.components());
  for (int c = 0; c < u.components(); ++c) {
    if (u[c].size() != g.size()) throw ContractViolation("to_spectral: array size does not match grid");
    auto& dst = out[c];
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = cplx(u[c][i], 0.0);
    g.forward(dst);
  }
  return out;
}

// ------------------------------------------------------------------ operators

/// u - k (k.u)/|k|^2 on every mode; the k = 0 mode is removed as well.
inline SpectralField leray_project(SpectralField u) {
  const Grid& g = *u.grid;
  const int dim = g.dim();
  if (u.components() != dim) throw ContractViolation("leray_project: expects a vector field");
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i == 0) {
      for (int c = 0; c < dim; ++c) u[c][0] = 0.0;
      continue;
    }
    const auto& k = g.kderiv(i);
    double kk = 0.0;
    cplx kdotu = 0.0;
    for (int c = 0; c < dim; ++c) {
      kk += k[static_cast<std::size_t>(c)] * k[static_cast<std::size_t>(c)];
      kdotu += k[static_cast<std::size_t>(c)] * u[c][i];
    }
    if (kk == 0.0) continue;
    const cplx s = kdotu / kk;
    for (int c = 0; c < dim; ++c) u[c][i] -= k[static_cast<std::size_t>(c)] * s;
  }
  u.divergence_free = true;
  u.mean_zero = true;
  return u;
}

inline SpectralField apply_laplacian(SpectralField u) {
  const Grid& g = *u.grid;
  for (auto& comp : u.comps)
    for (std::size_t i = 0; i < g.size(); ++i) comp[i] *= -g.ksq(i);
  // The k = 0 coefficient is multiplied by zero.
  u.mean_zero = true;
  return u;
}

inline bool has_zero_mean(const SpectralField& u) {
  return std::all_of(u.comps.begin(), u.comps.end(), [](const auto& c) { return c[0] == cplx(0.0); });
}

/// Modewise division by -|k|^2: the inverse of the Laplacian on mean-zero fields.
inline SpectralField apply_inverse_stokes(SpectralField u) {
  if (!has_zero_mean(u)) throw ContractViolation("apply_inverse_stokes: field has a nonzero mean");
  const Grid& g = *u.grid;
  for (auto& comp : u.comps)
    for (std::size_t i = 1; i < g.size(); ++i) comp[i] /= -g.ksq(i);
  u.mean_zero = true;
  return u;
}

/// Zero every mode with some |m_i| > n/3.
inline SpectralField dealias(SpectralField u) {
  const Grid& g = *u.grid;
  for (auto& comp : u.comps)
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!g.in_band(i)) comp[i] = 0.0;
  u.dealiased = true;
  return u;
}

/// Scalar phi -> grad phi.
inline SpectralField gradient(const SpectralField& phi) {
  if (phi.components() != 1) throw ContractViolation("gradient: expects a scalar field");
  const Grid& g = *phi.grid;
  SpectralField out(phi.grid, g.dim());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto& k = g.kderiv(i);
    for (int c = 0; c < g.dim(); ++c)
      out[c][i] = cplx(0.0, k[static_cast<std::size_t>(c)]) * phi[0][i];
  }
  out.mean_zero = true;
  out.dealiased = phi.dealiased;
  return out;
}

/// Vector u -> div u (scalar).
inline SpectralField divergence(const SpectralField& u) {
  const Grid& g = *u.grid;
  if (u.components() != g.dim()) throw ContractViolation("divergence: expects a vector field");
  SpectralField out(u.grid, 1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto& k = g.kderiv(i);
    cplx s = 0.0;
    for (int c = 0; c < g.dim(); ++c) s += cplx(0.0, k[static_cast<std::size_t>(c)]) * u[c][i];
    out[0][i] = s;
  }
  out.mean_zero = true;
  return out;
}

/// Derivative of every component along axis d.
inline SpectralField partial(const SpectralField& u, int d) {
  const Grid& g = *u.grid;
  SpectralField out(u.grid, u.components());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const cplx ik(0.0, g.kderiv(i)[static_cast<std::size_t>(d)]);
    for (int c = 0; c < u.components(); ++c) out[c][i] = ik * u[c][i];
  }
  out.mean_zero = true;
  out.dealiased = u.dealiased;
  return out;
}

// ---------------------------------------------------------------------- norms

/// Discrete L2 inner product (u, v) = V sum_k Re(u_k conj(v_k)).
inline double inner(const SpectralField& u, const SpectralField& v) {
  require_same_shape(u, v, "inner");
  double s = 0.0;
  for (int c = 0; c < u.components(); ++c)
    for (std::size_t i = 0; i < u[c].size(); ++i) s += (u[c][i] * std::conj(v[c][i])).real();
  return u.grid->volume() * s;
}

/// Homogeneous Sobolev norm (V sum_k |k|^{2s} |u_k|^2)^{1/2}. The k = 0 mode
/// contributes only for s = 0.
inline double sobolev_norm(const SpectralField& u, double s) {
  const Grid& g = *u.grid;
  if (s < 0.0 && !has_zero_mean(u))
    throw ContractViolation("sobolev_norm: negative order needs a mean-zero field");
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double w;
    if (i == 0)
      w = (s == 0.0) ? 1.0 : 0.0;
    else if (s == 0.0)
      w = 1.0;
    else if (s == 1.0)
      w = g.ksq(i);
    else if (s == 2.0)
      w = g.ksq(i) * g.ksq(i);
    else
      w = std::pow(g.ksq(i), s);
    if (w == 0.0) continue;
    double m = 0.0;
    for (const auto& comp : u.comps) m += std::norm(comp[i]);
    sum += w * m;
  }
  return std::sqrt(g.volume() * sum);
}

/// (V/N sum_x |u(x)|^p)^{1/p} with |.| the Euclidean norm over components.
inline double lebesgue_norm(const PhysicalField& u, double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw ContractViolation("lebesgue_norm: p must be finite and >= 1");
  const Grid& g = *u.grid;
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double m2 = 0.0;
    for (const auto& comp : u.comps) m2 += comp[i] * comp[i];
    if (!std::isfinite(m2)) throw NumericalFailure("lebesgue_norm: non-finite field value");
    sum += (p == 2.0) ? m2 : std::pow(m2, 0.5 * p);
  }
  return std::pow(g.volume() / static_cast<double>(g.size()) * sum, 1.0 / p);
}

/// Collocation quadrature of |u|^2, i.e. the physical-space L2 norm squared.
inline double quadrature_l2_squared(const PhysicalField& u) {
  const Grid& g = *u.grid;
  double s = 0.0;
  for (const auto& comp : u.comps)
    for (double v : comp) s += v * v;
  return g.volume() / static_cast<double>(g.size()) * s;
}

// ------------------------------------------------------------------ checks

/// max_k |k.u_k| / |u_k| over modes with nonzero coefficient.
inline double divergence_defect(const SpectralField& u) {
  const Grid& g = *u.grid;
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto& k = g.kderiv(i);
    cplx kd = 0.0;
    double mag = 0.0, kk = 0.0;
    for (int c = 0; c < g.dim(); ++c) {
      kd += k[static_cast<std::size_t>(c)] * u[c][i];
      mag += std::norm(u[c][i]);
      kk += k[static_cast<std::size_t>(c)] * k[static_cast<std::size_t>(c)];
    }
    if (mag == 0.0 || kk == 0.0) continue;
    worst = std::max(worst, std::abs(kd) / (std::sqrt(kk) * std::sqrt(mag)));
  }
  return worst;
}

/// max_k |u(-k) - conj(u(k))| relative to the largest coefficient.
inline double conjugate_symmetry_defect(const SpectralField& u) {
  const Grid& g = *u.grid;
  double worst = 0.0, scale = 0.0;
  for (const auto& comp : u.comps)
    for (std::size_t i = 0; i < g.size(); ++i) {
      scale = std::max(scale, std::abs(comp[i]));
      worst = std::max(worst, std::abs(comp[g.conjugate_index(i)] - std::conj(comp[i])));
    }
  return scale == 0.0 ? 0.0 : worst / scale;
}

inline double max_abs(const PhysicalField& u) {
  double m = 0.0;
  for (std::size_t i = 0; i < u.grid->size(); ++i) {
    double s = 0.0;
    for (const auto& comp : u.comps) s += comp[i] * comp[i];
    m = std::max(m, s);
  }
  return std::sqrt(m);
}

inline bool all_finite(const SpectralField& u) {
  for (const auto& comp : u.comps)
    for (const auto& v : comp)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

}  // namespace bf::spectral
