#pragma once

// Reduced dense Galerkin system used as an oracle for the pseudo-spectral
// stepper. It is assembled independently of the FFT path: retained modes
// carry explicit orthonormal divergence-free bases, the velocity is summed
// directly on a quadrature grid, and nonlinear terms are projected back by
// direct quadrature. Time integration uses an adaptive Dormand-Prince 5(4).

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "bf/model.hpp"
#include "bf/spectral.hpp"

namespace bf::verify {

using spectral::SpectralField;

struct ReducedMode {
  Lattice m{0, 0, 0};
  std::array<double, 3> k{0, 0, 0};
  double ksq = 0;
  /// Orthonormal basis of the plane orthogonal to k (1 vector in 2D, 2 in 3D).
  std::vector<std::array<double, 3>> basis;
};

inline constexpr std::size_t kMaxReducedDimension = 200;

class ReducedSystem {
 public:
  using State = std::vector<double>;

  /// `forcing` may live on any grid of the same dim and length; only the
  /// coefficients at the retained modes are used. `quadrature_n` points per
  /// axis are used for the nonlinear terms.
  ReducedSystem(std::vector<Lattice> modes, int dim, double length, model::PowerLaw f, bool convective,
                const SpectralField& forcing, int quadrature_n)
      : dim_(dim), length_(length), f_(f), convective_(convective), qn_(quadrature_n) {
    const double k0 = 2.0 * std::numbers::pi / length;
    for (const auto& m : modes) {
      ReducedMode rm;
      rm.m = m;
      for (int d = 0; d < 3; ++d) rm.k[static_cast<std::size_t>(d)] = d < dim ? k0 * m[static_cast<std::size_t>(d)] : 0.0;
      rm.ksq = rm.k[0] * rm.k[0] + rm.k[1] * rm.k[1] + rm.k[2] * rm.k[2];
      if (rm.ksq == 0.0) throw ContractViolation("ReducedSystem: the zero mode cannot be retained");
      rm.basis = orthonormal_complement(rm.k, dim);
      modes_.push_back(rm);
    }
    dimension_ = 0;
    for (const auto& rm : modes_) dimension_ += 2 * rm.basis.size();
    if (dimension_ > kMaxReducedDimension) throw ContractViolation("ReducedSystem: more than 200 real unknowns");

    std::size_t pts = 1;
    for (int d = 0; d < dim; ++d) pts *= static_cast<std::size_t>(qn_);
    points_ = pts;
    phase_.assign(modes_.size() * points_, cplx(0.0));
    for (std::size_t j = 0; j < modes_.size(); ++j)
      for (std::size_t p = 0; p < points_; ++p) {
        double kx = 0.0;
        std::size_t rem = p;
        for (int d = dim - 1; d >= 0; --d) {
          const double x = length * static_cast<double>(rem % static_cast<std::size_t>(qn_)) / qn_;
          rem /= static_cast<std::size_t>(qn_);
          kx += modes_[j].k[static_cast<std::size_t>(d)] * x;
        }
        phase_[j * points_ + p] = std::polar(1.0, kx);
      }
    forcing_ = coefficients_of(forcing);
  }

  /// Half-lattice representatives of every nonzero mode in the two-thirds
  /// band of `g` (one of each +/- m pair).
  static std::vector<Lattice> band_modes(const Grid& g) {
    std::vector<Lattice> out;
    for (std::size_t i = 1; i < g.size(); ++i) {
      if (!g.in_band(i)) continue;
      const Lattice& m = g.lattice(i);
      int lead = 0;
      for (int d = 0; d < 3 && lead == 0; ++d) lead = m[static_cast<std::size_t>(d)];
      if (lead > 0) out.push_back(m);
    }
    return out;
  }

  std::size_t dimension() const noexcept { return dimension_; }
  const std::vector<ReducedMode>& modes() const noexcept { return modes_; }

  /// Real coordinates (Re c, Im c) of e_b . u(m) for each retained mode/basis.
  State coefficients_of(const SpectralField& u) const {
    State x(dimension_, 0.0);
    std::size_t o = 0;
    for (const auto& rm : modes_) {
      const std::size_t idx = u.grid->index_of(rm.m);
      for (const auto& e : rm.basis) {
        cplx c = 0.0;
        for (int d = 0; d < dim_; ++d) c += e[static_cast<std::size_t>(d)] * u[d][idx];
        x[o++] = c.real();
        x[o++] = c.imag();
      }
    }
    return x;
  }

  /// Spectral field on `g` carrying the retained modes of x.
  SpectralField to_field(const State& x, const GridPtr& g) const {
    SpectralField u = spectral::zeros(g);
    std::size_t o = 0;
    for (const auto& rm : modes_) {
      const std::size_t ip = g->index_of(rm.m);
      const std::size_t in = g->conjugate_index(ip);
      for (const auto& e : rm.basis) {
        const cplx c(x[o], x[o + 1]);
        o += 2;
        for (int d = 0; d < dim_; ++d) {
          u[d][ip] += e[static_cast<std::size_t>(d)] * c;
          u[d][in] += e[static_cast<std::size_t>(d)] * std::conj(c);
        }
      }
    }
    return u;
  }

  void operator()(const State& x, State& dxdt, double /*t*/) const {
    const std::size_t nm = modes_.size();
    // Vector coefficients u(m_j).
    std::vector<std::array<cplx, 3>> uhat(nm);
    std::size_t o = 0;
    for (std::size_t j = 0; j < nm; ++j) {
      uhat[j] = {cplx(0.0), cplx(0.0), cplx(0.0)};
      for (const auto& e : modes_[j].basis) {
        const cplx c(x[o], x[o + 1]);
        o += 2;
        for (int d = 0; d < 3; ++d) uhat[j][static_cast<std::size_t>(d)] += e[static_cast<std::size_t>(d)] * c;
      }
    }

    // Pointwise values (and gradients when convective) on the quadrature grid.
    std::vector<std::array<double, 3>> up(points_, {0.0, 0.0, 0.0});
    std::vector<std::array<double, 9>> gradp;
    if (convective_) gradp.assign(points_, std::array<double, 9>{});
    for (std::size_t j = 0; j < nm; ++j) {
      const auto& k = modes_[j].k;
      for (std::size_t p = 0; p < points_; ++p) {
        const cplx ph = phase_[j * points_ + p];
        for (int c = 0; c < dim_; ++c) {
          const cplx v = uhat[j][static_cast<std::size_t>(c)] * ph;
          up[p][static_cast<std::size_t>(c)] += 2.0 * v.real();
          if (convective_)
            for (int l = 0; l < dim_; ++l)
              // d/dx_l of 2 Re(v) = 2 Re(i k_l v) = -2 k_l Im(v)
              gradp[p][static_cast<std::size_t>(3 * c + l)] += -2.0 * k[static_cast<std::size_t>(l)] * v.imag();
        }
      }
    }
    std::vector<std::array<double, 3>> np(points_, {0.0, 0.0, 0.0});
    for (std::size_t p = 0; p < points_; ++p) {
      const model::Vec fv = f_.eval_f(up[p]);
      for (int c = 0; c < 3; ++c) np[p][static_cast<std::size_t>(c)] = fv[static_cast<std::size_t>(c)];
      if (convective_)
        for (int c = 0; c < dim_; ++c)
          for (int l = 0; l < dim_; ++l)
            np[p][static_cast<std::size_t>(c)] +=
                up[p][static_cast<std::size_t>(l)] * gradp[p][static_cast<std::size_t>(3 * c + l)];
    }

    dxdt.assign(dimension_, 0.0);
    o = 0;
    const double w = 1.0 / static_cast<double>(points_);
    for (std::size_t j = 0; j < nm; ++j) {
      std::array<cplx, 3> nh{cplx(0.0), cplx(0.0), cplx(0.0)};
      for (std::size_t p = 0; p < points_; ++p) {
        const cplx ph = std::conj(phase_[j * points_ + p]);
        for (int c = 0; c < dim_; ++c) nh[static_cast<std::size_t>(c)] += np[p][static_cast<std::size_t>(c)] * ph;
      }
      for (const auto& e : modes_[j].basis) {
        cplx proj = 0.0;
        for (int c = 0; c < dim_; ++c) proj += e[static_cast<std::size_t>(c)] * nh[static_cast<std::size_t>(c)] * w;
        const cplx c(x[o], x[o + 1]);
        const cplx g(forcing_[o], forcing_[o + 1]);
        const cplx d = -modes_[j].ksq * c - proj + g;
        dxdt[o] = d.real();
        dxdt[o + 1] = d.imag();
        o += 2;
      }
    }
  }

 private:
  static std::vector<std::array<double, 3>> orthonormal_complement(const std::array<double, 3>& k, int dim) {
    const double kn = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    const std::array<double, 3> kh{k[0] / kn, k[1] / kn, k[2] / kn};
    if (dim == 2) return {{-kh[1], kh[0], 0.0}};
    // Gram-Schmidt against the coordinate axis least aligned with k.
    std::array<double, 3> a{0.0, 0.0, 0.0};
    int axis = 0;
    for (int d = 1; d < 3; ++d)
      if (std::abs(kh[static_cast<std::size_t>(d)]) < std::abs(kh[static_cast<std::size_t>(axis)])) axis = d;
    a[static_cast<std::size_t>(axis)] = 1.0;
    const double proj = a[0] * kh[0] + a[1] * kh[1] + a[2] * kh[2];
    std::array<double, 3> e1{a[0] - proj * kh[0], a[1] - proj * kh[1], a[2] - proj * kh[2]};
    const double n1 = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
    for (auto& v : e1) v /= n1;
    const std::array<double, 3> e2{kh[1] * e1[2] - kh[2] * e1[1], kh[2] * e1[0] - kh[0] * e1[2],
                                   kh[0] * e1[1] - kh[1] * e1[0]};
    return {e1, e2};
  }

  int dim_;
  double length_;
  model::PowerLaw f_;
  bool convective_;
  int qn_;
  std::vector<ReducedMode> modes_;
  std::size_t dimension_ = 0;
  std::size_t points_ = 0;
  std::vector<cplx> phase_;
  State forcing_;
};

/// Reduced system for the two-thirds band of `g`, nonlinearity evaluated on
/// `quadrature_n` points per axis.
inline ReducedSystem build_reduced(const Grid& g, const model::PowerLaw& f, bool convective,
                                   const SpectralField& forcing, int quadrature_n) {
  return ReducedSystem(ReducedSystem::band_modes(g), g.dim(), g.length(), f, convective, forcing, quadrature_n);
}

/// States at each requested time (sorted, starting at or after 0) from an
/// adaptive Dormand-Prince 5(4) integration with absolute and relative
/// local error tolerance `tol`.
inline std::vector<ReducedSystem::State> integrate_reference(const ReducedSystem& sys, ReducedSystem::State x0,
                                                             const std::vector<double>& times, double tol) {
  namespace odeint = boost::numeric::odeint;
  using State = ReducedSystem::State;
  std::vector<State> out;
  auto stepper = odeint::make_dense_output(tol, tol, odeint::runge_kutta_dopri5<State>());
  auto observer = [&](const State& x, double) { out.push_back(x); };
  try {
    odeint::integrate_times(stepper, std::cref(sys), x0, times.begin(), times.end(), 1e-4, observer);
  } catch (const std::exception& e) {
    throw NumericalFailure(std::string("integrate_reference: ") + e.what());
  }
  for (const auto& x : out)
    for (double v : x)
      if (!std::isfinite(v)) throw NumericalFailure("integrate_reference: non-finite state");
  return out;
}

}  // namespace bf::verify
