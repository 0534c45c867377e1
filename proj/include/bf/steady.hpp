#pragma once

// Stationary problem  -Lap w + f(w) [+ (w.grad)w] + grad p = g, div w = 0,
// int p = 0 on the torus: Newton-Krylov and stabilized pseudo-time solvers,
// pressure recovery and the load sweep probing H2 regularity.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bf/dynamics.hpp"
#include "bf/krylov.hpp"

namespace bf::steady {

using spectral::PhysicalField;
using spectral::SpectralField;

enum class Method { pseudo_time, newton };

inline const char* to_string(Method m) { return m == Method::newton ? "newton" : "pseudo_time"; }

struct SteadyOptions {
  Method method = Method::newton;
  double tol = 1e-9;
  std::size_t max_newton = 60;
  std::size_t max_pseudo = 200000;
  /// Relative tolerance of each inner Krylov solve.
  double inner_tol = 1e-2;
  std::optional<SpectralField> initial;
};

struct SteadySolution {
  SpectralField w;
  SpectralField p;
  /// L2 norm of A w - P f(w) [- P (w.grad)w] + P g.
  double residual = 0.0;
  std::size_t iterations = 0;
  Method method = Method::newton;
};

namespace detail {

/// D[(a.grad)b].
inline SpectralField bilinear_advection(const SpectralField& a, const PhysicalField& a_phys, const SpectralField& b) {
  const Grid& g = *a.grid;
  const int dim = g.dim();
  PhysicalField n(a.grid, dim);
  for (int j = 0; j < dim; ++j) {
    const PhysicalField dj = spectral::to_physical(spectral::partial(b, j));
    for (int c = 0; c < dim; ++c)
      for (std::size_t i = 0; i < g.size(); ++i) n[c][i] += a_phys[j][i] * dj[c][i];
  }
  return spectral::dealias(spectral::to_spectral(n));
}

/// Linearization of the projected residual at w.
class Jacobian {
 public:
  Jacobian(const dynamics::ProjectedSystem& sys, const SpectralField& w)
      : sys_(&sys), w_(&w), w_phys_(spectral::to_physical(w)) {}

  SpectralField operator()(const SpectralField& v) const {
    const Grid& g = *v.grid;
    const int dim = g.dim();
    SpectralField out = spectral::apply_laplacian(v);
    const auto& f = sys_->model();
    if (f.enabled()) {
      const PhysicalField vp = spectral::to_physical(v);
      PhysicalField jv(v.grid, dim);
      for (std::size_t i = 0; i < g.size(); ++i) {
        model::Vec uu{0.0, 0.0, 0.0}, vv{0.0, 0.0, 0.0};
        for (int c = 0; c < dim; ++c) {
          uu[static_cast<std::size_t>(c)] = w_phys_[c][i];
          vv[static_cast<std::size_t>(c)] = vp[c][i];
        }
        const model::Vec r = f.jacobian_apply(uu, vv);
        for (int c = 0; c < dim; ++c) jv[c][i] = r[static_cast<std::size_t>(c)];
      }
      out -= spectral::dealias(spectral::to_spectral(jv));
    }
    if (sys_->convective()) {
      const PhysicalField vp = spectral::to_physical(v);
      out -= bilinear_advection(*w_, w_phys_, v);
      out -= bilinear_advection(v, vp, *w_);
    }
    return spectral::leray_project(std::move(out));
  }

  const PhysicalField& w_phys() const { return w_phys_; }

 private:
  const dynamics::ProjectedSystem* sys_;
  const SpectralField* w_;
  PhysicalField w_phys_;
};

/// Mean of the smallest eigenvalue of f'(w) over the grid, floored at zero.
inline double mean_linear_shift(const model::PowerLaw& f, const PhysicalField& w) {
  if (!f.enabled()) return 0.0;
  double s = 0.0;
  const std::size_t n = w.grid->size();
  for (std::size_t i = 0; i < n; ++i) {
    double m2 = 0.0;
    for (const auto& c : w.comps) m2 += c[i] * c[i];
    s += f.a() + f.b() * f.growth(std::sqrt(m2));
  }
  return std::max(0.0, s / static_cast<double>(n));
}

/// Largest eigenvalue of f'(w) over the grid, floored at zero.
inline double max_linear_shift(const model::PowerLaw& f, const PhysicalField& w) {
  if (!f.enabled()) return 0.0;
  double s = 0.0;
  const std::size_t n = w.grid->size();
  for (std::size_t i = 0; i < n; ++i) {
    double m2 = 0.0;
    for (const auto& c : w.comps) m2 += c[i] * c[i];
    const double gr = f.growth(std::sqrt(m2));
    s = std::max(s, f.a() + f.b() * std::max(1.0, f.r()) * gr);
  }
  return std::max(0.0, s);
}

/// v -> (shift + |k|^2)^{-1} v modewise, k = 0 removed.
inline SpectralField shifted_inverse(const SpectralField& v, double shift) {
  SpectralField out = v;
  const Grid& g = *v.grid;
  for (auto& comp : out.comps) {
    comp[0] = 0.0;
    for (std::size_t i = 1; i < g.size(); ++i) comp[i] /= shift + g.ksq(i);
  }
  return out;
}

inline double norm(const SpectralField& u) { return spectral::sobolev_norm(u, 0.0); }

struct IterState {
  SpectralField w;
  double residual;
  std::size_t iterations;
};

/// w <- w + (1/tau + S - A)^{-1} R(w): a linearly implicit pseudo-time step
/// with stabilization S = max eig f'(w). Its fixed points are exact
/// equilibria.
inline IterState pseudo_time(const dynamics::ProjectedSystem& sys, SpectralField w, double tol, std::size_t max_iter,
                             std::size_t start_iterations) {
  double tau = 1.0;
  SpectralField R = sys.rhs(w);
  double res = norm(R);
  double best = res;
  std::size_t it = start_iterations;
  while (res > tol) {
    if (it >= max_iter) throw NonConvergence("pseudo_time: iteration cap exceeded", best);
    const double S = max_linear_shift(sys.model(), spectral::to_physical(w));
    SpectralField trial = w;
    trial += shifted_inverse(R, 1.0 / tau + S);
    SpectralField Rt = sys.rhs(trial);
    const double rt = norm(Rt);
    ++it;
    if (!(rt <= 1.5 * res) || !std::isfinite(rt)) {
      tau *= 0.5;
      if (tau < 1e-12) throw NonConvergence("pseudo_time: step size underflow", best);
      continue;
    }
    w = std::move(trial);
    R = std::move(Rt);
    res = rt;
    best = std::min(best, res);
    if (tau < 1.0) tau = std::min(1.0, 2.0 * tau);
  }
  return {std::move(w), res, it};
}

}  // namespace detail

/// Pressure from  Lap p = div(g - D f(w) - D (w.grad)w), zero mean. On the
/// torus Lap w is divergence-free, so it drops out.
inline SpectralField recover_pressure(const SpectralField& w, const SpectralField& g, const model::PowerLaw& f,
                                      bool convective) {
  spectral::require_same_grid(w.grid, g.grid, "recover_pressure");
  const dynamics::ProjectedSystem sys(w.grid, f, convective, spectral::zeros(w.grid));
  SpectralField h = g;
  const auto pw = sys.evaluate_pointwise(w);
  if (f.enabled()) h -= spectral::dealias(pw.f_hat);
  if (convective) h -= sys.advection(w, &pw.u);
  const Grid& grid = *w.grid;
  SpectralField p(w.grid, 1);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const auto& k = grid.kderiv(i);
    double kk = 0.0;
    cplx kh = 0.0;
    for (int c = 0; c < grid.dim(); ++c) {
      kk += k[static_cast<std::size_t>(c)] * k[static_cast<std::size_t>(c)];
      kh += k[static_cast<std::size_t>(c)] * h[c][i];
    }
    // grad p = i k p_hat must equal the gradient part k (k.h)/|k|^2.
    if (kk > 0.0) p[0][i] = cplx(0.0, -1.0) * kh / kk;
  }
  p.mean_zero = true;
  return p;
}

/// |-Lap w + D f(w) + D (w.grad)w + grad p - g| in L2, assembled without
/// projection. The k = 0 mode is excluded: on the torus the mean of f(w) is
/// balanced by a uniform pressure gradient, which a periodic p cannot carry.
inline double assembled_residual(const SpectralField& w, const SpectralField& p, const SpectralField& g,
                                 const model::PowerLaw& f, bool convective) {
  const dynamics::ProjectedSystem sys(w.grid, f, convective, spectral::zeros(w.grid));
  const auto pw = sys.evaluate_pointwise(w);
  SpectralField r = spectral::apply_laplacian(w);
  r *= -1.0;
  if (f.enabled()) r += spectral::dealias(pw.f_hat);
  if (convective) r += sys.advection(w, &pw.u);
  r += spectral::gradient(p);
  r -= g;
  for (auto& comp : r.comps) comp[0] = 0.0;
  return spectral::sobolev_norm(r, 0.0);
}

inline SteadySolution solve_steady(const SpectralField& g, const model::PowerLaw& f, bool convective,
                                   const SteadyOptions& opt = {}) {
  if (!(opt.tol > 0.0)) throw ContractViolation("solve_steady: tol must be positive");
  if (convective && f.enabled() && f.r() < 2.0)
    throw ConfigError("convective steady solves require model.r >= 2", "model.r");
  const GridPtr& grid = g.grid;
  const dynamics::ProjectedSystem sys(grid, f, convective, g);
  SpectralField w = opt.initial ? spectral::dealias(spectral::leray_project(*opt.initial)) : spectral::zeros(grid);
  w.grid = grid;

  SteadySolution sol;
  sol.method = opt.method;
  if (opt.method == Method::pseudo_time) {
    auto st = detail::pseudo_time(sys, std::move(w), opt.tol, opt.max_pseudo, 0);
    sol.w = std::move(st.w);
    sol.residual = st.residual;
    sol.iterations = st.iterations;
  } else {
    SpectralField R = sys.rhs(w);
    double res = detail::norm(R);
    std::size_t it = 0;
    bool fallback = false;
    while (res > opt.tol) {
      if (it >= opt.max_newton) {
        fallback = true;
        break;
      }
      const detail::Jacobian J(sys, w);
      const double shift = detail::mean_linear_shift(f, J.w_phys());
      auto prec = [shift](const SpectralField& v) {
        SpectralField out = detail::shifted_inverse(v, shift);
        out *= -1.0;
        return out;
      };
      SpectralField rhs = R;
      rhs *= -1.0;
      SpectralField delta = spectral::zeros(grid);
      krylov::gmres(J, prec, rhs, delta, opt.inner_tol, 40, 400);
      ++it;
      bool accepted = false;
      for (double alpha = 1.0; alpha >= 1.0 / 1024.0; alpha *= 0.5) {
        SpectralField trial = w;
        trial.axpy(alpha, delta);
        SpectralField Rt = sys.rhs(trial);
        const double rt = detail::norm(Rt);
        if (std::isfinite(rt) && rt <= (1.0 - 1e-4 * alpha) * res) {
          w = std::move(trial);
          R = std::move(Rt);
          res = rt;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        fallback = true;
        break;
      }
    }
    if (fallback) {
      auto st = detail::pseudo_time(sys, std::move(w), opt.tol, opt.max_pseudo, it);
      sol.w = std::move(st.w);
      sol.residual = st.residual;
      sol.iterations = st.iterations;
      sol.method = Method::pseudo_time;
    } else {
      sol.w = std::move(w);
      sol.residual = res;
      sol.iterations = it;
    }
  }
  sol.w.divergence_free = sol.w.mean_zero = sol.w.dealiased = true;
  sol.p = recover_pressure(sol.w, g, f, convective);
  return sol;
}

// -------------------------------------------------------------------- sweep

struct SweepRow {
  double g_amplitude = 0, g_l2 = 0, g_lq = 0;
  double w_h1 = 0, w_h2 = 0, w_lr1 = 0, p_h1 = 0;
  double residual = 0;
  bool converged = true;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  /// Least-squares slope of log w_h2 against log g_l2 over the top decade.
  double slope = std::numeric_limits<double>::quiet_NaN();
  std::size_t slope_points = 0;
  /// Smallest C with w_h1^2 + w_lr1^{r+1} <= C (1 + g_lq^q) on every row.
  double energy_constant = 0.0;
};

inline constexpr const char* kSweepHeader = "g_amplitude,g_l2,g_lq,w_h1,w_h2,w_lr1,p_h1,residual";

inline void write_csv(std::ostream& os, const SweepTable& t) {
  os << kSweepHeader << '\n';
  char buf[512];
  for (const auto& r : t.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.g_amplitude, r.g_l2, r.g_lq,
                  r.w_h1, r.w_h2, r.w_lr1, r.p_h1, r.residual);
    os << buf << '\n';
  }
}

/// Least-squares slope of log(y) on log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? std::numeric_limits<double>::quiet_NaN() : (n * sxy - sx * sy) / den;
}

/// Solves for g = amplitude * g_shape over the given amplitudes, each solve
/// warm-started from the previous one.
inline SweepTable regularity_sweep(const SpectralField& g_shape, const std::vector<double>& amplitudes,
                                   const model::PowerLaw& f, bool convective, const SteadyOptions& opt = {}) {
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    if (!(amplitudes[i] >= 0.0)) throw ConfigError("sweep amplitudes must be nonnegative", "sweep.amplitudes");
    if (i > 0 && !(amplitudes[i] > amplitudes[i - 1]))
      throw ConfigError("sweep amplitudes must be increasing", "sweep.amplitudes");
  }
  SweepTable table;
  const double r1 = f.r() + 1.0;
  const double q = f.q();
  std::optional<SpectralField> warm;
  for (double amp : amplitudes) {
    SweepRow row;
    row.g_amplitude = amp;
    SpectralField g = g_shape;
    g *= amp;
    row.g_l2 = spectral::sobolev_norm(g, 0.0);
    row.g_lq = spectral::lebesgue_norm(spectral::to_physical(g), q);
    if (amp == 0.0) {
      table.rows.push_back(row);
      continue;
    }
    SteadyOptions o = opt;
    if (warm) o.initial = warm;
    try {
      const SteadySolution s = solve_steady(g, f, convective, o);
      row.w_h1 = spectral::sobolev_norm(s.w, 1.0);
      row.w_h2 = spectral::sobolev_norm(s.w, 2.0);
      row.w_lr1 = spectral::lebesgue_norm(spectral::to_physical(s.w), r1);
      row.p_h1 = spectral::sobolev_norm(s.p, 1.0);
      row.residual = s.residual;
      warm = s.w;
    } catch (const NonConvergence& e) {
      row.converged = false;
      row.residual = e.best_residual();
    }
    table.rows.push_back(row);
  }

  double top = 0.0;
  for (const auto& r : table.rows)
    if (r.converged && r.g_l2 > 0.0) top = std::max(top, r.g_l2);
  std::vector<double> xs, ys;
  for (const auto& r : table.rows) {
    if (!r.converged || r.g_l2 <= 0.0 || r.w_h2 <= 0.0) continue;
    if (r.g_l2 >= top / 10.0 * (1.0 - 1e-12)) {
      xs.push_back(r.g_l2);
      ys.push_back(r.w_h2);
    }
    const double lhs = r.w_h1 * r.w_h1 + std::pow(r.w_lr1, r1);
    table.energy_constant = std::max(table.energy_constant, lhs / (1.0 + std::pow(r.g_lq, q)));
  }
  table.slope = loglog_slope(xs, ys);
  table.slope_points = xs.size();
  return table;
}

}  // namespace bf::steady
