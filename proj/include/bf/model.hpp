#pragma once

// The Brinkman-Forchheimer nonlinearity f(u) = a u + b |u|^{r-1} u, its
// potential Phi (grad Phi = f), the structural-condition checker and the
// pointwise implicit solve u + dt f(u) = rhs.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "bf/error.hpp"

namespace bf::model {

using Vec = std::array<double, 3>;

inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

class PowerLaw {
 public:
  /// Disabled model, f == 0.
  PowerLaw() = default;

  PowerLaw(double a, double b, double r, bool enabled = true) : a_(a), b_(b), r_(r), enabled_(enabled) {
    if (!enabled) return;
    if (!std::isfinite(a)) throw ConfigError("model.a must be finite", "model.a");
    if (!(b > 0.0) || !std::isfinite(b)) throw ConfigError("model.b must be positive", "model.b");
    if (!(r >= 1.0) || !std::isfinite(r)) throw ConfigError("model.r must be >= 1", "model.r");
  }

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double r() const noexcept { return r_; }
  bool enabled() const noexcept { return enabled_; }
  /// K = max(0, -a); zero for the disabled model.
  double K() const noexcept { return enabled_ ? std::max(0.0, -a_) : 0.0; }
  double kappa() const noexcept { return b_; }
  /// Dual exponent (r+1)/r.
  double q() const noexcept { return 1.0 + 1.0 / r_; }

  /// |u|^{r-1} for a magnitude s >= 0, with 0^0 = 1.
  double growth(double s) const {
    if (r_ == 1.0) return 1.0;
    if (s == 0.0) return 0.0;
    if (r_ == 3.0) return s * s;
    if (r_ == 2.0) return s;
    return std::pow(s, r_ - 1.0);
  }

  Vec eval_f(const Vec& u) const {
    if (!enabled_) return {0.0, 0.0, 0.0};
    const double c = a_ + b_ * growth(norm(u));
    return {c * u[0], c * u[1], c * u[2]};
  }

  /// Phi(u) = a/2 |u|^2 + b/(r+1) |u|^{r+1}.
  double eval_potential(const Vec& u) const {
    if (!enabled_) return 0.0;
    const double s2 = dot(u, u);
    const double s = std::sqrt(s2);
    return 0.5 * a_ * s2 + b_ / (r_ + 1.0) * growth(s) * s2;
  }

  /// f'(u) v = a v + b|u|^{r-1} v + b(r-1)|u|^{r-3} (u.v) u, extended by
  /// continuity at u = 0.
  Vec jacobian_apply(const Vec& u, const Vec& v) const {
    if (!enabled_) return {0.0, 0.0, 0.0};
    const double s = norm(u);
    const double c = a_ + b_ * growth(s);
    Vec out{c * v[0], c * v[1], c * v[2]};
    if (r_ != 1.0 && s > 0.0) {
      const double d = b_ * (r_ - 1.0) * growth(s) / (s * s) * dot(u, v);
      for (int i = 0; i < 3; ++i) out[static_cast<std::size_t>(i)] += d * u[static_cast<std::size_t>(i)];
    }
    return out;
  }

  /// Solves u + dt f(u) = rhs. The solution is parallel to rhs; its length
  /// is the root of the increasing scalar map s -> s (1 + dt (a + b s^{r-1})).
  Vec implicit_pointwise_solve(const Vec& rhs, double dt) const {
    if (!enabled_ || dt == 0.0) return rhs;
    if (!(dt > 0.0)) throw ContractViolation("implicit_pointwise_solve: dt must be nonnegative");
    if (!(1.0 + dt * a_ > 0.0))
      throw ContractViolation("implicit_pointwise_solve: requires 1 + dt*a > 0");
    const double target = norm(rhs);
    if (!std::isfinite(target)) throw NumericalFailure("implicit_pointwise_solve: non-finite input");
    if (target == 0.0) return {0.0, 0.0, 0.0};
    const double s = solve_magnitude(target, dt);
    const double scale = s / target;
    return {scale * rhs[0], scale * rhs[1], scale * rhs[2]};
  }

  /// Root of s (1 + dt (a + b s^{r-1})) = target on [0, target / (1 + dt a)].
  double solve_magnitude(double target, double dt) const {
    const double lin = 1.0 + dt * a_;
    if (r_ == 1.0) return target / (lin + dt * b_);
    double lo = 0.0, hi = target / lin;
    auto h = [&](double s) { return s * (lin + dt * b_ * growth(s)) - target; };
    const double tol = 1e-13 * (1.0 + target);
    // Start from the smaller of the linear and the pure power-law roots.
    double s = std::min(hi, std::pow(target / (dt * b_), 1.0 / r_));
    for (int it = 0; it < 200; ++it) {
      const double val = h(s);
      if (std::abs(val) <= tol) return s;
      if (val > 0.0)
        hi = s;
      else
        lo = s;
      const double deriv = lin + dt * b_ * r_ * growth(s);
      double next = s - val / deriv;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (next == s || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return next;
      s = next;
    }
    throw NumericalFailure("implicit_pointwise_solve: root finder did not converge");
  }

 private:
  double a_ = 0.0;
  double b_ = 1.0;
  double r_ = 1.0;
  bool enabled_ = false;
};

struct ConditionReport {
  double K = 0.0;
  double kappa = 0.0;
  /// min over unit v of f'(u)v.v - (-K + kappa|u|^{r-1}), scaled by
  /// 1 + |both sides| so the rounding floor is uniform in |u|.
  double min_slack = 0.0;
  /// Smallest C with |f'(u)| <= C (1 + |u|^{r-1}) over the samples.
  double fitted_C = 0.0;
  bool pass = false;
};

/// Samples (u, v) pairs with |u| log-uniform in [1e-3, 1e3] and checks the
/// lower bound on the directional derivative plus the growth bound.
inline ConditionReport check_conditions(const PowerLaw& f, std::size_t samples, std::uint64_t seed) {
  if (samples < 1) throw ContractViolation("check_conditions: need at least one sample");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> logmag(-3.0, 3.0);
  ConditionReport rep;
  rep.K = f.K();
  rep.kappa = f.kappa();
  rep.min_slack = std::numeric_limits<double>::infinity();
  auto random_dir = [&] {
    Vec d{normal(rng), normal(rng), normal(rng)};
    const double m = norm(d);
    return Vec{d[0] / m, d[1] / m, d[2] / m};
  };
  for (std::size_t i = 0; i < samples; ++i) {
    const double mag = std::pow(10.0, logmag(rng));
    const Vec e = random_dir();
    const Vec u{mag * e[0], mag * e[1], mag * e[2]};
    const Vec v = random_dir();
    const double grow = f.growth(mag);
    const double lhs = dot(f.jacobian_apply(u, v), v);
    const double bound = -rep.K + rep.kappa * grow;
    // Slack relative to the size of the terms, so large |u| does not swamp
    // the rounding floor.
    const double scale = 1.0 + std::abs(lhs) + std::abs(bound);
    rep.min_slack = std::min(rep.min_slack, (lhs - bound) / scale);

    // f'(u) is symmetric with eigenvectors u and u-perp.
    const double par = norm(f.jacobian_apply(u, e));
    Vec perp{-e[1], e[0], 0.0};
    if (norm(perp) < 1e-8) perp = {0.0, -e[2], e[1]};
    const double pn = norm(perp);
    perp = {perp[0] / pn, perp[1] / pn, perp[2] / pn};
    const double per = norm(f.jacobian_apply(u, perp));
    rep.fitted_C = std::max(rep.fitted_C, std::max(par, per) / (1.0 + grow));
  }
  rep.pass = rep.min_slack >= -1e-12 && std::isfinite(rep.fitted_C);
  return rep;
}

}  // namespace bf::model
