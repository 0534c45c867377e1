#pragma once

// Projected Brinkman-Forchheimer dynamics
//   du/dt = A u - P D f(u) [- P D (u.grad)u] + P g
// on the two-thirds band (D = dealiasing truncation, P = Leray projector),
// the IMEX splitting steppers and trajectory execution with diagnostics.

#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bf/fields.hpp"
#include "bf/model.hpp"
#include "bf/sim_config.hpp"
#include "bf/spectral.hpp"

namespace bf::dynamics {

using spectral::PhysicalField;
using spectral::SpectralField;

/// Pointwise quantities of one state, sharing a single inverse transform.
struct PointwiseEval {
  PhysicalField u;
  SpectralField f_hat;           ///< coefficients of f(u(x)), unprojected
  double potential_integral = 0; ///< quadrature of Phi(u)
  double f_dot_u = 0;            ///< quadrature of f(u).u
};

class ProjectedSystem {
 public:
  /// `forcing` is projected and truncated on construction.
  ProjectedSystem(GridPtr grid, model::PowerLaw f, bool convective, const SpectralField& forcing)
      : grid_(std::move(grid)), f_(f), convective_(convective) {
    spectral::require_same_grid(grid_, forcing.grid, "ProjectedSystem");
    g_ = spectral::dealias(spectral::leray_project(forcing));
  }

  const GridPtr& grid() const noexcept { return grid_; }
  const model::PowerLaw& model() const noexcept { return f_; }
  bool convective() const noexcept { return convective_; }
  const SpectralField& forcing() const noexcept { return g_; }

  PointwiseEval evaluate_pointwise(const SpectralField& u) const {
    PointwiseEval out;
    out.u = spectral::to_physical(u);
    const Grid& g = *grid_;
    const int dim = g.dim();
    PhysicalField fx(grid_, dim);
    double pot = 0.0, fu = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      model::Vec v{0.0, 0.0, 0.0};
      for (int c = 0; c < dim; ++c) v[static_cast<std::size_t>(c)] = out.u[c][i];
      const model::Vec fv = f_.eval_f(v);
      for (int c = 0; c < dim; ++c) fx[c][i] = fv[static_cast<std::size_t>(c)];
      pot += f_.eval_potential(v);
      fu += model::dot(fv, v);
    }
    const double w = g.volume() / static_cast<double>(g.size());
    out.potential_integral = w * pot;
    out.f_dot_u = w * fu;
    out.f_hat = spectral::to_spectral(fx);
    return out;
  }

  /// D[(u.grad)u] without projection. `u_phys` may carry the physical values
  /// of u when the caller already has them.
  SpectralField advection(const SpectralField& u, const PhysicalField* u_phys = nullptr) const {
    const Grid& g = *grid_;
    const int dim = g.dim();
    PhysicalField local;
    if (u_phys == nullptr) {
      local = spectral::to_physical(u);
      u_phys = &local;
    }
    PhysicalField n(grid_, dim);
    for (int j = 0; j < dim; ++j) {
      const PhysicalField dj = spectral::to_physical(spectral::partial(u, j));
      const auto& uj = (*u_phys)[j];
      for (int c = 0; c < dim; ++c) {
        auto& nc = n[c];
        const auto& d = dj[c];
        for (std::size_t i = 0; i < g.size(); ++i) nc[i] += uj[i] * d[i];
      }
    }
    return spectral::dealias(spectral::to_spectral(n));
  }

  /// P D (u.grad)u.
  SpectralField convective_term(const SpectralField& u, const PhysicalField* u_phys = nullptr) const {
    return spectral::leray_project(advection(u, u_phys));
  }

  SpectralField rhs(const SpectralField& u) const { return rhs(u, evaluate_pointwise(u)); }

  SpectralField rhs(const SpectralField& u, const PointwiseEval& pw) const {
    SpectralField out = spectral::apply_laplacian(u);
    if (f_.enabled()) out -= spectral::dealias(spectral::leray_project(pw.f_hat));
    if (convective_) out -= convective_term(u, &pw.u);
    out += g_;
    out = spectral::leray_project(std::move(out));
    out.dealiased = true;
    if (!spectral::all_finite(out)) throw NumericalFailure("rhs: non-finite value");
    return out;
  }

  /// L(u) = 1/2 |grad u|^2 + int Phi(u) - (g, u).
  double lyapunov(const SpectralField& u, const PointwiseEval& pw) const {
    const double h1 = spectral::sobolev_norm(u, 1.0);
    return 0.5 * h1 * h1 + pw.potential_integral - spectral::inner(g_, u);
  }

  /// |grad u|^2 + (f(u), u) - (g, u): minus the rate of change of 1/2|u|^2.
  double energy_dissipation(const SpectralField& u, const PointwiseEval& pw) const {
    const double h1 = spectral::sobolev_norm(u, 1.0);
    return h1 * h1 + pw.f_dot_u - spectral::inner(g_, u);
  }

 private:
  GridPtr grid_;
  model::PowerLaw f_;
  bool convective_;
  SpectralField g_;
};

/// One IMEX splitting step.
///   imex1: L(dt) C(dt) F(dt)                  (Lie)
///   imex2: L(dt/2) C(dt/2) M(dt) C(dt/2) L(dt/2)  (Strang)
/// L: exact integrating factor for A u + P g; C: explicit convection
/// (Euler / Heun); F: pointwise implicit Euler for f followed by projection;
/// M: pointwise implicit midpoint predictor, projected, then a projected
/// f evaluation at the predictor.
class Stepper {
 public:
  Stepper(const ProjectedSystem& sys, Scheme scheme, double dt) : sys_(&sys), scheme_(scheme), dt_(dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ContractViolation("Stepper: dt must be positive");
    if (sys.model().enabled() && !(1.0 + dt * sys.model().a() > 0.0))
      throw ContractViolation("Stepper: requires 1 + dt*a > 0");
    const double tau = scheme == Scheme::imex1 ? dt : 0.5 * dt;
    const Grid& g = *sys.grid();
    decay_.resize(g.size());
    gain_.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double k2 = g.ksq(i);
      decay_[i] = std::exp(-k2 * tau);
      gain_[i] = i == 0 ? 0.0 : -std::expm1(-k2 * tau) / k2;
    }
  }

  double dt() const noexcept { return dt_; }
  Scheme scheme() const noexcept { return scheme_; }

  void step(SpectralField& u) const {
    if (sys_->convective()) check_cfl(u);
    if (scheme_ == Scheme::imex1) {
      linear(u);
      if (sys_->convective()) convect_euler(u, dt_);
      if (sys_->model().enabled()) f_implicit_euler(u, dt_);
    } else {
      linear(u);
      if (sys_->convective()) convect_heun(u, 0.5 * dt_);
      if (sys_->model().enabled()) f_midpoint(u, dt_);
      if (sys_->convective()) convect_heun(u, 0.5 * dt_);
      linear(u);
    }
    u.divergence_free = u.mean_zero = u.dealiased = true;
    if (!spectral::all_finite(u)) throw NumericalFailure("step: non-finite field");
  }

  /// dt * max|u| / (L/n); the convective substep requires this <= 0.5.
  double cfl_number(const SpectralField& u) const {
    const Grid& g = *sys_->grid();
    return dt_ * spectral::max_abs(spectral::to_physical(u)) * g.n() / g.length();
  }

 private:
  void check_cfl(const SpectralField& u) const {
    const double c = cfl_number(u);
    if (!(c <= 0.5)) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "CFL violation: dt*max|u|/dx = %.6g exceeds 0.5", c);
      throw NumericalFailure(buf);
    }
  }

  void linear(SpectralField& u) const {
    const auto& g = sys_->forcing();
    for (int c = 0; c < u.components(); ++c)
      for (std::size_t i = 0; i < decay_.size(); ++i) u[c][i] = decay_[i] * u[c][i] + gain_[i] * g[c][i];
  }

  void convect_euler(SpectralField& u, double tau) const { u.axpy(-tau, sys_->convective_term(u)); }

  void convect_heun(SpectralField& u, double tau) const {
    SpectralField u1 = u;
    u1.axpy(-tau, sys_->convective_term(u));
    SpectralField u2 = u1;
    u2.axpy(-tau, sys_->convective_term(u1));
    u += u2;
    u *= 0.5;
  }

  /// Pointwise solve v + tau f(v) = u(x).
  SpectralField prox(const SpectralField& u, double tau) const {
    PhysicalField x = spectral::to_physical(u);
    const Grid& g = *u.grid;
    const int dim = g.dim();
    const auto& f = sys_->model();
    for (std::size_t i = 0; i < g.size(); ++i) {
      model::Vec v{0.0, 0.0, 0.0};
      for (int c = 0; c < dim; ++c) v[static_cast<std::size_t>(c)] = x[c][i];
      const model::Vec s = f.implicit_pointwise_solve(v, tau);
      for (int c = 0; c < dim; ++c) x[c][i] = s[static_cast<std::size_t>(c)];
    }
    return spectral::dealias(spectral::leray_project(spectral::to_spectral(x)));
  }

  void f_implicit_euler(SpectralField& u, double tau) const { u = prox(u, tau); }

  void f_midpoint(SpectralField& u, double tau) const {
    const SpectralField mid = prox(u, 0.5 * tau);
    const PointwiseEval pw = sys_->evaluate_pointwise(mid);
    u.axpy(-tau, spectral::dealias(spectral::leray_project(pw.f_hat)));
  }

  const ProjectedSystem* sys_;
  Scheme scheme_;
  double dt_;
  std::vector<double> decay_;
  std::vector<double> gain_;
};

// ---------------------------------------------------------------- trajectory

struct DiagnosticsRecord {
  double t = 0;
  double l2 = 0, h1 = 0, h2 = 0, lr1 = 0;
  double dtu_l2 = 0, dtu_hm2 = 0;
  double lyapunov = 0;
  double energy_residual = 0;
};

inline constexpr const char* kTrajectoryHeader = "t,l2,h1,h2,lr1,dtu_l2,dtu_hm2,lyapunov,energy_residual";

inline std::string csv_row(const DiagnosticsRecord& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.t, r.l2, r.h1, r.h2,
                r.lr1, r.dtu_l2, r.dtu_hm2, r.lyapunov, r.energy_residual);
  return buf;
}

struct TrajectoryLog {
  std::string config_echo;
  std::vector<DiagnosticsRecord> records;
  /// Per record: L(t_j) - L(t_{j-1}) + int |du/dt|^2 (zero for the first
  /// record and for convective runs).
  std::vector<double> lyapunov_residual;
  /// Per record: |<(u.grad)u, u>| (convective runs only).
  std::vector<double> skew;
  /// Largest single-step increase of L (non-convective runs).
  double max_lyapunov_increase = 0;
  double max_divergence_defect = 0;
  SpectralField final_state;
};

inline void write_csv(std::ostream& os, const TrajectoryLog& log) {
  os << kTrajectoryHeader << '\n';
  for (const auto& r : log.records) os << csv_row(r) << '\n';
}

struct RunOptions {
  /// Explicit sample steps (sorted); empty means every sample_dt.
  std::vector<std::size_t> sample_steps;
  /// Receives the CSV header and each record as it is produced.
  std::ostream* csv_sink = nullptr;
  /// Called with each sampled state.
  std::function<void(std::size_t step, const SpectralField&)> on_sample;
  std::optional<SpectralField> initial;
  std::optional<SpectralField> forcing;
  /// Evaluate the energy and Lyapunov integrands after every step.
  bool track_steps = true;
};

/// Number of whole steps in `span`, requiring span to be a multiple of dt.
inline std::size_t whole_steps(double span, double dt, const char* what) {
  const double ratio = span / dt;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
    throw ConfigError(std::string(what) + " must be a positive multiple of dt", what);
  return static_cast<std::size_t>(rounded);
}

inline std::vector<std::size_t> default_sample_steps(const SimConfig& cfg) {
  const std::size_t total = whole_steps(cfg.t_end, cfg.dt, "t_end");
  const std::size_t every = whole_steps(cfg.sample_dt, cfg.dt, "sample_dt");
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s <= total; s += every) out.push_back(s);
  if (out.back() != total) out.push_back(total);
  return out;
}

inline TrajectoryLog run_trajectory(const SimConfig& cfg, const RunOptions& opt = {}) {
  auto grid = make_grid(cfg.grid.dim, cfg.grid.n, cfg.grid.length);
  SpectralField g = opt.forcing ? *opt.forcing : fields::make_forcing(grid, cfg.forcing);
  SpectralField u = opt.initial ? *opt.initial : fields::make_initial(grid, cfg.init);
  g.grid = grid;
  u.grid = grid;
  u = spectral::dealias(spectral::leray_project(std::move(u)));

  const ProjectedSystem sys(grid, cfg.model, cfg.convective, g);
  const Stepper stepper(sys, cfg.scheme, cfg.dt);
  const std::vector<std::size_t> samples = opt.sample_steps.empty() ? default_sample_steps(cfg) : opt.sample_steps;
  const std::size_t total = samples.back();
  const double r1 = cfg.model.r() + 1.0;
  const bool gradient = !cfg.convective;

  TrajectoryLog log;
  if (opt.csv_sink) *opt.csv_sink << kTrajectoryHeader << '\n' << std::flush;

  double energy_integral = 0.0, dissipation_integral = 0.0;
  double prev_D = 0.0, prev_rate = 0.0, prev_L = 0.0;
  double last_l2sq = 0.0, last_L = 0.0;
  std::size_t next = 0;

  auto per_step = [&](const PointwiseEval& pw, double& D, double& rate, double& L) {
    D = sys.energy_dissipation(u, pw);
    if (gradient) {
      const double d = spectral::sobolev_norm(sys.rhs(u, pw), 0.0);
      rate = d * d;
      L = sys.lyapunov(u, pw);
    }
  };

  for (std::size_t step = 0;; ++step) {
    const bool sample = next < samples.size() && samples[next] == step;
    if (opt.track_steps || sample) {
      const PointwiseEval pw = sys.evaluate_pointwise(u);
      double D = 0.0, rate = 0.0, L = 0.0;
      if (opt.track_steps) {
        per_step(pw, D, rate, L);
        if (step > 0) {
          energy_integral += 0.5 * cfg.dt * (prev_D + D);
          dissipation_integral += 0.5 * cfg.dt * (prev_rate + rate);
          if (gradient) log.max_lyapunov_increase = std::max(log.max_lyapunov_increase, L - prev_L);
        }
        prev_D = D;
        prev_rate = rate;
        prev_L = L;
      }
      if (sample) {
        DiagnosticsRecord rec;
        rec.t = static_cast<double>(step) * cfg.dt;
        rec.l2 = spectral::sobolev_norm(u, 0.0);
        rec.h1 = spectral::sobolev_norm(u, 1.0);
        rec.h2 = spectral::sobolev_norm(u, 2.0);
        rec.lr1 = spectral::lebesgue_norm(pw.u, r1);
        const SpectralField du = sys.rhs(u, pw);
        rec.dtu_l2 = spectral::sobolev_norm(du, 0.0);
        rec.dtu_hm2 = spectral::sobolev_norm(du, -2.0);
        rec.lyapunov = sys.lyapunov(u, pw);
        double lres = 0.0;
        if (!log.records.empty()) {
          rec.energy_residual = 0.5 * (rec.l2 * rec.l2 - last_l2sq) + energy_integral;
          if (gradient) lres = rec.lyapunov - last_L + dissipation_integral;
        }
        energy_integral = dissipation_integral = 0.0;
        last_l2sq = rec.l2 * rec.l2;
        last_L = rec.lyapunov;
        log.records.push_back(rec);
        log.lyapunov_residual.push_back(lres);
        if (cfg.convective) log.skew.push_back(std::abs(spectral::inner(sys.advection(u, &pw.u), u)));
        log.max_divergence_defect = std::max(log.max_divergence_defect, spectral::divergence_defect(u));
        if (opt.csv_sink) *opt.csv_sink << csv_row(rec) << '\n' << std::flush;
        if (opt.on_sample) opt.on_sample(step, u);
        ++next;
      }
    }
    if (step == total) break;
    stepper.step(u);
  }
  log.final_state = std::move(u);
  return log;
}

}  // namespace bf::dynamics
