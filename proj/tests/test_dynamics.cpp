#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "bf/dynamics.hpp"
#include "support.hpp"

using namespace bf;
using dynamics::ProjectedSystem;
using dynamics::Stepper;
using spectral::PhysicalField;
using spectral::SpectralField;

namespace {

SpectralField from_function(const GridPtr& g, auto fn) {
  PhysicalField p(g, g->dim());
  for (std::size_t i = 0; i < g->size(); ++i) {
    const auto v = fn(g->coordinate(i, 0), g->coordinate(i, 1));
    p[0][i] = v[0];
    p[1][i] = v[1];
  }
  return spectral::to_spectral(p);
}

double max_energy_residual(const SimConfig& cfg) {
  const auto log = dynamics::run_trajectory(cfg);
  double m = 0.0;
  for (const auto& r : log.records) m = std::max(m, std::abs(r.energy_residual));
  return m;
}

}  // namespace

TEST(Advection, ShearFlowHasNoSelfAdvection) {
  auto g = make_grid(2, 16, 2 * std::numbers::pi);
  const SpectralField u = from_function(g, [](double, double y) { return std::array{std::sin(y), 0.0}; });
  const ProjectedSystem sys(g, model::PowerLaw(), true, spectral::zeros(g));
  EXPECT_LE(test::max_coefficient(sys.advection(u)), 1e-15);
  EXPECT_EQ(test::max_coefficient(sys.advection(spectral::zeros(g))), 0.0);
}

TEST(Advection, TaylorGreenClosedForm) {
  auto g = make_grid(2, 16, 2 * std::numbers::pi);
  const SpectralField u = from_function(g, [](double x, double y) {
    return std::array{std::sin(x) * std::cos(y), -std::cos(x) * std::sin(y)};
  });
  const SpectralField expected = from_function(g, [](double x, double y) {
    return std::array{0.5 * std::sin(2 * x), 0.5 * std::sin(2 * y)};
  });
  const ProjectedSystem sys(g, model::PowerLaw(), true, spectral::zeros(g));
  EXPECT_LE(test::max_coefficient(sys.advection(u) - expected), 1e-15);
  // The self-advection of Taylor-Green is a pure gradient.
  EXPECT_LE(test::max_coefficient(sys.convective_term(u)), 1e-15);
}

TEST(Advection, SkewSymmetricOnDealiasedFields) {
  for (int dim : {2, 3}) {
    auto g = make_grid(dim, 16, 3.0);
    const ProjectedSystem sys(g, model::PowerLaw(), true, spectral::zeros(g));
    for (std::uint64_t s = 0; s < 5; ++s) {
      const SpectralField u = test::random_velocity(g, 40 + s);
      const double scale = spectral::sobolev_norm(u, 0.0) * spectral::sobolev_norm(u, 1.0);
      EXPECT_LE(std::abs(spectral::inner(sys.advection(u), u)), 1e-10 * scale);
    }
  }
}

TEST(Rhs, ZeroStateZeroForcing) {
  auto g = make_grid(2, 16, 2 * std::numbers::pi);
  for (bool conv : {false, true}) {
    const ProjectedSystem sys(g, model::PowerLaw(1, 1, 3), conv, spectral::zeros(g));
    EXPECT_EQ(test::max_coefficient(sys.rhs(spectral::zeros(g))), 0.0);
  }
}

TEST(Rhs, LinearModelIsModewise) {
  // r = 1: rhs(u) = -(|k|^2 + a + b) u + P g on every in-band mode.
  auto g = make_grid(2, 16, 2.5);
  const SpectralField gf = test::random_velocity(g, 3);
  const SpectralField u = test::random_velocity(g, 4);
  const ProjectedSystem sys(g, model::PowerLaw(0.5, 1.5, 1), false, gf);
  const SpectralField r = sys.rhs(u);
  double err = 0.0;
  for (int c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < g->size(); ++i)
      err = std::max(err, std::abs(r[c][i] - (-(g->ksq(i) + 2.0) * u[c][i] + gf[c][i])));
  EXPECT_LE(err, 1e-12 * test::max_coefficient(r));
}

TEST(Stepper, HeatKernelIsExact) {
  auto g = make_grid(2, 16, 2 * std::numbers::pi);
  const ProjectedSystem sys(g, model::PowerLaw(), false, spectral::zeros(g));
  const Lattice m{3, -2, 0};
  const SpectralField u0 = fields::single_mode(g, m, 1.0);
  const std::size_t ip = g->index_of(m);
  for (Scheme s : {Scheme::imex1, Scheme::imex2}) {
    const double dt = 0.01;
    const Stepper st(sys, s, dt);
    SpectralField u = u0;
    st.step(u);
    const double factor = std::exp(-g->ksq(ip) * dt);
    for (int c = 0; c < 2; ++c) EXPECT_NEAR(std::abs(u[c][ip] - factor * u0[c][ip]), 0.0, 1e-12);
  }
}

TEST(Stepper, LinearPowerLawImex1Factor) {
  auto g = make_grid(2, 16, 2 * std::numbers::pi);
  const double a = 0.5, b = 1.0, dt = 0.02;
  const ProjectedSystem sys(g, model::PowerLaw(a, b, 1), false, spectral::zeros(g));
  const Stepper st(sys, Scheme::imex1, dt);
  const SpectralField u0 = test::random_velocity(g, 6);
  SpectralField u = u0;
  st.step(u);
  double err = 0.0;
  for (int c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < g->size(); ++i)
      err = std::max(err, std::abs(u[c][i] - std::exp(-g->ksq(i) * dt) / (1 + dt * (a + b)) * u0[c][i]));
  EXPECT_LE(err, 1e-12 * test::max_coefficient(u0));
}

TEST(Stepper, RejectsTooNegativeA) {
  auto g = make_grid(2, 16, 2 * std::numbers::pi);
  const ProjectedSystem sys(g, model::PowerLaw(-20, 1, 3), false, spectral::zeros(g));
  EXPECT_THROW(Stepper(sys, Scheme::imex1, 0.1), ContractViolation);
}

TEST(Stepper, PreservesDivergenceMeanAndRealness) {
  for (bool conv : {false, true}) {
    auto g = make_grid(2, 16, 2 * std::numbers::pi);
    const ProjectedSystem sys(g, model::PowerLaw(-0.5, 1, 3.5), conv, test::random_velocity(g, 8));
    const Stepper st(sys, Scheme::imex2, 1e-3);
    SpectralField u = test::random_velocity(g, 9);
    for (int k = 0; k < 1000; ++k) {
      st.step(u);
      if (k % 100 == 0) {
        EXPECT_LE(spectral::divergence_defect(u), 1e-12);
        EXPECT_TRUE(spectral::has_zero_mean(u));
      }
    }
    EXPECT_LE(spectral::divergence_defect(u), 1e-12);
    EXPECT_TRUE(spectral::has_zero_mean(u));
    EXPECT_LE(spectral::conjugate_symmetry_defect(u), 1e-12);
  }
}

TEST(Trajectory, ZeroDataStaysZero) {
  SimConfig c = test::small_config();
  c.forcing.kind = ForcingKind::zero;
  c.init.kind = InitKind::zero;
  const auto log = dynamics::run_trajectory(c);
  ASSERT_EQ(log.records.size(), 21u);
  for (const auto& r : log.records) {
    EXPECT_EQ(r.l2, 0.0);
    EXPECT_EQ(r.h2, 0.0);
    EXPECT_EQ(r.dtu_l2, 0.0);
    EXPECT_EQ(r.lyapunov, 0.0);
    EXPECT_EQ(r.energy_residual, 0.0);
  }
}

TEST(Trajectory, UnforcedMonotoneModelIsDissipative) {
  SimConfig c = test::small_config();
  c.forcing.kind = ForcingKind::zero;
  c.t_end = 1.0;
  const auto log = dynamics::run_trajectory(c);
  for (std::size_t j = 1; j < log.records.size(); ++j) EXPECT_LE(log.records[j].l2, log.records[j - 1].l2);
}

TEST(Trajectory, EnergyResidualConvergesAtSchemeOrder) {
  for (Scheme s : {Scheme::imex1, Scheme::imex2}) {
    SimConfig c = test::small_config();
    c.scheme = s;
    c.dt = 2e-3;
    c.t_end = 0.5;
    c.sample_dt = 0.05;
    const double coarse = max_energy_residual(c);
    c.dt = 1e-3;
    const double fine = max_energy_residual(c);
    const double order = std::log2(coarse / fine);
    EXPECT_NEAR(order, nominal_order(s), 0.2) << to_string(s);
  }
}

TEST(Trajectory, DeterministicCsv) {
  SimConfig c = test::small_config();
  c.convective = true;
  std::ostringstream a, b;
  dynamics::RunOptions o;
  o.csv_sink = &a;
  dynamics::run_trajectory(c, o);
  o.csv_sink = &b;
  dynamics::run_trajectory(c, o);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_GT(a.str().size(), 1000u);
}

TEST(Trajectory, CflViolationThrowsAfterFlushingRows) {
  SimConfig c = test::small_config(32);
  c.convective = true;
  c.model = model::PowerLaw(0, 1, 3);
  c.init.amplitude = 50;
  c.dt = 2e-2;
  c.t_end = 1.0;
  c.sample_dt = 2e-2;
  std::ostringstream os;
  dynamics::RunOptions o;
  o.csv_sink = &os;
  EXPECT_THROW(dynamics::run_trajectory(c, o), NumericalFailure);
  const std::string out = os.str();
  EXPECT_EQ(out.rfind(dynamics::kTrajectoryHeader, 0), 0u);
  EXPECT_GE(std::count(out.begin(), out.end(), '\n'), 2);
}

TEST(Trajectory, LyapunovMatchesIndependentRecomputation) {
  SimConfig c = test::small_config();
  c.model = model::PowerLaw(-0.5, 2.0, 2.5);
  auto grid = make_grid(2, 16, c.grid.length);
  const PhysicalField gx = spectral::to_physical(fields::make_forcing(grid, c.forcing));
  std::vector<std::pair<std::size_t, SpectralField>> states;
  dynamics::RunOptions o;
  o.on_sample = [&](std::size_t step, const SpectralField& u) {
    std::stringstream ss;
    checkpoint::write(ss, u);
    states.emplace_back(step, checkpoint::read(ss));
  };
  const auto log = dynamics::run_trajectory(c, o);
  ASSERT_EQ(states.size(), log.records.size());
  for (std::size_t j = 0; j < states.size(); ++j) {
    const SpectralField& u = states[j].second;
    const PhysicalField x = spectral::to_physical(u);
    double pot = 0.0;
    for (std::size_t i = 0; i < grid->size(); ++i) {
      const double s2 = x[0][i] * x[0][i] + x[1][i] * x[1][i];
      pot += -0.25 * s2 + 2.0 / 3.5 * std::pow(s2, 1.75);
    }
    pot *= grid->volume() / static_cast<double>(grid->size());
    double gu = 0.0;
    for (int comp = 0; comp < 2; ++comp)
      for (std::size_t i = 0; i < grid->size(); ++i) gu += x[comp][i] * gx[comp][i];
    gu *= grid->volume() / static_cast<double>(grid->size());
    const double h1 = spectral::sobolev_norm(u, 1.0);
    const double L = 0.5 * h1 * h1 + pot - gu;
    EXPECT_NEAR(log.records[j].lyapunov, L, 1e-10 * (1 + std::abs(L)));
  }
}

TEST(Trajectory, LyapunovNonincreasingForGradientFlow) {
  SimConfig c = test::small_config();
  c.t_end = 1.0;
  const auto log = dynamics::run_trajectory(c);
  EXPECT_LE(log.max_lyapunov_increase, 1e-10);
  for (std::size_t j = 1; j < log.records.size(); ++j)
    EXPECT_LE(log.records[j].lyapunov, log.records[j - 1].lyapunov + 1e-10);
}
