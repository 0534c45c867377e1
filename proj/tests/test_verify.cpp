#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bf/steady.hpp"
#include "bf/verify.hpp"
#include "support.hpp"

using namespace bf;
using spectral::SpectralField;
using verify::ReducedSystem;

namespace {

const verify::Check* find_check(const verify::VerdictReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

double fitted(const verify::VerdictReport& r, const std::string& name) {
  for (const auto& [k, v] : r.fitted)
    if (k == name) return v;
  return std::nan("");
}

}  // namespace

TEST(Reduced, SingleModeHeatRhsIsExact) {
  auto g = make_grid(2, 8, 2 * std::numbers::pi);
  const ReducedSystem sys({{1, 2, 0}}, 2, g->length(), model::PowerLaw(), false, spectral::zeros(g), 8);
  ASSERT_EQ(sys.dimension(), 2u);
  const ReducedSystem::State x{0.3, -0.7};
  ReducedSystem::State dx;
  sys(x, dx, 0.0);
  EXPECT_EQ(dx[0], -5.0 * 0.3);
  EXPECT_EQ(dx[1], -5.0 * -0.7);
}

TEST(Reduced, SingleModeHeatDecayMatchesExactSolution) {
  const double L = 3.0;
  auto g = make_grid(3, 8, L);
  const ReducedSystem sys({{1, 1, 0}}, 3, L, model::PowerLaw(), false, spectral::zeros(g), 8);
  const double ksq = 2.0 * std::pow(2 * std::numbers::pi / L, 2);
  const ReducedSystem::State x0{1.0, 0.5, -0.25, 2.0};
  const auto xs = verify::integrate_reference(sys, x0, {0.0, 1.0}, 1e-10);
  ASSERT_EQ(xs.size(), 2u);
  for (std::size_t i = 0; i < x0.size(); ++i) EXPECT_NEAR(xs[1][i], x0[i] * std::exp(-ksq), 1e-9);
}

TEST(Reduced, MatchesPseudoSpectralRhsOnTheBand) {
  for (bool conv : {false, true}) {
    auto g = make_grid(2, 8, 2.5);
    const model::PowerLaw f(0.5, 1.0, 3.0);
    const SpectralField gf = test::random_velocity(g, 1);
    const SpectralField u = test::random_velocity(g, 2);
    const ReducedSystem red = verify::build_reduced(*g, f, conv, gf, 8);
    ReducedSystem::State dx;
    red(red.coefficients_of(u), dx, 0.0);
    const dynamics::ProjectedSystem sys(g, f, conv, gf);
    const SpectralField r = sys.rhs(u);
    const SpectralField back = red.to_field(dx, g);
    EXPECT_LE(test::max_coefficient(back - r), 1e-12 * test::max_coefficient(r)) << "convective " << conv;
  }
}

TEST(Reduced, DimensionCap) {
  auto g = make_grid(2, 32, 2 * std::numbers::pi);
  EXPECT_THROW(verify::build_reduced(*g, model::PowerLaw(0, 1, 3), false, spectral::zeros(g), 32),
               ContractViolation);
  SimConfig c = test::small_config(32);
  EXPECT_THROW(verify::oracle_check(c), ConfigError);
}

TEST(Oracle, Imex1IsFirstOrder) {
  SimConfig c = test::small_config(8);
  c.scheme = Scheme::imex1;
  c.t_end = 0.5;
  const auto rep = verify::oracle_check(c);
  EXPECT_TRUE(rep.pass()) << rep.to_json().dump(2);
  EXPECT_NEAR(fitted(rep, "order_1"), 1.0, 0.2);
  EXPECT_NEAR(fitted(rep, "order_2"), 1.0, 0.2);
}

TEST(Lipschitz, ZeroPerturbationGivesZeroSeparation) {
  SimConfig c = test::small_config();
  verify::VerifyOptions vo;
  vo.perturbation_amplitude = 0.0;
  const auto rep = verify::verify_lipschitz(c, vo);
  ASSERT_NE(find_check(rep, "zero_perturbation_separation"), nullptr);
  EXPECT_TRUE(rep.pass());
}

TEST(Lipschitz, SeparationIsScaleCovariant) {
  SimConfig c = test::small_config();
  auto grid = make_grid(2, 16, c.grid.length);
  verify::VerifyOptions vo;
  const SpectralField delta = verify::detail::perturbation(grid, vo);
  const auto full = verify::detail::pair_run(c, delta);
  const auto half = verify::detail::pair_run(c, 0.5 * delta);
  ASSERT_EQ(full.sep.size(), half.sep.size());
  for (std::size_t j = 0; j < full.sep.size(); ++j) EXPECT_NEAR(half.sep[j] / full.sep[j], 0.5, 0.5e-3);
}

TEST(Lipschitz, MonotoneModelContracts) {
  SimConfig c = test::small_config();
  c.t_end = 1.0;
  const auto rep = verify::verify_lipschitz(c);
  EXPECT_TRUE(rep.pass()) << rep.to_json().dump(2);
  EXPECT_GE(fitted(rep, "separation_rate"), 1.0 * (1 - 1e-2));
}

TEST(Lipschitz, LinearModelHasExactRate) {
  SimConfig c = test::small_config();
  c.model = model::PowerLaw(0.5, 1.0, 1.0);
  c.t_end = 1.0;
  verify::VerifyOptions vo;
  vo.perturbation = verify::PerturbationKind::lowest_shell;
  const auto rep = verify::verify_lipschitz(c, vo);
  EXPECT_TRUE(rep.pass()) << rep.to_json().dump(2);
  EXPECT_NEAR(fitted(rep, "linear_rate"), 2.5, 2.5e-3);
}

TEST(NegativeNorm, ZeroDataGivesZeroWindows) {
  SimConfig c = test::small_config();
  c.forcing.kind = ForcingKind::zero;
  c.init.kind = InitKind::zero;
  c.dt = 1e-2;
  c.t_end = 3.0;
  c.sample_dt = 0.1;
  const auto rep = verify::verify_negative_norm(c);
  EXPECT_TRUE(rep.pass());
  EXPECT_EQ(fitted(rep, "max_window"), 0.0);
  EXPECT_EQ(rep.evidence.front().csv, "window,t_start,integral\n0,0,0\n1,1,0\n2,2,0\n");
}

TEST(NegativeNorm, SingleModeWeight) {
  auto g = make_grid(2, 16, 2.0);
  const SpectralField v = fields::single_mode(g, {2, 1, 0}, 0.8);
  const double ksq = g->ksq(g->index_of({2, 1, 0}));
  EXPECT_NEAR(spectral::sobolev_norm(v, -2.0), spectral::sobolev_norm(v, 0.0) / ksq, 1e-15);
}

TEST(NegativeNorm, RequiresTwoWindows) {
  SimConfig c = test::small_config();
  c.t_end = 1.0;
  EXPECT_THROW(verify::verify_negative_norm(c), ConfigError);
}

TEST(Lyapunov, EquilibriumStaysPut) {
  SimConfig c = test::small_config();
  c.t_end = 0.5;
  auto grid = make_grid(2, 16, c.grid.length);
  const SpectralField g = fields::make_forcing(grid, c.forcing);
  steady::SteadyOptions so;
  so.tol = 1e-12;
  const auto w = steady::solve_steady(g, c.model, false, so);
  dynamics::RunOptions o;
  o.initial = w.w;
  std::vector<double> drift;
  for (double dt : {1e-3, 5e-4}) {
    c.dt = dt;
    const auto log = dynamics::run_trajectory(c, o);
    const double L0 = log.records.front().lyapunov;
    EXPECT_LE(log.records.front().dtu_l2, 1e-11);
    for (const auto& r : log.records) {
      EXPECT_NEAR(r.lyapunov, L0, 1e-10 * (1 + std::abs(L0)));
      EXPECT_LE(r.dtu_l2, 1e-6);
    }
    drift.push_back(log.records.back().dtu_l2);
  }
  // The split scheme's fixed point sits O(dt^2) away from the exact one.
  EXPECT_NEAR(std::log2(drift[0] / drift[1]), 2.0, 0.2);
}

TEST(Lyapunov, StrictlyDecreasingBeforePlateau) {
  SimConfig c = test::small_config();
  c.t_end = 0.5;
  const auto log = dynamics::run_trajectory(c);
  for (std::size_t j = 1; j < log.records.size(); ++j)
    if (log.records[j - 1].dtu_l2 > 1e-3) EXPECT_LT(log.records[j].lyapunov, log.records[j - 1].lyapunov);
}

TEST(Smoothing, SmoothDataHasBoundedInitialRate) {
  SimConfig c = test::small_config();
  c.t_end = 0.1;
  auto grid = make_grid(2, 16, c.grid.length);
  const SpectralField u0 = fields::make_initial(grid, c.init);
  const SpectralField g = fields::make_forcing(grid, c.forcing);
  const dynamics::ProjectedSystem sys(grid, c.model, false, g);
  const auto pw = sys.evaluate_pointwise(u0);
  // |P(Lap u - f(u) + g)| <= |u|_{H2} + |f(u)| + |g|.
  const double bound = spectral::sobolev_norm(u0, 2.0) + spectral::sobolev_norm(pw.f_hat, 0.0) +
                       spectral::sobolev_norm(g, 0.0);
  const auto log = dynamics::run_trajectory(c);
  EXPECT_TRUE(std::isfinite(log.records.front().dtu_l2));
  EXPECT_LE(log.records.front().dtu_l2, bound);
}

TEST(Smoothing, UnforcedRateDecaysMonotonically) {
  SimConfig c = test::small_config();
  c.forcing.kind = ForcingKind::zero;
  c.t_end = 3.0;
  c.sample_dt = 0.05;
  const auto log = dynamics::run_trajectory(c);
  for (std::size_t j = 1; j < log.records.size(); ++j)
    if (log.records[j].t >= 0.5) EXPECT_LT(log.records[j].dtu_l2, log.records[j - 1].dtu_l2);
  EXPECT_LE(log.records.back().dtu_l2, 1e-3 * log.records.front().dtu_l2);
}

TEST(Smoothing, RequiresBurnInInsideRun) {
  SimConfig c = test::small_config();
  c.t_end = 0.5;
  EXPECT_THROW(verify::verify_smoothing(c), ConfigError);
  c.convective = true;
  EXPECT_THROW(verify::verify_smoothing(c), ConfigError);
}

TEST(Convective, PreconditionsAreConfigErrors) {
  SimConfig c = test::small_config();
  EXPECT_THROW(verify::verify_convective(c), ConfigError);
  c.convective = true;
  c.model = model::PowerLaw(0, 1, 2);
  EXPECT_THROW(verify::verify_convective(c), ConfigError);
  EXPECT_THROW(verify::verify_lyapunov(c), ConfigError);
  EXPECT_THROW(verify::verify_negative_norm(c), ConfigError);
}

TEST(Convective, ZeroPerturbationGivesZeroSeparation) {
  SimConfig c = test::small_config();
  c.convective = true;
  c.model = model::PowerLaw(0, 1, 4);
  c.t_end = 0.1;
  verify::VerifyOptions vo;
  vo.perturbation_amplitude = 0.0;
  vo.burn_in = 0.05;
  const auto rep = verify::verify_convective(c, vo);
  ASSERT_NE(find_check(rep, "zero_perturbation_separation"), nullptr);
  EXPECT_TRUE(find_check(rep, "zero_perturbation_separation")->pass);
  EXPECT_TRUE(find_check(rep, "skew_symmetry")->pass);
}

TEST(Convective, BlowupIsRecordedAsFailure) {
  SimConfig c = test::small_config(32);
  c.convective = true;
  c.model = model::PowerLaw(0, 1, 4);
  c.init.amplitude = 50;
  c.dt = 2e-2;
  c.sample_dt = 2e-2;
  c.t_end = 1.0;
  const auto rep = verify::verify_convective(c);
  EXPECT_FALSE(rep.pass());
  ASSERT_NE(find_check(rep, "no_blowup"), nullptr);
  EXPECT_NE(rep.diagnostics.find("CFL"), std::string::npos);
}

TEST(Report, DeterministicAcrossRuns) {
  SimConfig c = test::small_config();
  const auto a = verify::verify_lipschitz(c), b = verify::verify_lipschitz(c);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  ASSERT_EQ(a.evidence.size(), b.evidence.size());
  for (std::size_t i = 0; i < a.evidence.size(); ++i) EXPECT_EQ(a.evidence[i].csv, b.evidence[i].csv);
}

TEST(Report, CheckSemantics) {
  verify::VerdictReport r;
  EXPECT_FALSE(r.pass());
  r.check_le("a", 1.0, 1.0);
  EXPECT_TRUE(r.pass());
  r.check_ge("b", std::nan(""), 0.0);
  EXPECT_FALSE(r.pass());
  const auto j = r.to_json();
  EXPECT_EQ(j["checks"].size(), 2u);
  EXPECT_FALSE(j["pass"].get<bool>());
}
