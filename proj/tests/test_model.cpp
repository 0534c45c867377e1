#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bf/model.hpp"

using namespace bf;
using model::PowerLaw;
using model::Vec;

namespace {

Vec random_vec(std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> normal;
  return {scale * normal(rng), scale * normal(rng), scale * normal(rng)};
}

Vec sub(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

}  // namespace

TEST(PowerLaw, EvalExamples) {
  EXPECT_EQ(PowerLaw(1, 2, 3).eval_f({0, 0, 0}), (Vec{0, 0, 0}));
  const Vec f1 = PowerLaw(1, 2, 3).eval_f({1, 0, 0});
  EXPECT_DOUBLE_EQ(f1[0], 3.0);
  EXPECT_EQ(f1[1], 0.0);
  const Vec f2 = PowerLaw(0, 1, 2).eval_f({0, 3, 4});
  EXPECT_DOUBLE_EQ(f2[1], 15.0);
  EXPECT_DOUBLE_EQ(f2[2], 20.0);
  EXPECT_EQ(PowerLaw().eval_f({1, 2, 3}), (Vec{0, 0, 0}));
}

TEST(PowerLaw, DerivedConstants) {
  const PowerLaw f(-1.5, 2.0, 3.0);
  EXPECT_EQ(f.K(), 1.5);
  EXPECT_EQ(f.kappa(), 2.0);
  EXPECT_DOUBLE_EQ(f.q(), 4.0 / 3.0);
  EXPECT_EQ(PowerLaw(0.5, 1, 2).K(), 0.0);
}

TEST(PowerLaw, PotentialExamplesAndGradient) {
  EXPECT_EQ(PowerLaw(1, 2, 3).eval_potential({0, 0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(PowerLaw(0, 1, 3).eval_potential({0, 1, 0}), 0.25);

  std::mt19937_64 rng(3);
  const double h = 1e-4;
  for (const PowerLaw& f : {PowerLaw(1, 2, 3), PowerLaw(-0.5, 1, 2.5), PowerLaw(0, 1, 1), PowerLaw(0.3, 0.7, 4)}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Vec u = random_vec(rng, 1.0);
      const Vec fu = f.eval_f(u);
      for (int i = 0; i < 3; ++i) {
        Vec up = u, um = u;
        up[static_cast<std::size_t>(i)] += h;
        um[static_cast<std::size_t>(i)] -= h;
        const double fd = (f.eval_potential(up) - f.eval_potential(um)) / (2 * h);
        EXPECT_NEAR(fd, fu[static_cast<std::size_t>(i)], 1e-6 * (1 + std::abs(fd)));
      }
    }
  }
}

TEST(PowerLaw, ConstructionRejectsBadParameters) {
  try {
    PowerLaw(0, -1, 3);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "model.b");
    EXPECT_STREQ(e.what(), "model.b must be positive");
  }
  EXPECT_THROW(PowerLaw(0, 1, 0.5), ConfigError);
  EXPECT_THROW(PowerLaw(NAN, 1, 3), ConfigError);
  EXPECT_NO_THROW(PowerLaw(0, -1, 3, false));
}

TEST(Conditions, Examples) {
  const auto rep = model::check_conditions(PowerLaw(-1, 1, 3), 10000, 1);
  EXPECT_EQ(rep.K, 1.0);
  EXPECT_EQ(rep.kappa, 1.0);
  EXPECT_TRUE(rep.pass);
  EXPECT_GE(rep.min_slack, -1e-12);

  const auto lin = model::check_conditions(PowerLaw(0, 1, 1), 1000, 2);
  EXPECT_EQ(lin.K, 0.0);
  EXPECT_TRUE(lin.pass);

  for (double r : {1.5, 2.0, 4.0, 6.5}) EXPECT_TRUE(model::check_conditions(PowerLaw(0.2, 3, r), 2000, 4).pass);
}

TEST(Jacobian, MatchesFiniteDifferences) {
  std::mt19937_64 rng(8);
  const double h = 1e-6;
  for (const PowerLaw& f : {PowerLaw(1, 2, 3), PowerLaw(-0.5, 1, 2.5), PowerLaw(0.3, 0.7, 4)})
    for (int trial = 0; trial < 20; ++trial) {
      const Vec u = random_vec(rng, 1.0), v = random_vec(rng, 1.0);
      Vec up = u, um = u;
      for (std::size_t i = 0; i < 3; ++i) {
        up[i] += h * v[i];
        um[i] -= h * v[i];
      }
      const Vec fp = f.eval_f(up), fm = f.eval_f(um), j = f.jacobian_apply(u, v);
      for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR((fp[i] - fm[i]) / (2 * h), j[i], 1e-6 * (1 + std::abs(j[i])));
    }
}

TEST(Monotonicity, SignIdentityAndStrongMonotonicity) {
  std::mt19937_64 rng(5);
  for (const PowerLaw& f : {PowerLaw(0, 1, 3), PowerLaw(-1, 1, 3), PowerLaw(0.5, 2, 1.5)})
    for (int trial = 0; trial < 200; ++trial) {
      const Vec u = random_vec(rng, 2.0), v = random_vec(rng, 2.0);
      // (f(u) - f(v)).(u - v) >= -K |u - v|^2.
      const Vec d = sub(u, v);
      const double lhs = model::dot(sub(f.eval_f(u), f.eval_f(v)), d);
      EXPECT_GE(lhs, -f.K() * model::dot(d, d) - 1e-12 * (1 + std::abs(lhs)));
      // f(u).u = a|u|^2 + b|u|^{r+1}.
      const double s = model::norm(u);
      EXPECT_NEAR(model::dot(f.eval_f(u), u), f.a() * s * s + f.b() * std::pow(s, f.r() + 1),
                  1e-12 * (1 + std::pow(s, f.r() + 1)));
    }
}

TEST(ImplicitSolve, Examples) {
  const PowerLaw f(0, 1, 3);
  // s + s^3 = 2 has the root s = 1.
  const Vec u = f.implicit_pointwise_solve({2, 0, 0}, 1.0);
  EXPECT_NEAR(u[0], 1.0, 1e-14);
  EXPECT_EQ(f.implicit_pointwise_solve({1, 2, 3}, 0.0), (Vec{1, 2, 3}));
  EXPECT_EQ(f.implicit_pointwise_solve({0, 0, 0}, 0.1), (Vec{0, 0, 0}));
  EXPECT_THROW(PowerLaw(-2, 1, 3).implicit_pointwise_solve({1, 0, 0}, 0.5), ContractViolation);
}

TEST(ImplicitSolve, ResidualAndNonExpansive) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> logscale(-4, 4);
  for (const PowerLaw& f : {PowerLaw(0, 1, 3), PowerLaw(1, 2, 2.5), PowerLaw(0, 1, 1), PowerLaw(-0.5, 1, 4)})
    for (int trial = 0; trial < 300; ++trial) {
      const double dt = std::pow(10.0, logscale(rng) / 2 - 1);
      if (!(1 + dt * f.a() > 0)) continue;
      const Vec rhs = random_vec(rng, std::pow(10.0, logscale(rng)));
      const Vec u = f.implicit_pointwise_solve(rhs, dt);
      const Vec fu = f.eval_f(u);
      double res = 0, scale = 0;
      for (std::size_t i = 0; i < 3; ++i) {
        res = std::max(res, std::abs(u[i] + dt * fu[i] - rhs[i]));
        scale = std::max(scale, std::abs(rhs[i]));
      }
      EXPECT_LE(res, 1e-12 * (1 + scale));
      // For K = 0 the resolvent is non-expansive.
      if (f.K() == 0.0) {
        const Vec rhs2 = random_vec(rng, 1.0);
        const Vec u2 = f.implicit_pointwise_solve(rhs2, dt);
        EXPECT_LE(model::norm(sub(u, u2)), model::norm(sub(rhs, rhs2)) * (1 + 1e-12));
      }
    }
}

TEST(Growth, Conventions) {
  EXPECT_EQ(PowerLaw(0, 1, 1).growth(0.0), 1.0);
  EXPECT_EQ(PowerLaw(0, 1, 3).growth(0.0), 0.0);
  EXPECT_DOUBLE_EQ(PowerLaw(0, 1, 2.5).growth(4.0), 8.0);
}
