#include <cmath>

#include <gtest/gtest.h>

#include "mjr/models.hpp"
#include "mjr/periodic.hpp"
#include "mjr/resetting.hpp"
#include "mjr/sim.hpp"

namespace {

const mjr::SolverConfig kTight = mjr::SolverConfig::adaptive(1e-11, 1e-13);

TEST(Periodic, StationaryTwoStateConstants) {
  const auto c = mjr::solve_periodic(mjr::stationary_two_state(), kTight, 64);
  EXPECT_NEAR(c.alpha, 0.5, 1e-10);
  EXPECT_NEAR(c.sigma2, 0.25, 1e-6);
  EXPECT_NEAR(c.pi0[0], 0.5, 1e-10);
}

TEST(Periodic, AsymmetricStationaryFormula) {
  const double a = 2.0, b = 0.5, r0 = 3.0, r1 = 1.0;
  const auto c = mjr::solve_periodic(mjr::stationary_two_state(a, b, r0, r1), kTight, 64);
  EXPECT_NEAR(c.alpha, (b * r0 + a * r1) / (a + b), 1e-10);
  EXPECT_NEAR(c.sigma2, 2.0 * a * b * (r0 - r1) * (r0 - r1) / std::pow(a + b, 3), 1e-8);
}

TEST(Periodic, InvariantsOnPeriodicModel) {
  const auto m = mjr::periodic_two_state();
  const auto c = mjr::solve_periodic(m, kTight, 256);
  EXPECT_LT(c.seam_residual, 1e-7);
  EXPECT_LT(c.fredholm_residual, 1e-9);
  EXPECT_LT(c.rho_return_residual, 1e-7);
  double pik = 0.0;
  for (std::size_t x = 0; x < c.k.size(); ++x) pik += c.pi0[x] * c.k[x];
  EXPECT_NEAR(pik, 0.0, 1e-12);
  // pi0 is stationary for P(0, 1).
  for (int y = 0; y < 2; ++y) {
    double acc = 0.0;
    for (int x = 0; x < 2; ++x) acc += c.pi0[x] * c.p_to_end.front()[x * 2 + y];
    EXPECT_NEAR(acc, c.pi0[y], 1e-9);
  }
  // rho from the joint solve matches m - alpha (1 - t) + P(t, 1) k on the grid.
  for (std::size_t i = 0; i < c.grid.size(); i += 32) {
    for (int x = 0; x < 2; ++x) {
      double pk = 0.0;
      for (int y = 0; y < 2; ++y) pk += c.p_to_end[i][x * 2 + y] * c.k[y];
      EXPECT_NEAR(c.rho[i][x], c.m[i][x] - c.alpha * (1.0 - c.grid[i]) + pk, 1e-8);
    }
  }
  // alpha is the one-period mean from pi0.
  const auto one = mjr::solve_moments_window(m, 0.0, 1.0, c.pi0, kTight);
  EXPECT_NEAR(one.mean(), c.alpha, 1e-8);
}

TEST(Periodic, LongHorizonCrossChecks) {
  const auto m = mjr::periodic_two_state();
  const auto c = mjr::solve_periodic(m, kTight, 256);
  const double e16 = mjr::solve_moments(m, 16.0, kTight).mean();
  const double e32 = mjr::solve_moments(m, 32.0, kTight).mean();
  EXPECT_NEAR((e32 - e16) / 16.0, c.alpha, 1e-4 * c.alpha);
  const double v = mjr::solve_moments(m, 256.0, kTight).variance();
  EXPECT_NEAR(v / 256.0, c.sigma2, 0.05 * c.sigma2);
}

TEST(Periodic, RescaledPeriodMatchesDirect) {
  // The stationary chain is periodic with any period.
  auto m = mjr::stationary_two_state(2.0, 0.5, 3.0, 1.0);
  m.period = 2.5;
  const auto c = mjr::solve_periodic(m, kTight, 64);
  EXPECT_NEAR(c.alpha, (0.5 * 3.0 + 2.0 * 1.0) / 2.5, 1e-9);
  EXPECT_NEAR(c.sigma2, 2.0 * 2.0 * 0.5 * 4.0 / std::pow(2.5, 3), 1e-7);
}

TEST(Periodic, RequiresDeclaredPeriod) {
  EXPECT_THROW(mjr::solve_periodic(mjr::prendiville_example(), kTight, 16), mjr::ValidationError);
}

TEST(Periodic, CltApprox) {
  mjr::PeriodicConstants c;
  c.alpha = 0.5;
  c.sigma2 = 0.25;
  EXPECT_DOUBLE_EQ(mjr::periodic_clt_approx(c, 100.0, 50.0), 0.5);
  EXPECT_NEAR(mjr::periodic_clt_approx(c, 100.0, 50.0 + 1.959964 * 0.5 * 10.0), 0.975, 1e-7);
  EXPECT_EQ(mjr::periodic_clt_approx(c, 100.0, -INFINITY), 0.0);
  c.sigma2 = 0.0;
  EXPECT_THROW(mjr::periodic_clt_approx(c, 1.0, 0.0), mjr::DomainError);
}

TEST(Resetting, IdenticalPeriodsScale) {
  const auto m = mjr::stationary_two_state(1.0, 2.0, 1.0, 0.0);
  const auto r = mjr::solve_resetting(m, {{{1.0, 0.0}}, 5}, kTight);
  ASSERT_EQ(r.rows.size(), 5u);
  EXPECT_NEAR(r.mean(), 5.0 * r.rows[0].mean, 1e-12);
  EXPECT_NEAR(r.variance(), 5.0 * r.rows[0].variance, 1e-12);
}

TEST(Resetting, ZeroRewards) {
  const auto r = mjr::solve_resetting(mjr::stationary_two_state(1.0, 1.0, 0.0, 0.0), {{{0.5, 0.5}}, 3}, kTight);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.mean, 0.0);
    EXPECT_EQ(row.variance, 0.0);
  }
  EXPECT_EQ(r.warnings.size(), 3u);
}

TEST(Resetting, SinglePeriodEqualsPlainSolve) {
  const auto m = mjr::periodic_two_state();
  const auto r = mjr::solve_resetting(m, {{{1.0, 0.0}}, 1}, kTight);
  const auto s = mjr::solve_moments(m, 1.0, kTight);
  EXPECT_EQ(r.mean(), s.mean());
  EXPECT_EQ(r.variance(), s.variance());
}

TEST(Resetting, AdditivityIsExact) {
  const auto m = mjr::periodic_two_state();
  const auto r = mjr::solve_resetting(m, {{{1.0, 0.0}, {0.3, 0.7}}, 8}, kTight);
  double sm = 0.0, sv = 0.0;
  for (const auto& row : r.rows) {
    sm += row.mean;
    sv += row.variance;
  }
  EXPECT_EQ(sm, r.mean());
  EXPECT_EQ(sv, r.variance());
}

TEST(Resetting, MatchesResettingSimulation) {
  const auto m = mjr::periodic_two_state();
  const auto r = mjr::solve_resetting(m, {{{1.0, 0.0}}, 4}, kTight);
  const mjr::Simulator sim(m, 4.0, mjr::ResetLaws{{{1.0, 0.0}}});
  const auto st = mjr::monte_carlo(sim, 5000, 99, mjr::default_workers());
  EXPECT_NEAR(st.mean, r.mean(), 3.0 * st.se_mean);
  EXPECT_NEAR(st.variance, r.variance(), 3.0 * st.se_variance);
}

}  // namespace
