#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "mjr/models.hpp"
#include "mjr/moments.hpp"
#include "mjr/transition.hpp"

namespace {

using mjr::Method;
using mjr::SolverConfig;

const SolverConfig kTight = SolverConfig::adaptive(1e-11, 1e-13);

TEST(EffectiveRate, NoLumps) {
  mjr::ModelSpec m = mjr::stationary_two_state();
  m.rewards.rate = {mjr::TimeFunction("x + 1"), mjr::TimeFunction("x + 1")};
  EXPECT_DOUBLE_EQ(mjr::effective_rate(m, 0.3, 0), 1.0);
  EXPECT_DOUBLE_EQ(mjr::effective_rate(m, 0.3, 1), 2.0);
}

mjr::ModelSpec jump_reward_two_state() {
  mjr::ModelSpec m = mjr::stationary_two_state(1.0, 1.0, 0.0, 0.0);
  m.rewards.jump = {{0, 1, mjr::LumpDistribution::deterministic(1.0)},
                    {1, 0, mjr::LumpDistribution::deterministic(5.0)}};
  return m;
}

TEST(EffectiveRate, SingleOutgoingEdge) {
  EXPECT_DOUBLE_EQ(mjr::effective_rate(jump_reward_two_state(), 0.0, 0), 1.0);
}

TEST(EffectiveRate, SwitchingEnsembleAtOrigin) {
  const auto m = mjr::prendiville_example();
  // r = 0.1, ten up-switches at rate 2 paying 1, external rate 0.5 with mean 2 + 60 * 2/7.
  EXPECT_NEAR(mjr::effective_rate(m, 0.0, 0), 0.1 + 20.0 + 0.5 * (2.0 + 60.0 * 2.0 / 7.0), 1e-12);
}

TEST(Phi, ZeroRewards) {
  mjr::ModelSpec m = mjr::stationary_two_state(1.0, 1.0, 0.0, 0.0);
  const std::vector<double> mv{0.4, 0.7};
  const auto p = mjr::phi(m, 0.2, mv);
  EXPECT_EQ(p[0], 0.0);
  EXPECT_EQ(p[1], 0.0);
}

TEST(Phi, PoissonAtHorizon) {
  const std::vector<double> mv{0.0};
  EXPECT_DOUBLE_EQ(mjr::phi(mjr::poisson_example(3.0), 1.0, mv)[0], 3.0);
}

TEST(Phi, DeterministicJumpRewards) {
  const std::vector<double> mv{0.3, 0.9};
  const auto p = mjr::phi(jump_reward_two_state(), 0.0, mv);
  EXPECT_DOUBLE_EQ(p[0], 1.0 * (1.0 + 2.0 * 0.9 * 1.0));
  EXPECT_DOUBLE_EQ(p[1], 1.0 * (25.0 + 2.0 * 0.3 * 5.0));
}

TEST(Moments, SymmetricTwoStateMean) {
  const auto sol = mjr::solve_moments(mjr::stationary_two_state(), 1.0, kTight);
  EXPECT_NEAR(sol.mean(), 0.5 + (1.0 - std::exp(-2.0)) / 4.0, 1e-10);
}

TEST(Moments, TerminalValuesAreZero) {
  const auto sol = mjr::solve_moments(mjr::prendiville_example(), 2.0, kTight);
  EXPECT_DOUBLE_EQ(sol.times.back(), 2.0);
  for (double v : sol.m.back()) EXPECT_EQ(v, 0.0);
  for (double v : sol.v.back()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(sol.V.back(), 0.0);
}

TEST(Moments, DeterministicScheduledRewardHasNoVariance) {
  mjr::ModelSpec m = mjr::stationary_two_state(1.0, 2.0, 0.0, 0.0);
  m.rewards.scheduled.times = mjr::ScheduleSpec::explicit_times({0.5});
  m.rewards.scheduled.law = {mjr::LumpDistribution::deterministic(4.0), mjr::LumpDistribution::deterministic(4.0)};
  const auto sol = mjr::solve_moments(m, 1.0, kTight);
  EXPECT_NEAR(sol.mean(), 4.0, 1e-12);
  EXPECT_NEAR(sol.variance(), 0.0, 1e-12);
}

TEST(Moments, ScheduledRewardAtHorizonCounts) {
  mjr::ModelSpec m = mjr::stationary_two_state(1.0, 2.0, 0.0, 0.0);
  m.rewards.scheduled.times = mjr::ScheduleSpec::explicit_times({1.0});
  m.rewards.scheduled.law = {mjr::LumpDistribution::deterministic(4.0), mjr::LumpDistribution::deterministic(4.0)};
  EXPECT_NEAR(mjr::solve_moments(m, 1.0, kTight).mean(), 4.0, 1e-12);
}

TEST(Moments, PoissonMeanEqualsVariance) {
  const auto sol = mjr::solve_moments(mjr::poisson_example(2.0), 4.0, kTight);
  EXPECT_NEAR(sol.mean(), 8.0, 1e-9);
  EXPECT_NEAR(sol.variance(), 8.0, 1e-9);
}

TEST(Moments, ZeroRewardModelIsIdenticallyZero) {
  const auto sol = mjr::solve_moments(mjr::stationary_two_state(1.0, 1.0, 0.0, 0.0), 3.0, kTight);
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    EXPECT_EQ(sol.m[i][0], 0.0);
    EXPECT_EQ(sol.v[i][1], 0.0);
    EXPECT_EQ(sol.V[i], 0.0);
  }
}

TEST(Moments, VarianceRoutesAgree) {
  for (const auto& m : {mjr::prendiville_example(), mjr::mm1k_example(), mjr::periodic_two_state()}) {
    const auto sol = mjr::solve_moments(m, 4.0, kTight);
    EXPECT_NEAR(sol.variance(), sol.variance_by_difference(), 1e-6 * std::max(1.0, sol.variance())) << m.name;
    EXPECT_GE(sol.variance(), -1e-9);
    for (std::size_t x = 0; x < sol.mu.size(); ++x) {
      EXPECT_GE(sol.v.front()[x], sol.m.front()[x] * sol.m.front()[x] - 1e-9 * std::max(1.0, sol.v.front()[x]));
    }
  }
}

TEST(Moments, MeanMonotoneInHorizon) {
  const auto m = mjr::prendiville_example();
  double prev = 0.0;
  for (double t : {0.5, 1.0, 2.0, 4.5, 5.0, 5.5, 8.0}) {
    const double cur = mjr::solve_moments(m, t, kTight).mean();
    EXPECT_GE(cur, prev);
    prev = cur;
  }
}

// Variation-of-constants oracle: m(0) = int_0^t P(0,u) r~(u) du for a model
// without scheduled rewards, using the closed-form transition matrix.
TEST(Moments, MeanMatchesClosedFormTransitions) {
  const auto m = mjr::periodic_two_state();
  const mjr::TimeFunction lam("2 + sin(2 * pi * t)");
  const mjr::TimeFunction mu = mjr::TimeFunction::constant(3.0);
  auto integrand = [&](double u) { return mjr::two_state_closed_form(lam, mu, 0.0, u, 1e-12)(0, 0); };
  const double oracle = mjr::adaptive_simpson(integrand, 0.0, 1.5, 1e-11);
  EXPECT_NEAR(mjr::solve_moments(m, 1.5, kTight).mean(), oracle, 1e-9);
}

TEST(Moments, RefinementRatio) {
  const auto m = mjr::prendiville_example();
  auto val = [&](double h) {
    SolverConfig c = SolverConfig::fixed(Method::kRk4, h);
    c.record = mjr::Record::kEndpoint;
    return mjr::solve_moments(m, 1.0, c).mean();
  };
  const double a = val(1.0 / 16), b = val(1.0 / 32), c = val(1.0 / 64);
  const double ratio = std::abs(a - b) / std::abs(b - c);
  EXPECT_GT(ratio, 16.0 / 3.0);
  EXPECT_LT(ratio, 16.0 * 3.0);
}

TEST(Moments, DopriAgreesWithRk4) {
  for (const auto& m : {mjr::prendiville_example(), mjr::mm1k_example(), mjr::multiserver_example()}) {
    SolverConfig rk = SolverConfig::fixed(Method::kRk4, 1e-3);
    rk.record = mjr::Record::kEndpoint;
    SolverConfig dp = SolverConfig::adaptive(1e-10, 1e-12);
    dp.record = mjr::Record::kEndpoint;
    const auto a = mjr::solve_moments(m, 1.0, rk);
    const auto b = mjr::solve_moments(m, 1.0, dp);
    for (std::size_t x = 0; x < a.mu.size(); ++x) {
      const double ya = a.m.front()[x];
      EXPECT_NEAR(ya, b.m.front()[x], 10.0 * std::max(1e-10 * std::abs(ya), 1e-12)) << m.name << " x=" << x;
    }
  }
}

}  // namespace
