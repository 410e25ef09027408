#include <cmath>
#include <span>
#include <vector>

#include <gtest/gtest.h>

#include "mjr/odesolve.hpp"

namespace {

using mjr::Method;
using mjr::Segmentation;
using mjr::Side;
using mjr::SolverConfig;

auto no_jump = [](double, std::span<double>) {};

// Fields give the derivative in backward time, so y grows as t decreases.
auto growth = [](double, Side, std::span<const double> y, std::span<double> dy) { dy[0] = y[0]; };

TEST(OdeSolve, Rk4ReproducesE) {
  const auto seg = Segmentation::build(0.0, 1.0, {});
  const auto g = mjr::integrate_backward(growth, {1.0}, seg, no_jump, SolverConfig::fixed(Method::kRk4, 0.01));
  EXPECT_NEAR(g.front()[0], std::exp(1.0), 1e-8);
  EXPECT_DOUBLE_EQ(g.times.front(), 0.0);
  EXPECT_DOUBLE_EQ(g.times.back(), 1.0);
}

TEST(OdeSolve, PureJumpAccumulation) {
  const auto seg = Segmentation::build(0.0, 1.0, {0.5});
  auto zero = [](double, Side, std::span<const double>, std::span<double> dy) { dy[0] = 0.0; };
  auto add = [](double t, std::span<double> y) {
    if (std::abs(t - 0.5) < 1e-12) y[0] += 3.25;
  };
  for (Method m : {Method::kEuler, Method::kRk2, Method::kRk4, Method::kDopri54}) {
    SolverConfig cfg = SolverConfig::fixed(m, 0.1);
    const auto g = mjr::integrate_backward(zero, {0.0}, seg, add, cfg);
    EXPECT_DOUBLE_EQ(g.front()[0], 3.25) << mjr::method_name(m);
  }
}

TEST(OdeSolve, SubstepsTileSegments) {
  EXPECT_EQ(Segmentation::substeps(1.0, 0.1), 10);
  EXPECT_EQ(Segmentation::substeps(1.0 / 7.0, 1.0 / 64.0), 10);
  EXPECT_EQ(Segmentation::substeps(0.01, 1.0), 1);
}

TEST(OdeSolve, FixedStepCountsPerSegment) {
  const auto seg = Segmentation::build(0.0, 1.0, {0.3});
  const auto g = mjr::integrate_backward(growth, {1.0}, seg, no_jump, SolverConfig::fixed(Method::kEuler, 0.1));
  // 3 + 7 steps plus the starting point.
  EXPECT_EQ(g.times.size(), 11u);
}

double smooth_error(Method m, double h) {
  // dy/ds = cos(t) y in backward time from y(2) = 1; y(0) = exp(sin 2).
  auto f = [](double t, Side, std::span<const double> y, std::span<double> dy) { dy[0] = std::cos(t) * y[0]; };
  const auto seg = Segmentation::build(0.0, 2.0, {});
  SolverConfig cfg = SolverConfig::fixed(m, h);
  cfg.record = mjr::Record::kEndpoint;
  const auto g = mjr::integrate_backward(f, {1.0}, seg, no_jump, cfg);
  return std::abs(g.front()[0] - std::exp(std::sin(2.0)));
}

double order_slope(Method m) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int k = 3; k <= 9; ++k) {
    const double h = std::ldexp(1.0, -k);
    const double lx = std::log(h);
    const double ly = std::log(smooth_error(m, h));
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly; ++n;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

TEST(OdeSolve, ConvergenceOrders) {
  EXPECT_NEAR(order_slope(Method::kEuler), 1.0, 0.3);
  EXPECT_NEAR(order_slope(Method::kRk2), 2.0, 0.3);
  EXPECT_NEAR(order_slope(Method::kRk4), 4.0, 0.3);
}

TEST(OdeSolve, DopriMeetsTolerance) {
  auto f = [](double t, Side, std::span<const double> y, std::span<double> dy) { dy[0] = std::cos(t) * y[0]; };
  const auto seg = Segmentation::build(0.0, 2.0, {0.7, 1.3});
  const auto g = mjr::integrate_backward(f, {1.0}, seg, no_jump, SolverConfig::adaptive(1e-10, 1e-12));
  EXPECT_NEAR(g.front()[0], std::exp(std::sin(2.0)), 1e-9);
  for (std::size_t i = 1; i < g.times.size(); ++i) EXPECT_LT(g.times[i - 1], g.times[i]);
}

TEST(OdeSolve, SideMarkersSeeOneSidedValues) {
  // Field is 1 on [0, 0.5) and 3 on [0.5, 1]; a step sampling the wrong side
  // at t = 0.5 would misplace mass.
  auto f = [](double t, Side side, std::span<const double>, std::span<double> dy) {
    const double tt = mjr::probe_time(t, side);
    dy[0] = tt < 0.5 ? 1.0 : 3.0;
  };
  const auto seg = Segmentation::build(0.0, 1.0, {0.5});
  for (Method m : {Method::kEuler, Method::kRk2, Method::kRk4, Method::kDopri54}) {
    const auto g = mjr::integrate_backward(f, {0.0}, seg, no_jump, SolverConfig::fixed(m, 0.5));
    EXPECT_NEAR(g.front()[0], 2.0, 1e-12) << mjr::method_name(m);
  }
}

TEST(OdeSolve, ForwardDirection) {
  auto f = [](double, Side, std::span<const double> y, std::span<double> dy) { dy[0] = y[0]; };
  const auto seg = Segmentation::build(0.0, 1.0, {0.25});
  const auto g = mjr::integrate_forward(f, {1.0}, seg, SolverConfig::fixed(Method::kRk4, 0.01));
  EXPECT_NEAR(g.back()[0], std::exp(1.0), 1e-8);
}

TEST(OdeSolve, NonFiniteFieldIsReported) {
  auto f = [](double, Side, std::span<const double>, std::span<double> dy) { dy[0] = NAN; };
  const auto seg = Segmentation::build(0.0, 1.0, {});
  EXPECT_THROW(mjr::integrate_backward(f, {1.0}, seg, no_jump, SolverConfig::fixed(Method::kRk4, 0.1)),
               mjr::NumericalError);
}

}  // namespace
