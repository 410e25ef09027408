#pragma once

// Built-in models: the ensemble switching model, a single-server finite
// queue, a shift-staffed multi-server queue, and small test chains.

#include <cmath>
#include <string>
#include <vector>

#include "mjr/core.hpp"

namespace mjr {

namespace detail {

inline std::vector<TimeFunction> same_for_all(int d, const std::string& text) {
  const TimeFunction f(text);
  return std::vector<TimeFunction>(static_cast<std::size_t>(d), f);
}

inline void add_birth_death(ModelSpec& m, const std::string& up, const std::string& down) {
  const TimeFunction birth(up);
  const TimeFunction death(down);
  for (int x = 0; x + 1 < m.d; ++x) m.rates.push_back({x, x + 1, birth});
  for (int x = 1; x < m.d; ++x) m.rates.push_back({x, x - 1, death});
}

}  // namespace detail

// d - 1 independent on/off switches; the state counts switches that are on.
// Switch-on rate 2 + sin(2 pi t)/2, switch-off rate 3 - 2 exp(-t/4).
inline ModelSpec prendiville_example() {
  ModelSpec m;
  m.name = "prendiville";
  m.d = 11;
  const int n = m.d - 1;
  detail::add_birth_death(m, "(10 - x) * (2 + 0.5 * sin(2 * pi * t))", "x * (3 - 2 * exp(-t / 4))");

  m.rewards.rate = detail::same_for_all(m.d, "x * (7 * t - floor(7 * t)) + 0.1");
  for (int x = 0; x + 1 < m.d; ++x) m.rewards.jump.push_back({x, x + 1, LumpDistribution::deterministic(1.0)});
  for (int x = 1; x < m.d; ++x) m.rewards.jump.push_back({x, x - 1, LumpDistribution::deterministic(5.0)});

  m.rewards.scheduled.times = ScheduleSpec::arithmetic(5.0, 5.0);
  for (int x = 0; x < m.d; ++x) {
    m.rewards.scheduled.law.push_back(LumpDistribution::deterministic(static_cast<double>(x)));
  }

  ExternalRewards ext;
  ext.intensity = detail::same_for_all(m.d, "0.25 * (2 + sin(2 * pi * t))");
  for (int x = 0; x < m.d; ++x) {
    ext.law.push_back(LumpDistribution::affine_beta_sum(
        TimeFunction::constant(2.0), {BetaComponent{x, 2.0, 5.0, TimeFunction::constant(3.0)},
                                      BetaComponent{n - x, 2.0, 5.0, TimeFunction::constant(6.0)}}));
  }
  m.rewards.external = std::move(ext);

  m.initial = InitialDistribution::point(0);
  // Sawtooth jumps at multiples of 1/7.
  m.breakpoints.period = 1.0;
  m.breakpoints.period_offsets.clear();
  for (int k = 0; k < 7; ++k) m.breakpoints.period_offsets.push_back(k / 7.0);

  for (int x = 0; x < m.d; ++x) {
    m.bounds.lambda_bar.push_back((n - x) * 2.5 + x * 3.0);
    m.bounds.beta_bar.push_back(0.75);
  }
  return m;
}

// M_t/M_t/1/30: arrivals 12 + 10 sin(pi t), service 25 + 10 sin(pi/3 (t - 1/4)).
inline ModelSpec mm1k_example() {
  ModelSpec m;
  m.name = "mm1k";
  m.d = 31;
  detail::add_birth_death(m, "12 + 10 * sin(pi * t)", "25 + 10 * sin(pi / 3 * (t - 1 / 4))");
  m.rewards.rate = detail::same_for_all(m.d, "x + 1");
  const double lambda0 = 12.0;
  const double mu0 = 25.0 + 10.0 * std::sin(-M_PI / 12.0);
  m.initial = InitialDistribution::truncated_geometric(lambda0 / mu0);
  for (int x = 0; x < m.d; ++x) {
    m.bounds.lambda_bar.push_back((x + 1 < m.d ? 22.0 : 0.0) + (x > 0 ? 35.0 : 0.0));
  }
  return m;
}

// Stationary M/M/c/K occupancy law, used to start the multi-server queue.
inline std::vector<double> mmck_stationary(double lambda, double mu, int servers, int capacity) {
  std::vector<double> p(static_cast<std::size_t>(capacity + 1));
  double w = 1.0;
  double total = 0.0;
  for (int x = 0; x <= capacity; ++x) {
    if (x > 0) w *= lambda / (mu * std::min(x, servers));
    p[static_cast<std::size_t>(x)] = w;
    total += w;
  }
  for (double& v : p) v /= total;
  return p;
}

// Finite-capacity (80) multi-server queue. Shifts of one time unit staffed
// 30, 20, 25 in rotation; per-server rate decays from 4 to 11/3 over a shift;
// arrivals carry a secular ramp that stops at t = 36.
inline ModelSpec multiserver_example() {
  ModelSpec m;
  m.name = "multiserver";
  m.d = 81;
  // j = shift index within the three-shift cycle.
  const std::string j = "floor(t - 3 * floor(t / 3))";
  const std::string servers = "(30 - 10 * " + j + " + 7.5 * " + j + " * (" + j + " - 1))";
  detail::add_birth_death(
      m, "35 + 10 * cos(2 * pi / 3 * t) + 10 * cos(4 * pi / 3 * (t + 3 / 8)) + min(t, 36)",
      "min(x, " + servers + ") * (4 - (t - floor(t)) / 3)");
  m.rewards.rate = detail::same_for_all(m.d, "x + 1");
  m.initial = InitialDistribution::pmf(mmck_stationary(45.0, 4.0, 30, 80));
  m.breakpoints.period = 1.0;
  m.breakpoints.points = {36.0};
  for (int x = 0; x < m.d; ++x) {
    m.bounds.lambda_bar.push_back((x + 1 < m.d ? 91.0 : 0.0) + 4.0 * std::min(x, 30));
  }
  return m;
}

// Two states with constant rates a (0->1) and b (1->0) and reward rates
// r0, r1; starts in state 0.
inline ModelSpec stationary_two_state(double a = 1.0, double b = 1.0, double r0 = 1.0,
                                      double r1 = 0.0) {
  ModelSpec m;
  m.name = "two_state";
  m.d = 2;
  m.rates = {{0, 1, TimeFunction::constant(a)}, {1, 0, TimeFunction::constant(b)}};
  m.rewards.rate = {TimeFunction::constant(r0), TimeFunction::constant(r1)};
  m.initial = InitialDistribution::point(0);
  m.period = 1.0;
  m.bounds.lambda_bar = {a, b};
  return m;
}

// Two states, 0->1 at 2 + sin(2 pi t), 1->0 at 3, reward rate 1 in state 0.
inline ModelSpec periodic_two_state() {
  ModelSpec m;
  m.name = "periodic_two_state";
  m.d = 2;
  m.rates = {{0, 1, TimeFunction("2 + sin(2 * pi * t)")}, {1, 0, TimeFunction::constant(3.0)}};
  m.rewards.rate = {TimeFunction::constant(1.0), TimeFunction::constant(0.0)};
  m.initial = InitialDistribution::point(0);
  m.period = 1.0;
  m.bounds.lambda_bar = {3.0, 3.0};
  return m;
}

// One state; rewards only from a Poisson stream of rate `beta` paying 1 each.
inline ModelSpec poisson_example(double beta = 2.0) {
  ModelSpec m;
  m.name = "poisson";
  m.d = 1;
  ExternalRewards ext;
  ext.intensity = {TimeFunction::constant(beta)};
  ext.law = {LumpDistribution::deterministic(1.0)};
  m.rewards.external = std::move(ext);
  m.period = 1.0;
  m.bounds.lambda_bar = {0.0};
  m.bounds.beta_bar = {beta};
  return m;
}

inline ModelSpec builtin_model(const std::string& name) {
  if (name == "prendiville") return prendiville_example();
  if (name == "mm1k") return mm1k_example();
  if (name == "multiserver") return multiserver_example();
  if (name == "two_state") return stationary_two_state();
  if (name == "periodic_two_state") return periodic_two_state();
  if (name == "poisson") return poisson_example();
  throw ValidationError("unknown builtin model '" + name + "'");
}

}  // namespace mjr
