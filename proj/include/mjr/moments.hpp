#pragma once

// Mean and variance of the cumulative reward R(t) from backward ODEs.
//
// With m(s, x) = E[R(t) - R(s) | X(s) = x] and v(s, x) the matching second
// moment, the stacked state y = (m, v, V) solves, backward from y(t) = 0,
//
//   dm = r~ + Q m
//   dv = phi(m) + Q v
//   dV = mu phi(m) + mu Q v - 2 (mu m)(mu r~ + mu Q m)
//
// where V(s) = mu v(s) - (mu m(s))^2 is integrated directly to avoid
// cancellation. At a scheduled time t_i the state jumps by the scheduled
// reward moments. E R(t) = mu m(0) and Var R(t) = V(0).

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "mjr/core.hpp"
#include "mjr/odesolve.hpp"

namespace mjr {

struct MomentSolution {
  double start = 0.0;
  double horizon = 0.0;
  std::vector<double> mu;
  std::vector<double> times;  // ascending
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::vector<double> V;
  std::size_t field_evaluations = 0;

  int states() const { return static_cast<int>(mu.size()); }
  double mean() const {
    double acc = 0.0;
    for (std::size_t x = 0; x < mu.size(); ++x) acc += mu[x] * m.front()[x];
    return acc;
  }
  double variance() const { return V.front(); }
  // mu v(start) - (mu m(start))^2, the cancellation-prone route.
  double variance_by_difference() const {
    double mv = 0.0;
    for (std::size_t x = 0; x < mu.size(); ++x) mv += mu[x] * v.front()[x];
    const double mm = mean();
    return mv - mm * mm;
  }
};

// phi(t, x) = 2 r m(x) + sum_y Q(x,y)(E G^2 + 2 m(y) E G) + beta (E K^2 + 2 m(x) E K),
// evaluated from a snapshot.
inline void phi_from_snapshot(const ModelEvaluator& ev, const Snapshot& s, const double* m,
                              double* out) {
  const auto d = static_cast<std::size_t>(ev.states());
  const auto& rates = ev.model().rates;
  for (std::size_t x = 0; x < d; ++x) {
    out[x] = 2.0 * s.r[x] * m[x] + s.beta[x] * (s.k_m2[x] + 2.0 * m[x] * s.k_m1[x]);
  }
  for (std::size_t e = 0; e < rates.size(); ++e) {
    if (s.g_m1[e] == 0.0 && s.g_m2[e] == 0.0) continue;
    const auto from = static_cast<std::size_t>(rates[e].from);
    const auto to = static_cast<std::size_t>(rates[e].to);
    out[from] += s.rate[e] * (s.g_m2[e] + 2.0 * m[to] * s.g_m1[e]);
  }
}

inline std::vector<double> phi(const ModelSpec& model, double t, std::span<const double> m) {
  const ModelEvaluator ev(model);
  const Snapshot s = ev.at(t);
  std::vector<double> out(static_cast<std::size_t>(model.d));
  phi_from_snapshot(ev, s, m.data(), out.data());
  return out;
}

// Boundary points for a solve over [lo, hi]: declared breakpoints and
// scheduled times strictly inside, plus any extra points.
inline Segmentation model_segmentation(const ModelSpec& model, double lo, double hi,
                                       std::vector<double> extra = {}) {
  auto pts = model.breakpoints.expand(lo, hi);
  if (model.has_scheduled()) {
    for (double ti : model.rewards.scheduled.times.times_in(lo, hi)) pts.push_back(ti);
  }
  pts.insert(pts.end(), extra.begin(), extra.end());
  return Segmentation::build(lo, hi, std::move(pts));
}

namespace detail {

inline bool is_scheduled(const std::vector<double>& sched, double t) {
  const double tol = 1e-9 * std::max(1.0, std::abs(t));
  auto it = std::lower_bound(sched.begin(), sched.end(), t - tol);
  return it != sched.end() && std::abs(*it - t) <= tol;
}

}  // namespace detail

// Moments of the reward accrued over (start, horizon] given X(start) ~ mu.
inline MomentSolution solve_moments_window(const ModelSpec& model, double start, double horizon,
                                           std::vector<double> mu, const SolverConfig& cfg,
                                           bool naive = false,
                                           std::vector<double> extra_bounds = {}) {
  if (!(horizon > start)) throw ValidationError("horizon must exceed start time");
  const ModelEvaluator ev(model);
  const auto d = static_cast<std::size_t>(model.d);
  if (mu.size() != d) throw ValidationError("initial distribution has wrong length");

  std::vector<double> sched;
  if (model.has_scheduled()) sched = model.rewards.scheduled.times.times_in(start, horizon);

  if (naive) extra_bounds.insert(extra_bounds.end(), sched.begin(), sched.end());
  Segmentation seg = naive ? Segmentation::build(start, horizon, std::move(extra_bounds))
                           : model_segmentation(model, start, horizon, std::move(extra_bounds));

  Snapshot snap;
  std::vector<double> qm(d), qv(d), ph(d);
  auto field = [&](double t, Side side, std::span<const double> y, std::span<double> dy) {
    ev.fill(snap, t, naive ? Side::kInterior : side);
    const double* m = y.data();
    const double* v = y.data() + d;
    ev.apply_q(snap, m, qm.data());
    ev.apply_q(snap, v, qv.data());
    phi_from_snapshot(ev, snap, m, ph.data());
    double mu_m = 0.0, mu_phi = 0.0, mu_qv = 0.0, mu_r = 0.0, mu_qm = 0.0;
    for (std::size_t x = 0; x < d; ++x) {
      dy[x] = snap.r_eff[x] + qm[x];
      dy[d + x] = ph[x] + qv[x];
      mu_m += mu[x] * m[x];
      mu_phi += mu[x] * ph[x];
      mu_qv += mu[x] * qv[x];
      mu_r += mu[x] * snap.r_eff[x];
      mu_qm += mu[x] * qm[x];
    }
    dy[2 * d] = mu_phi + mu_qv - 2.0 * mu_m * (mu_r + mu_qm);
  };

  // y(t_i) from y(t_i+): m += h, v += E H^2 + 2 m(t_i+) h, and V updated so
  // that V = mu v - (mu m)^2 holds on both sides.
  auto scheduled_jump = [&](double t, std::span<double> y) {
    if (!detail::is_scheduled(sched, t)) return;
    const auto hm = ev.scheduled_moments(t);
    double mu_h = 0.0, mu_ht = 0.0, mu_m = 0.0;
    for (std::size_t x = 0; x < d; ++x) {
      const double h_tilde = hm[x].m2 + 2.0 * y[x] * hm[x].m1;
      mu_h += mu[x] * hm[x].m1;
      mu_ht += mu[x] * h_tilde;
      mu_m += mu[x] * y[x];
      y[d + x] += h_tilde;
      y[x] += hm[x].m1;
    }
    y[2 * d] += mu_ht - mu_h * mu_h - 2.0 * mu_h * mu_m;
  };

  std::vector<double> terminal(2 * d + 1, 0.0);
  scheduled_jump(horizon, std::span<double>(terminal));

  GridSolution g = integrate_backward(field, std::move(terminal), seg, scheduled_jump, cfg);

  MomentSolution out;
  out.start = start;
  out.horizon = horizon;
  out.mu = std::move(mu);
  out.times = std::move(g.times);
  out.field_evaluations = g.field_evaluations;
  out.m.reserve(g.values.size());
  out.v.reserve(g.values.size());
  out.V.reserve(g.values.size());
  for (const auto& y : g.values) {
    out.m.emplace_back(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(d));
    out.v.emplace_back(y.begin() + static_cast<std::ptrdiff_t>(d),
                       y.begin() + static_cast<std::ptrdiff_t>(2 * d));
    out.V.push_back(y[2 * d]);
  }
  return out;
}

inline MomentSolution solve_moments(const ModelSpec& model, double horizon, const SolverConfig& cfg) {
  return solve_moments_window(model, 0.0, horizon, model.initial.vector(model.d), cfg);
}

// Breakpoint-blind variant: only scheduled times split the interval and the
// field is evaluated without one-sided limits. For comparison studies.
inline MomentSolution solve_moments_naive(const ModelSpec& model, double horizon,
                                          const SolverConfig& cfg) {
  return solve_moments_window(model, 0.0, horizon, model.initial.vector(model.d), cfg, true);
}

}  // namespace mjr
