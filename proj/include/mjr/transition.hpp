#pragma once

// Transition matrices P(s, t) from the forward equation dP/du = P Q(u),
// closed forms for two-state switching and its binomial ensemble, and a
// total-variation mixing profile.

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "mjr/core.hpp"
#include "mjr/odesolve.hpp"
#include "mjr/quadrature.hpp"

namespace mjr {

struct TransitionMatrix {
  double s = 0.0;
  double t = 0.0;
  int d = 0;
  std::vector<double> p;  // row-major d x d

  double operator()(int x, int y) const {
    return p[static_cast<std::size_t>(x) * static_cast<std::size_t>(d) + static_cast<std::size_t>(y)];
  }
  std::vector<double> row(int x) const {
    const auto b = p.begin() + static_cast<std::ptrdiff_t>(x) * d;
    return {b, b + d};
  }
  double max_row_sum_error() const {
    double worst = 0.0;
    for (int x = 0; x < d; ++x) {
      double sum = 0.0;
      for (int y = 0; y < d; ++y) sum += (*this)(x, y);
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
  }

  static TransitionMatrix identity(int d, double s, double t) {
    TransitionMatrix m{s, t, d, std::vector<double>(static_cast<std::size_t>(d * d), 0.0)};
    for (int x = 0; x < d; ++x) m.p[static_cast<std::size_t>(x * d + x)] = 1.0;
    return m;
  }
};

namespace detail {

inline TransitionMatrix finish_matrix(std::vector<double> p, int d, double s, double t) {
  for (double& e : p) {
    if (e < -1e-9 || e > 1.0 + 1e-9) {
      throw NumericalError("transition probability out of range: " + expr::format_double(e));
    }
    e = std::clamp(e, 0.0, 1.0);
  }
  return TransitionMatrix{s, t, d, std::move(p)};
}

}  // namespace detail

// One forward solve from P(s, s) = I, returning P(s, u) at every u in
// `targets` (each in [s, hi]). Targets become segment boundaries.
inline std::vector<TransitionMatrix> transition_matrices(const ModelSpec& model, double s,
                                                         std::vector<double> targets,
                                                         SolverConfig cfg) {
  const int d = model.d;
  std::vector<TransitionMatrix> out;
  if (targets.empty()) return out;
  const double hi = *std::max_element(targets.begin(), targets.end());
  if (hi <= s) {
    for (double u : targets) out.push_back(TransitionMatrix::identity(d, s, u));
    return out;
  }
  const ModelEvaluator ev(model);
  auto pts = model.breakpoints.expand(s, hi);
  pts.insert(pts.end(), targets.begin(), targets.end());
  const Segmentation seg = Segmentation::build(s, hi, std::move(pts));

  const auto du = static_cast<std::size_t>(d);
  Snapshot snap;
  auto field = [&](double t, Side side, std::span<const double> y, std::span<double> dy) {
    ev.fill(snap, t, side);
    for (std::size_t x = 0; x < du; ++x) ev.apply_q_left(snap, y.data() + x * du, dy.data() + x * du);
  };
  cfg.record = Record::kBoundaries;
  GridSolution g =
      integrate_forward(field, TransitionMatrix::identity(d, s, s).p, seg, cfg);
  out.reserve(targets.size());
  for (double u : targets) {
    if (u <= s) {
      out.push_back(TransitionMatrix::identity(d, s, u));
    } else {
      out.push_back(detail::finish_matrix(g.at(u), d, s, u));
    }
  }
  return out;
}

inline TransitionMatrix transition_matrix(const ModelSpec& model, double s, double t,
                                          const SolverConfig& cfg) {
  if (s < 0.0 || t < s) throw ValidationError("transition_matrix needs 0 <= s <= t");
  if (t == s) return TransitionMatrix::identity(model.d, s, t);
  return transition_matrices(model, s, {t}, cfg).front();
}

// Two-state chain with rate lambda for 0->1 and mu for 1->0. The occupancy
// probability of state 1 solves p' = lambda - (lambda + mu) p, so with
// A(u, t) = int_u^t (lambda + mu),
//   p01 = int_s^t lambda(u) exp(-A(u, t)) du,   p11 = exp(-A(s, t)) + p01.
inline TransitionMatrix two_state_closed_form(const TimeFunction& lambda, const TimeFunction& mu,
                                              double s, double t, double quad_tol = 1e-12,
                                              std::span<const double> panels = {}) {
  if (s < 0.0 || t < s) throw ValidationError("two_state_closed_form needs 0 <= s <= t");
  TransitionMatrix m = TransitionMatrix::identity(2, s, t);
  if (t == s) return m;
  auto total = [&](double u) { return lambda(u) + mu(u); };
  // A(s, u) is built up from the nearest already-known point below u, so
  // the outer quadrature's mostly left-to-right sweep stays cheap.
  std::map<double, double> known{{s, 0.0}};
  const double span_len = t - s;
  auto a_from_s = [&](double u) {
    auto it = std::prev(known.upper_bound(u));
    if (it->first == u) return it->second;
    const double piece = adaptive_simpson(total, it->first, u,
                                          quad_tol * (u - it->first) / span_len + 1e-16, panels);
    const double a = it->second + piece;
    known.emplace_hint(std::next(it), u, a);
    return a;
  };
  const double a_st = a_from_s(t);
  auto integrand = [&](double u) { return lambda(u) * std::exp(a_from_s(u) - a_st); };
  const double p01 = adaptive_simpson(integrand, s, t, quad_tol, panels);
  const double p11 = std::exp(-a_st) + p01;
  m.p = {1.0 - p01, p01, 1.0 - p11, p11};
  return m;
}

// Distribution at t of the number of "on" components among d - 1
// independent two-state switches, x of which are on at s:
// Binomial(d-1-x, p01) convolved with Binomial(x, p11).
inline std::vector<double> binomial_pmf(int n, double p) {
  std::vector<double> out(static_cast<std::size_t>(n + 1), 0.0);
  if (p <= 0.0) {
    out[0] = 1.0;
    return out;
  }
  if (p >= 1.0) {
    out.back() = 1.0;
    return out;
  }
  const double lq = std::log1p(-p);
  const double lp = std::log(p);
  for (int k = 0; k <= n; ++k) {
    const double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    out[static_cast<std::size_t>(k)] = std::exp(lc + k * lp + (n - k) * lq);
  }
  return out;
}

inline std::vector<double> prendiville_closed_form(int d, const TimeFunction& lambda,
                                                   const TimeFunction& mu, double s, double t,
                                                   StateIndex x, double quad_tol = 1e-12) {
  if (x < 0 || x > d - 1) throw ValidationError("state out of range");
  const TransitionMatrix two = two_state_closed_form(lambda, mu, s, t, quad_tol);
  const auto off = binomial_pmf(d - 1 - x, two(0, 1));
  const auto on = binomial_pmf(x, two(1, 1));
  std::vector<double> pmf(static_cast<std::size_t>(d), 0.0);
  for (std::size_t i = 0; i < off.size(); ++i) {
    for (std::size_t j = 0; j < on.size(); ++j) pmf[i + j] += off[i] * on[j];
  }
  return pmf;
}

struct MixingPoint {
  double u = 0.0;
  double tv = 0.0;
};

// max over row pairs of sum_z |P(x, z) - P(y, z)| (not halved).
inline double max_row_distance(const TransitionMatrix& m) {
  double worst = 0.0;
  for (int x = 0; x < m.d; ++x) {
    for (int y = x + 1; y < m.d; ++y) {
      double acc = 0.0;
      for (int z = 0; z < m.d; ++z) acc += std::abs(m(x, z) - m(y, z));
      worst = std::max(worst, acc);
    }
  }
  return worst;
}

inline std::vector<MixingPoint> mixing_profile(const ModelSpec& model, double s, double u_max,
                                               double step, const SolverConfig& cfg) {
  if (!(step > 0.0) || u_max < step) throw ValidationError("mixing profile needs 0 < step <= u_max");
  const auto count = static_cast<long>(std::floor(u_max / step * (1.0 + 1e-12)));
  std::vector<double> targets;
  for (long k = 1; k <= count; ++k) targets.push_back(s + static_cast<double>(k) * step);
  const auto mats = transition_matrices(model, s, targets, cfg);
  std::vector<MixingPoint> out;
  out.reserve(mats.size());
  for (long k = 1; k <= count; ++k) {
    out.push_back({static_cast<double>(k) * step, max_row_distance(mats[static_cast<std::size_t>(k - 1)])});
  }
  return out;
}

}  // namespace mjr
