#pragma once

// Long-run constants for models whose data repeat with period 1:
// R(t) is approximately N(alpha t, sigma2 t) for large t.
//
// Pipeline: P(t, 1) and m(t) backward over one period; pi0 stationary for
// P(0, 1); alpha = pi0 m(0); Poisson's equation (P(0,1) - I) k = -(m(0) - alpha e)
// pinned by pi0 k = 0; then rho and chi backward together,
//   d rho = r~ - alpha + Q rho,          rho(1) = k,
//   d chi = xi(t, rho) + Q chi,           chi(1) = 0,
// with xi(t, x) = sum_y Q(x,y) E(G + rho(y) - rho(x))^2 + beta E K^2, and
// sigma2 = pi0 chi(0). Models with another period are rescaled first and the
// constants reported per original time unit.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "mjr/cltapprox.hpp"
#include "mjr/core.hpp"
#include "mjr/moments.hpp"
#include "mjr/odesolve.hpp"

namespace mjr {

struct PeriodicConstants {
  double period = 1.0;
  std::vector<double> pi0;
  double alpha = 0.0;   // reward per unit time
  double sigma2 = 0.0;  // variance per unit time
  std::vector<double> k;
  std::vector<double> r_star;  // m(0): expected reward over one period by start state
  // Uniform grid on [0, 1] of the rescaled clock.
  std::vector<double> grid;
  std::vector<std::vector<double>> rho;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> chi;
  std::vector<std::vector<double>> p_to_end;  // P(t, 1), row-major
  // max |m(0) - alpha + P(0,1) k - k|
  double seam_residual = 0.0;
  // |pi0 (r* - alpha e)|
  double fredholm_residual = 0.0;
  double poisson_residual = 0.0;
  // max |rho(0) - k| from the joint rho/chi solve
  double rho_return_residual = 0.0;
};

namespace detail {

inline std::vector<double> uniform_grid(int n) {
  std::vector<double> g(static_cast<std::size_t>(n + 1));
  for (int i = 0; i <= n; ++i) g[static_cast<std::size_t>(i)] = static_cast<double>(i) / n;
  g.back() = 1.0;
  return g;
}

inline std::vector<double> stationary_row(const Eigen::MatrixXd& p) {
  const auto d = p.rows();
  Eigen::MatrixXd a(d + 1, d);
  a.topRows(d) = p.transpose() - Eigen::MatrixXd::Identity(d, d);
  a.row(d).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d + 1);
  rhs(d) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(p - Eigen::MatrixXd::Identity(d, d));
  lu.setThreshold(1e-10);
  if (d > 1 && lu.rank() != d - 1) {
    throw NumericalError("stationary distribution of P(0,1) is not unique");
  }
  const Eigen::VectorXd pi = a.colPivHouseholderQr().solve(rhs);
  std::vector<double> out(pi.data(), pi.data() + d);
  for (double& v : out) v = std::max(v, 0.0);
  double total = 0.0;
  for (double v : out) total += v;
  for (double& v : out) v /= total;
  return out;
}

}  // namespace detail

inline PeriodicConstants solve_periodic_unit(const ModelSpec& model, const SolverConfig& cfg,
                                             int grid_n) {
  if (grid_n < 1) throw ValidationError("grid size must be positive");
  if (model.has_scheduled()) {
    for (double ti : model.rewards.scheduled.times.times_in(0.0, 1.0)) {
      if (ti >= 1.0 - 1e-12) throw ValidationError("scheduled times must lie strictly inside the period");
    }
  }
  const ModelEvaluator ev(model);
  const auto d = static_cast<std::size_t>(model.d);
  const auto grid = detail::uniform_grid(grid_n);
  const Segmentation seg = model_segmentation(model, 0.0, 1.0, grid);
  std::vector<double> sched;
  if (model.has_scheduled()) sched = model.rewards.scheduled.times.times_in(0.0, 1.0);
  SolverConfig rec = cfg;
  rec.record = Record::kBoundaries;

  // Pass 1: columns of P(t, 1) and m(t), y = (P row-major, m).
  Snapshot snap;
  std::vector<double> col(d), qcol(d);
  auto field1 = [&](double t, Side side, std::span<const double> y, std::span<double> dy) {
    ev.fill(snap, t, side);
    for (std::size_t c = 0; c < d; ++c) {
      for (std::size_t x = 0; x < d; ++x) col[x] = y[x * d + c];
      ev.apply_q(snap, col.data(), qcol.data());
      for (std::size_t x = 0; x < d; ++x) dy[x * d + c] = qcol[x];
    }
    ev.apply_q(snap, y.data() + d * d, qcol.data());
    for (std::size_t x = 0; x < d; ++x) dy[d * d + x] = snap.r_eff[x] + qcol[x];
  };
  auto jump1 = [&](double t, std::span<double> y) {
    if (!detail::is_scheduled(sched, t)) return;
    const auto hm = ev.scheduled_moments(t);
    for (std::size_t x = 0; x < d; ++x) y[d * d + x] += hm[x].m1;
  };
  std::vector<double> y1(d * d + d, 0.0);
  for (std::size_t x = 0; x < d; ++x) y1[x * d + x] = 1.0;
  const GridSolution g1 = integrate_backward(field1, y1, seg, jump1, rec);

  PeriodicConstants out;
  out.grid = grid;
  for (double t : grid) {
    const auto& y = g1.at(t);
    out.p_to_end.emplace_back(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(d * d));
    out.m.emplace_back(y.begin() + static_cast<std::ptrdiff_t>(d * d), y.end());
  }

  Eigen::MatrixXd p01(d, d);
  for (std::size_t x = 0; x < d; ++x) {
    for (std::size_t y = 0; y < d; ++y) p01(x, y) = out.p_to_end.front()[x * d + y];
  }
  out.pi0 = detail::stationary_row(p01);
  out.r_star = out.m.front();
  const Eigen::Map<const Eigen::VectorXd> pi(out.pi0.data(), static_cast<Eigen::Index>(d));
  const Eigen::Map<const Eigen::VectorXd> rs(out.r_star.data(), static_cast<Eigen::Index>(d));
  out.alpha = pi.dot(rs);
  const Eigen::VectorXd rc = rs - out.alpha * Eigen::VectorXd::Ones(d);
  out.fredholm_residual = std::abs(pi.dot(rc));

  Eigen::MatrixXd a(d + 1, d);
  a.topRows(d) = p01 - Eigen::MatrixXd::Identity(d, d);
  a.row(d) = pi.transpose();
  Eigen::VectorXd rhs(d + 1);
  rhs.head(d) = -rc;
  rhs(d) = 0.0;
  const Eigen::VectorXd k = a.colPivHouseholderQr().solve(rhs);
  out.poisson_residual = (a * k - rhs).lpNorm<Eigen::Infinity>();
  if (out.poisson_residual > 1e-8) {
    throw NumericalError("Poisson equation residual " + expr::format_double(out.poisson_residual) +
                         " exceeds 1e-8");
  }
  out.k.assign(k.data(), k.data() + d);
  out.seam_residual = (rs - out.alpha * Eigen::VectorXd::Ones(d) + p01 * k - k).lpNorm<Eigen::Infinity>();

  // Pass 2: rho and chi, y = (rho, chi).
  const double alpha = out.alpha;
  std::vector<double> qr(d), qc(d);
  const auto& rates = model.rates;
  auto field2 = [&](double t, Side side, std::span<const double> y, std::span<double> dy) {
    ev.fill(snap, t, side);
    const double* rho = y.data();
    ev.apply_q(snap, rho, qr.data());
    ev.apply_q(snap, y.data() + d, qc.data());
    for (std::size_t x = 0; x < d; ++x) {
      dy[x] = snap.r_eff[x] - alpha + qr[x];
      dy[d + x] = snap.beta[x] * snap.k_m2[x] + qc[x];
    }
    for (std::size_t e = 0; e < rates.size(); ++e) {
      const auto from = static_cast<std::size_t>(rates[e].from);
      const auto to = static_cast<std::size_t>(rates[e].to);
      const double c = rho[to] - rho[from];
      dy[d + from] += snap.rate[e] * (snap.g_m2[e] + 2.0 * c * snap.g_m1[e] + c * c);
    }
  };
  // At a scheduled time rho picks up h, and the martingale jump H - h adds
  // Var H to chi.
  auto jump2 = [&](double t, std::span<double> y) {
    if (!detail::is_scheduled(sched, t)) return;
    const auto hm = ev.scheduled_moments(t);
    for (std::size_t x = 0; x < d; ++x) {
      y[x] += hm[x].m1;
      y[d + x] += hm[x].m2 - hm[x].m1 * hm[x].m1;
    }
  };
  std::vector<double> y2(2 * d, 0.0);
  std::copy(out.k.begin(), out.k.end(), y2.begin());
  const GridSolution g2 = integrate_backward(field2, y2, seg, jump2, rec);
  for (double t : grid) {
    const auto& y = g2.at(t);
    out.rho.emplace_back(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(d));
    out.chi.emplace_back(y.begin() + static_cast<std::ptrdiff_t>(d), y.end());
  }
  for (std::size_t x = 0; x < d; ++x) {
    out.rho_return_residual = std::max(out.rho_return_residual, std::abs(out.rho.front()[x] - out.k[x]));
    out.sigma2 += out.pi0[x] * out.chi.front()[x];
  }
  return out;
}

inline PeriodicConstants solve_periodic(const ModelSpec& model, const SolverConfig& cfg,
                                        int grid_n = 1024) {
  if (!model.period) throw ValidationError("model does not declare a period");
  const double period = *model.period;
  if (period == 1.0) return solve_periodic_unit(model, cfg, grid_n);
  PeriodicConstants c = solve_periodic_unit(rescale_time(model, period), cfg, grid_n);
  c.period = period;
  c.alpha /= period;
  c.sigma2 /= period;
  return c;
}

// P(R(t) <= z) under the long-run approximation N(alpha t, sigma2 t).
inline double periodic_clt_approx(const PeriodicConstants& c, double t, double z) {
  if (!(c.sigma2 > 0.0)) throw DomainError("sigma2 must be positive");
  if (!(t > 0.0)) throw DomainError("t must be positive");
  return normal_approx_cdf(c.alpha * t, c.sigma2 * t, z);
}

}  // namespace mjr
