#pragma once

// Grid-based checks of the modelling assumptions: irreducibility of the
// sparsity graph (A2), rate bounds (A3), reward bounds (A4), schedule gaps
// (A5), and domination of the thinning bounds. Infima and suprema are only
// probed on a grid, so passing is necessary but not sufficient.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mjr/core.hpp"

namespace mjr {

struct ValidationCheck {
  std::string name;
  bool passed = true;
  std::string detail;
  // Advisory checks are reported but do not make the model invalid.
  bool advisory = false;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool valid() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const ValidationCheck& c) { return c.passed || c.advisory; });
  }
  const ValidationCheck* find(const std::string& name) const {
    for (const auto& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
  std::string to_string() const {
    std::ostringstream os;
    for (const auto& c : checks) {
      os << (c.passed ? "PASS" : (c.advisory ? "WARN" : "FAIL")) << "  " << c.name;
      if (!c.detail.empty()) os << ": " << c.detail;
      os << '\n';
    }
    os << (valid() ? "model valid" : "model INVALID") << '\n';
    return os.str();
  }
};

struct ProbePoint {
  double t;
  Side side;
};

// Uniform grid of `per_unit` points per time unit on [0, horizon] plus both
// one-sided limits at every breakpoint and scheduled time.
inline std::vector<ProbePoint> probe_grid(const ModelSpec& m, int per_unit, double horizon) {
  std::vector<ProbePoint> out;
  const long n = static_cast<long>(std::ceil(horizon * per_unit));
  out.reserve(static_cast<std::size_t>(n) + 1);
  for (long k = 0; k <= n; ++k) out.push_back({static_cast<double>(k) / per_unit, Side::kInterior});
  auto pts = m.breakpoints.expand(0.0, horizon);
  for (double s : m.rewards.scheduled.times.times_in(0.0, horizon)) pts.push_back(s);
  for (double p : pts) {
    out.push_back({p, Side::kLeft});
    out.push_back({p, Side::kRight});
  }
  return out;
}

namespace detail {

inline std::string where(double t, Side side) {
  std::string s = "t=" + expr::format_double(t);
  if (side == Side::kLeft) s += "-";
  if (side == Side::kRight) s += "+";
  return s;
}

inline bool strongly_connected(const ModelSpec& m) {
  const auto d = static_cast<std::size_t>(m.d);
  if (d <= 1) return true;
  auto reach = [&](bool forward) {
    std::vector<char> seen(d, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (const auto& e : m.rates) {
        const int a = forward ? e.from : e.to;
        const int b = forward ? e.to : e.from;
        if (a == u && !seen[static_cast<std::size_t>(b)]) {
          seen[static_cast<std::size_t>(b)] = 1;
          stack.push_back(b);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  };
  return reach(true) && reach(false);
}

// Runs `body` on every probe point, turning the first violation or domain
// error into a failed check.
inline ValidationCheck run_check(const std::string& name, const std::vector<ProbePoint>& grid,
                                 const std::function<std::string(double, Side)>& body) {
  ValidationCheck c{name, true, "", false};
  for (const auto& p : grid) {
    try {
      std::string problem = body(probe_time(p.t, p.side), p.side);
      if (!problem.empty()) {
        c.passed = false;
        c.detail = problem + " at " + where(p.t, p.side);
        return c;
      }
    } catch (const DomainError& e) {
      c.passed = false;
      c.detail = std::string("evaluation failed at ") + where(p.t, p.side) + ": " + e.what();
      return c;
    }
  }
  return c;
}

inline std::string check_lump(const LumpDistribution& law, double t, double x,
                              const std::string& label) {
  const double off = law.offset()(t, x);
  if (!std::isfinite(off) || off < 0.0) return label + " offset " + expr::format_double(off) + " < 0";
  for (const auto& c : law.components()) {
    const double s = c.scale(t, x);
    if (!std::isfinite(s) || s < 0.0) return label + " scale " + expr::format_double(s) + " < 0";
  }
  return {};
}

}  // namespace detail

struct ValidationOptions {
  int probe_points = 64;   // per unit time
  double horizon = 64.0;   // probe window [0, horizon]
};

inline ValidationReport validate_model(const ModelSpec& m, ValidationOptions opt = {}) {
  ValidationReport rep;
  try {
    check_structure(m);
    rep.checks.push_back({"structure", true, "d=" + std::to_string(m.d), false});
  } catch (const Error& e) {
    rep.checks.push_back({"structure", false, e.what(), false});
    return rep;
  }
  if (opt.probe_points < 1) opt.probe_points = 1;
  const auto grid = probe_grid(m, opt.probe_points, opt.horizon);
  const auto d = static_cast<std::size_t>(m.d);

  {
    ValidationCheck c{"A2 irreducibility", detail::strongly_connected(m), "", false};
    if (m.d == 1) c.detail = "single state";
    if (!c.passed) c.detail = "rate sparsity graph is not strongly connected";
    rep.checks.push_back(c);
  }

  rep.checks.push_back(detail::run_check("A3 rate bounds", grid, [&](double t, Side) {
    for (const auto& e : m.rates) {
      const double q = e.rate(t, e.from);
      if (!std::isfinite(q) || !(q > 0.0)) {
        return "rate " + std::to_string(e.from) + "->" + std::to_string(e.to) + " = " +
               expr::format_double(q) + " not in (0, inf)";
      }
    }
    return std::string{};
  }));

  rep.checks.push_back(detail::run_check("A4 reward bounds", grid, [&](double t, Side) {
    for (std::size_t x = 0; x < d; ++x) {
      const double xv = static_cast<double>(x);
      if (!m.rewards.rate.empty()) {
        const double r = m.rewards.rate[x](t, xv);
        if (!std::isfinite(r) || r < 0.0) {
          return "reward rate r(t," + std::to_string(x) + ") = " + expr::format_double(r) + " < 0";
        }
      }
      if (m.rewards.external) {
        const double b = m.rewards.external->intensity[x](t, xv);
        if (!std::isfinite(b) || b < 0.0) {
          return "external intensity for state " + std::to_string(x) + " is negative";
        }
        auto p = detail::check_lump(m.rewards.external->law[x], t, xv,
                                    "external law for state " + std::to_string(x));
        if (!p.empty()) return p;
      }
    }
    for (const auto& j : m.rewards.jump) {
      auto p = detail::check_lump(j.law, t, j.from,
                                  "jump law " + std::to_string(j.from) + "->" + std::to_string(j.to));
      if (!p.empty()) return p;
    }
    return std::string{};
  }));

  if (m.has_scheduled()) {
    std::vector<ProbePoint> sched;
    for (double s : m.rewards.scheduled.times.times_in(0.0, opt.horizon)) {
      sched.push_back({s, Side::kInterior});
    }
    auto c = detail::run_check("A4 scheduled rewards", sched, [&](double t, Side) {
      for (std::size_t x = 0; x < d; ++x) {
        auto p = detail::check_lump(m.rewards.scheduled.law[x], t, static_cast<double>(x),
                                    "scheduled law for state " + std::to_string(x));
        if (!p.empty()) return p;
      }
      return std::string{};
    });
    rep.checks.push_back(c);
  }

  {
    // inf r + inf gamma > 0 per state. Reported as advisory: it only rules
    // out a degenerate limit and is restored by adding a constant rate.
    ValidationCheck c{"A4 positive accrual", true, "", true};
    std::vector<double> r_min(d, std::numeric_limits<double>::infinity());
    std::vector<double> g_min(d, std::numeric_limits<double>::infinity());
    try {
      const ModelEvaluator ev(m);
      Snapshot s;
      for (const auto& p : grid) {
        ev.fill(s, p.t, p.side);
        for (std::size_t x = 0; x < d; ++x) {
          r_min[x] = std::min(r_min[x], s.r[x]);
          g_min[x] = std::min(g_min[x], s.r_eff[x] - s.r[x]);
        }
      }
      for (std::size_t x = 0; x < d; ++x) {
        if (!(r_min[x] + g_min[x] > 0.0)) {
          c.passed = false;
          c.detail = "state " + std::to_string(x) + " accrues no reward at some time";
          break;
        }
      }
    } catch (const Error& e) {
      c.passed = false;
      c.detail = e.what();
    }
    rep.checks.push_back(c);
  }

  {
    const double gap = m.rewards.scheduled.times.min_gap();
    ValidationCheck c{"A5 schedule gap", gap > 0.0 && m.rewards.scheduled.times.strictly_increasing(),
                      "", false};
    c.detail = std::isfinite(gap) ? "min gap " + expr::format_double(gap) : "no scheduled times";
    rep.checks.push_back(c);
  }

  if (!m.bounds.lambda_bar.empty() || !m.bounds.beta_bar.empty()) {
    rep.checks.push_back(detail::run_check("simulation bounds", grid, [&](double t, Side) {
      if (!m.bounds.lambda_bar.empty()) {
        std::vector<double> exit(d, 0.0);
        for (const auto& e : m.rates) exit[static_cast<std::size_t>(e.from)] += e.rate(t, e.from);
        for (std::size_t x = 0; x < d; ++x) {
          if (exit[x] > m.bounds.lambda_bar[x]) {
            return "lambda(t," + std::to_string(x) + ") = " + expr::format_double(exit[x]) +
                   " exceeds lambda_bar " + expr::format_double(m.bounds.lambda_bar[x]);
          }
        }
      }
      if (!m.bounds.beta_bar.empty() && m.rewards.external) {
        for (std::size_t x = 0; x < d; ++x) {
          const double b = m.rewards.external->intensity[x](t, static_cast<double>(x));
          if (b > m.bounds.beta_bar[x]) {
            return "beta(t," + std::to_string(x) + ") exceeds beta_bar";
          }
        }
      }
      return std::string{};
    }));
  }

  if (m.period) {
    const double p = *m.period;
    std::vector<ProbePoint> one_period;
    for (const auto& g : grid) {
      if (g.t + p <= opt.horizon) one_period.push_back(g);
    }
    const ModelEvaluator ev(m);
    rep.checks.push_back(detail::run_check("periodicity", one_period, [&](double t, Side) {
      const Snapshot a = ev.at(t);
      const Snapshot b = ev.at(t + p);
      auto differs = [](const std::vector<double>& u, const std::vector<double>& v) {
        for (std::size_t i = 0; i < u.size(); ++i) {
          if (std::abs(u[i] - v[i]) > 1e-9 * std::max(1.0, std::abs(u[i]))) return true;
        }
        return false;
      };
      if (differs(a.rate, b.rate) || differs(a.r_eff, b.r_eff) || differs(a.g_m2, b.g_m2) ||
          differs(a.k_m2, b.k_m2)) {
        return "model data differs between t and t+" + expr::format_double(p);
      }
      return std::string{};
    }));
  }
  return rep;
}

// Thinning bounds: `margin` times the largest probed value of lambda(., x)
// and beta(., x). Used when a model does not declare bounds.
inline SimBounds derive_bounds(const ModelSpec& m, double horizon, int per_unit = 64,
                               double margin = 1.25) {
  const auto d = static_cast<std::size_t>(m.d);
  SimBounds b{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  const ModelEvaluator ev(m);
  Snapshot s;
  for (const auto& p : probe_grid(m, per_unit, horizon)) {
    ev.fill(s, p.t, p.side);
    for (std::size_t x = 0; x < d; ++x) {
      b.lambda_bar[x] = std::max(b.lambda_bar[x], s.exit[x]);
      b.beta_bar[x] = std::max(b.beta_bar[x], s.beta[x]);
    }
  }
  for (auto& v : b.lambda_bar) v *= margin;
  for (auto& v : b.beta_bar) v *= margin;
  return b;
}

}  // namespace mjr
