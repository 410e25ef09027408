#pragma once

// Reward statistics when the state is redrawn independently at every integer
// time. Period increments are then independent, so means and variances add.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mjr/core.hpp"
#include "mjr/moments.hpp"

namespace mjr {

struct ResetSpec {
  // Law at the start of period i is laws[min(i-1, size-1)].
  std::vector<std::vector<double>> laws;
  int periods = 1;
};

struct PeriodStats {
  int period = 0;
  double mean = 0.0;
  double variance = 0.0;
  double cum_mean = 0.0;
  double cum_variance = 0.0;
};

struct ResetResult {
  std::vector<PeriodStats> rows;
  std::vector<std::string> warnings;
  double mean() const { return rows.empty() ? 0.0 : rows.back().cum_mean; }
  double variance() const { return rows.empty() ? 0.0 : rows.back().cum_variance; }
};

inline ResetResult solve_resetting(const ModelSpec& model, const ResetSpec& reset,
                                   const SolverConfig& cfg) {
  if (reset.periods < 1) throw ValidationError("need at least one period");
  if (reset.laws.empty()) throw ValidationError("need at least one reset law");
  if (model.has_scheduled()) {
    for (double ti : model.rewards.scheduled.times.times_in(0.0, reset.periods)) {
      if (ti == std::floor(ti)) {
        throw ValidationError("scheduled time " + expr::format_double(ti) + " coincides with a reset");
      }
    }
  }
  SolverConfig endpoint = cfg;
  endpoint.record = Record::kEndpoint;
  ResetResult out;
  double cm = 0.0, cv = 0.0;
  for (int i = 1; i <= reset.periods; ++i) {
    const auto& law = reset.laws[std::min<std::size_t>(static_cast<std::size_t>(i - 1), reset.laws.size() - 1)];
    const MomentSolution s = solve_moments_window(model, i - 1.0, static_cast<double>(i), law, endpoint);
    const double m = s.mean();
    const double v = s.variance();
    cm += m;
    cv += v;
    out.rows.push_back({i, m, v, cm, cv});
    if (v < 1e-10) {
      out.warnings.push_back("period " + std::to_string(i) + " has variance below 1e-10");
    }
  }
  return out;
}

}  // namespace mjr
