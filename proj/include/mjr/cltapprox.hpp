#pragma once

// Normal approximation N(E R(t), Var R(t)) and coverage studies comparing it
// with simulated reward distributions.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "mjr/moments.hpp"
#include "mjr/sim.hpp"

namespace mjr {

inline double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Inverse of the standard normal cdf: rational approximation (relative error
// about 1e-9) polished by one Halley step against the erfc-based cdf.
inline double standard_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("probability must lie in (0, 1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = standard_normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

inline double normal_quantile(double mean, double var, double p) {
  if (!(var > 0.0)) throw DomainError("variance must be positive");
  return mean + std::sqrt(var) * standard_normal_quantile(p);
}

inline double normal_approx_cdf(double mean, double var, double z) {
  if (!(var > 0.0)) throw DomainError("variance must be positive");
  if (z == std::numeric_limits<double>::infinity()) return 1.0;
  if (z == -std::numeric_limits<double>::infinity()) return 0.0;
  return standard_normal_cdf((z - mean) / std::sqrt(var));
}

struct CoverageRow {
  double t = 0.0;
  double p = 0.0;
  double quantile = 0.0;
  double coverage = 0.0;
  double halfwidth = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

struct CoverageTable {
  std::vector<CoverageRow> rows;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  SolverConfig solver;
};

// For each horizon: moments by ODE, normal quantiles at each level, and the
// empirical cdf of one shared path ensemble at those quantiles.
inline CoverageTable coverage_study(const ModelSpec& model, const std::vector<double>& times,
                                    const std::vector<double>& levels, std::size_t n_paths,
                                    std::uint64_t seed, unsigned workers, const SolverConfig& cfg) {
  if (levels.empty()) throw ValidationError("coverage study needs at least one level");
  if (times.empty()) throw ValidationError("coverage study needs at least one horizon");
  for (double p : levels) {
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("levels must lie in (0, 1)");
  }
  CoverageTable table;
  table.n_paths = n_paths;
  table.seed = seed;
  table.solver = cfg;
  SolverConfig endpoint = cfg;
  endpoint.record = Record::kEndpoint;
  for (double t : times) {
    if (!(t > 0.0)) throw ValidationError("horizons must be positive");
    const MomentSolution mom = solve_moments(model, t, endpoint);
    const double mean = mom.mean();
    const double var = mom.variance();
    std::vector<double> q;
    for (double p : levels) q.push_back(normal_quantile(mean, var, p));
    const SampleStats st = monte_carlo(Simulator(model, t), n_paths, seed, workers, q);
    for (std::size_t i = 0; i < levels.size(); ++i) {
      table.rows.push_back({t, levels[i], q[i], st.cdf[i].value, st.cdf[i].halfwidth, mean, var});
    }
  }
  return table;
}

}  // namespace mjr
