#pragma once

// Path simulation by per-state thinning and Monte Carlo estimation of the
// cumulative reward.
//
// From state x, candidate event times arrive at the constant rate
// lambda_bar(x); a candidate at tau is accepted with probability
// lambda(tau, x) / lambda_bar(x) and then moves to y with probability
// Q(tau, x, y) / lambda(tau, x). External reward events are thinned the same
// way against beta_bar(x) over each interval on which the state is fixed.
//
// Reproducibility: path i draws from its own generator seeded by (seed, i).
// After the path is built, lump rewards are drawn from the same generator in
// a fixed order: jump lumps in jump order, then external lumps, then
// scheduled lumps.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "mjr/core.hpp"
#include "mjr/quadrature.hpp"
#include "mjr/validate.hpp"

namespace mjr {

using Rng = std::mt19937_64;

inline Rng substream(std::uint64_t seed, std::uint64_t path_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path_index),
                    static_cast<std::uint32_t>(path_index >> 32), 0x6d6a72u};
  return Rng(seq);
}

struct Path {
  double horizon = 0.0;
  // states[0] is X(0); states[j + 1] is the state from times[j] on.
  std::vector<double> times;
  std::vector<StateIndex> states;
  // True where the state change is a reset rather than a jump of X.
  std::vector<char> is_reset;
  std::vector<double> external_times;
  std::vector<StateIndex> external_states;

  std::size_t jumps() const { return times.size(); }

  // X(t) under the right-continuous convention.
  StateIndex state_at(double t) const {
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    return states[static_cast<std::size_t>(it - times.begin())];
  }
};

struct RewardSample {
  double integrated = 0.0;
  double jump = 0.0;
  double scheduled = 0.0;
  double external = 0.0;
  double total() const { return integrated + jump + scheduled + external; }
};

// Laws from which the state is redrawn at each positive integer time.
// Period i (on [i-1, i]) starts from laws[min(i-1, size-1)].
struct ResetLaws {
  std::vector<std::vector<double>> laws;
  bool enabled() const { return !laws.empty(); }
  const std::vector<double>& for_period(std::size_t i) const {
    return laws[std::min(i - 1, laws.size() - 1)];
  }
};

namespace detail {

inline StateIndex draw_state(const std::vector<double>& pmf, Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double u = u01(rng);
  double acc = 0.0;
  for (std::size_t x = 0; x < pmf.size(); ++x) {
    acc += pmf[x];
    if (u < acc) return static_cast<StateIndex>(x);
  }
  // Rounding left u above the cumulative total; take the last charged state.
  for (std::size_t x = pmf.size(); x-- > 0;) {
    if (pmf[x] > 0.0) return static_cast<StateIndex>(x);
  }
  return 0;
}

}  // namespace detail

// Precomputed simulation context; shareable across threads.
class Simulator {
 public:
  explicit Simulator(const ModelSpec& model, double horizon, ResetLaws reset = {})
      : m_(model), ev_(model), reset_(std::move(reset)), horizon_(horizon) {
    if (!(horizon > 0.0)) throw ValidationError("horizon must be positive");
    bounds_ = model.bounds;
    if (bounds_.lambda_bar.empty() || (model.has_external() && bounds_.beta_bar.empty())) {
      const SimBounds derived = derive_bounds(model, horizon);
      if (bounds_.lambda_bar.empty()) bounds_.lambda_bar = derived.lambda_bar;
      if (bounds_.beta_bar.empty()) bounds_.beta_bar = derived.beta_bar;
    }
    mu0_ = reset_.enabled() ? reset_.laws.front() : model.initial.vector(model.d);
    if (model.has_scheduled()) sched_ = model.rewards.scheduled.times.times_in(0.0, horizon);
    for (const auto& r : model.rewards.rate) rate_constant_.push_back(!r.expr().depends_on_time());
    const auto d = static_cast<std::size_t>(model.d);
    jump_law_.assign(d * d, -1);
    for (std::size_t j = 0; j < model.rewards.jump.size(); ++j) {
      const auto& jr = model.rewards.jump[j];
      jump_law_[static_cast<std::size_t>(jr.from) * d + static_cast<std::size_t>(jr.to)] =
          static_cast<int>(j);
    }
  }

  const ModelSpec& model() const { return m_; }
  const SimBounds& bounds() const { return bounds_; }
  double horizon() const { return horizon_; }

  Path simulate_path(Rng& rng) const {
    Path p;
    p.horizon = horizon_;
    std::exponential_distribution<double> exp1(1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    StateIndex x = detail::draw_state(mu0_, rng);
    p.states.push_back(x);
    double t = 0.0;
    std::size_t period = 1;
    while (t < horizon_) {
      double stop = horizon_;
      if (reset_.enabled()) stop = std::min(stop, static_cast<double>(period));
      const double interval_start = t;
      bool jumped = false;
      const auto ux = static_cast<std::size_t>(x);
      const double lbar = bounds_.lambda_bar[ux];
      const auto& edges = ev_.out_edges(x);
      while (lbar > 0.0 && !edges.empty()) {
        const double tau = t + exp1(rng) / lbar;
        if (tau >= stop) break;
        t = tau;
        double total = 0.0;
        exit_rates(edges, tau, x, total);
        if (total > lbar * (1.0 + 1e-12)) {
          throw NumericalError("rate bound violated in state " + std::to_string(x) + " at t=" +
                               expr::format_double(tau) + ": lambda=" + expr::format_double(total) +
                               " > lambda_bar=" + expr::format_double(lbar));
        }
        if (u01(rng) * lbar < total) {
          const double target = u01(rng) * total;
          double acc = 0.0;
          StateIndex y = m_.rates[static_cast<std::size_t>(edges.back())].to;
          for (std::size_t k = 0; k < edges.size(); ++k) {
            acc += scratch_[k];
            if (target < acc) {
              y = m_.rates[static_cast<std::size_t>(edges[k])].to;
              break;
            }
          }
          external_events(p, x, interval_start, tau, rng);
          p.times.push_back(tau);
          p.states.push_back(y);
          p.is_reset.push_back(0);
          x = y;
          jumped = true;
          break;
        }
      }
      if (jumped) continue;
      external_events(p, x, interval_start, stop, rng);
      t = stop;
      if (reset_.enabled() && stop < horizon_) {
        ++period;
        x = detail::draw_state(reset_.for_period(period), rng);
        p.times.push_back(stop);
        p.states.push_back(x);
        p.is_reset.push_back(1);
      }
    }
    return p;
  }

  RewardSample accumulate_reward(const Path& p, Rng& rng) const {
    RewardSample out;
    // Integrated reward over each constant-state interval.
    if (!m_.rewards.rate.empty()) {
      for (std::size_t j = 0; j <= p.times.size(); ++j) {
        const double a = j == 0 ? 0.0 : p.times[j - 1];
        const double b = j == p.times.size() ? p.horizon : p.times[j];
        if (b <= a) continue;
        const auto x = static_cast<std::size_t>(p.states[j]);
        const TimeFunction& r = m_.rewards.rate[x];
        if (rate_constant_[x]) {
          out.integrated += r(a, static_cast<double>(x)) * (b - a);
        } else {
          const double xv = static_cast<double>(x);
          const auto panels = m_.breakpoints.expand(a, b);
          out.integrated +=
              adaptive_simpson([&](double s) { return r(s, xv); }, a, b, 1e-10, panels);
        }
      }
    }
    for (std::size_t j = 0; j < p.times.size(); ++j) {
      if (p.is_reset[j]) continue;
      const auto from = static_cast<std::size_t>(p.states[j]);
      const auto to = static_cast<std::size_t>(p.states[j + 1]);
      const int law = jump_law_[from * static_cast<std::size_t>(m_.d) + to];
      if (law >= 0) {
        out.jump += m_.rewards.jump[static_cast<std::size_t>(law)].law.sample(
            p.times[j], static_cast<double>(from), rng);
      }
    }
    if (m_.rewards.external) {
      for (std::size_t k = 0; k < p.external_times.size(); ++k) {
        const StateIndex x = p.external_states[k];
        out.external += m_.rewards.external->law[static_cast<std::size_t>(x)].sample(
            p.external_times[k], static_cast<double>(x), rng);
      }
    }
    for (double ti : sched_) {
      if (ti > p.horizon) break;
      const StateIndex x = p.state_at(ti);
      out.scheduled += m_.rewards.scheduled.law[static_cast<std::size_t>(x)].sample(
          ti, static_cast<double>(x), rng);
    }
    return out;
  }

  RewardSample sample_reward(std::uint64_t seed, std::uint64_t path_index) const {
    Rng rng = substream(seed, path_index);
    const Path p = simulate_path(rng);
    return accumulate_reward(p, rng);
  }

 private:
  // Out-edge rates of x at tau into a thread-local scratch buffer.
  void exit_rates(const std::vector<int>& edges, double tau, StateIndex x, double& total) const {
    scratch_.resize(edges.size());
    total = 0.0;
    const double xv = static_cast<double>(x);
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const double q = m_.rates[static_cast<std::size_t>(edges[k])].rate(tau, xv);
      scratch_[k] = q;
      total += q;
    }
  }

  void external_events(Path& p, StateIndex x, double a, double b, Rng& rng) const {
    if (!m_.rewards.external) return;
    const auto ux = static_cast<std::size_t>(x);
    const double bbar = bounds_.beta_bar[ux];
    if (!(bbar > 0.0)) return;
    const TimeFunction& beta = m_.rewards.external->intensity[ux];
    std::exponential_distribution<double> exp1(1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double xv = static_cast<double>(x);
    double s = a;
    for (;;) {
      s += exp1(rng) / bbar;
      if (s >= b) break;
      const double bv = beta(s, xv);
      if (bv > bbar * (1.0 + 1e-12)) {
        throw NumericalError("external intensity bound violated in state " + std::to_string(x) +
                             " at t=" + expr::format_double(s));
      }
      if (u01(rng) * bbar < bv) {
        p.external_times.push_back(s);
        p.external_states.push_back(x);
      }
    }
  }

  const ModelSpec& m_;
  ModelEvaluator ev_;
  ResetLaws reset_;
  double horizon_;
  SimBounds bounds_;
  std::vector<double> mu0_;
  std::vector<double> sched_;
  std::vector<char> rate_constant_;
  std::vector<int> jump_law_;  // d x d, index into rewards.jump or -1
  static inline thread_local std::vector<double> scratch_;
};

inline Path simulate_path(const ModelSpec& model, double horizon, Rng& rng) {
  return Simulator(model, horizon).simulate_path(rng);
}

inline RewardSample accumulate_reward(const ModelSpec& model, const Path& path, Rng& rng) {
  return Simulator(model, path.horizon).accumulate_reward(path, rng);
}

struct CdfPoint {
  double z = 0.0;
  double value = 0.0;
  double halfwidth = 0.0;  // 1.96 binomial standard errors
};

struct SampleStats {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double se_mean = 0.0;
  double se_variance = 0.0;
  std::vector<CdfPoint> cdf;
  std::vector<RewardSample> samples;  // indexed by path

  double empirical_cdf(double z) const {
    std::size_t k = 0;
    for (const auto& s : samples) k += s.total() <= z ? 1 : 0;
    return static_cast<double>(k) / static_cast<double>(samples.size());
  }
};

inline double binomial_halfwidth(double f, std::size_t n) {
  return 1.96 * std::sqrt(f * (1.0 - f) / static_cast<double>(n));
}

// Mean, unbiased variance and their standard errors from totals in path order.
inline SampleStats summarize(std::vector<RewardSample> samples, const std::vector<double>& query) {
  SampleStats st;
  st.n = samples.size();
  const auto n = static_cast<double>(st.n);
  double sum = 0.0;
  for (const auto& s : samples) sum += s.total();
  st.mean = sum / n;
  double m2 = 0.0, m4 = 0.0;
  for (const auto& s : samples) {
    const double d = s.total() - st.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  st.variance = m2 / (n - 1.0);
  st.se_mean = std::sqrt(st.variance / n);
  const double mu4 = m4 / n;
  const double s2 = m2 / n;
  st.se_variance = std::sqrt(std::max(0.0, (mu4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n));
  st.samples = std::move(samples);
  for (double z : query) {
    const double f = st.empirical_cdf(z);
    st.cdf.push_back({z, f, binomial_halfwidth(f, st.n)});
  }
  return st;
}

inline unsigned default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

// Simulates n_paths independent paths; results depend only on (seed, n_paths).
inline SampleStats monte_carlo(const Simulator& sim, std::size_t n_paths, std::uint64_t seed,
                               unsigned workers, const std::vector<double>& query = {}) {
  if (n_paths < 2) throw ValidationError("monte_carlo needs at least two paths");
  workers = std::max(1u, workers);
  std::vector<RewardSample> samples(n_paths);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&] {
    constexpr std::size_t kChunk = 64;
    for (;;) {
      const std::size_t lo = next.fetch_add(kChunk);
      if (lo >= n_paths || failed.load()) return;
      const std::size_t hi = std::min(n_paths, lo + kChunk);
      try {
        for (std::size_t i = lo; i < hi; ++i) samples[i] = sim.sample_reward(seed, i);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return summarize(std::move(samples), query);
}

inline SampleStats monte_carlo(const ModelSpec& model, double horizon, std::size_t n_paths,
                               std::uint64_t seed, unsigned workers,
                               const std::vector<double>& query = {}) {
  const Simulator sim(model, horizon);
  return monte_carlo(sim, n_paths, seed, workers, query);
}

}  // namespace mjr
