#pragma once

// Model and reward data model for finite-state Markov jump processes with
// time-varying rates, plus lump-sum reward laws with analytic moments.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mjr/error.hpp"
#include "mjr/exprlang.hpp"

namespace mjr {

using StateIndex = int;

// Which one-sided limit to take when a function is evaluated at a point where
// it may be discontinuous. kLeft is the limit from below (t-), kRight from
// above (t+).
enum class Side { kInterior, kLeft, kRight };

// Offset used to realize one-sided limits numerically.
inline double side_offset(double t) { return 1e-11 * std::max(1.0, std::abs(t)); }

inline double probe_time(double t, Side side) {
  switch (side) {
    case Side::kLeft: return t - side_offset(t);
    case Side::kRight: return t + side_offset(t);
    default: return t;
  }
}

// One block of a lump law: `scale(t, x)` times a sum of `count` iid Beta(alpha, beta).
struct BetaComponent {
  int count = 1;
  double alpha = 1.0;
  double beta = 1.0;
  TimeFunction scale = TimeFunction::constant(1.0);
};

struct LumpMoments {
  double m1 = 0.0;
  double m2 = 0.0;
};

// Law of a lump-sum reward: offset(t, x) + sum over components. The closed
// family keeps first and second moments analytic.
class LumpDistribution {
 public:
  LumpDistribution() = default;

  static LumpDistribution deterministic(TimeFunction value) {
    LumpDistribution d;
    d.offset_ = std::move(value);
    return d;
  }
  static LumpDistribution deterministic(double value) {
    return deterministic(TimeFunction::constant(value));
  }
  static LumpDistribution beta(double alpha, double beta,
                               TimeFunction scale = TimeFunction::constant(1.0),
                               TimeFunction shift = TimeFunction::constant(0.0)) {
    return affine_beta_sum(std::move(shift), {BetaComponent{1, alpha, beta, std::move(scale)}});
  }
  static LumpDistribution affine_beta_sum(TimeFunction offset,
                                          std::vector<BetaComponent> components) {
    LumpDistribution d;
    d.offset_ = std::move(offset);
    for (auto& c : components) {
      if (c.count < 0) throw ValidationError("beta component count must be non-negative");
      if (!(c.alpha > 0.0) || !(c.beta > 0.0)) {
        throw ValidationError("beta component parameters must be positive");
      }
      if (c.count > 0) d.components_.push_back(std::move(c));
    }
    return d;
  }

  const TimeFunction& offset() const { return offset_; }
  const std::vector<BetaComponent>& components() const { return components_; }
  bool is_deterministic() const { return components_.empty(); }

  LumpMoments moments(double t, double x = 0.0) const {
    double mean = offset_(t, x);
    double var = 0.0;
    for (const auto& c : components_) {
      const double s = c.scale(t, x);
      const double ab = c.alpha + c.beta;
      mean += s * c.count * c.alpha / ab;
      var += s * s * c.count * c.alpha * c.beta / (ab * ab * (ab + 1.0));
    }
    return {mean, var + mean * mean};
  }

  template <class Rng>
  double sample(double t, double x, Rng& rng) const {
    double v = offset_(t, x);
    for (const auto& c : components_) {
      const double s = c.scale(t, x);
      std::gamma_distribution<double> ga(c.alpha, 1.0);
      std::gamma_distribution<double> gb(c.beta, 1.0);
      double sum = 0.0;
      for (int j = 0; j < c.count; ++j) {
        const double a = ga(rng);
        const double b = gb(rng);
        sum += a / (a + b);
      }
      v += s * sum;
    }
    return v;
  }

  // Same law on a clock running `scale` times faster.
  LumpDistribution rescaled(double scale) const {
    LumpDistribution d;
    d.offset_ = offset_.rescaled(scale, 1.0);
    for (const auto& c : components_) {
      d.components_.push_back({c.count, c.alpha, c.beta, c.scale.rescaled(scale, 1.0)});
    }
    return d;
  }

 private:
  TimeFunction offset_ = TimeFunction::constant(0.0);
  std::vector<BetaComponent> components_;
};

inline double lump_mean(const LumpDistribution& dist, double t, double x = 0.0) {
  return dist.moments(t, x).m1;
}

// E (Z + c)^2 for Z drawn from `dist` at time t.
inline double lump_shifted_second_moment(const LumpDistribution& dist, double t, double c,
                                         double x = 0.0) {
  const LumpMoments m = dist.moments(t, x);
  return m.m2 + 2.0 * c * m.m1 + c * c;
}

// Times t_1 < t_2 < ... of scheduled lump-sum rewards.
class ScheduleSpec {
 public:
  enum class Kind { kNone, kArithmetic, kExplicit };

  ScheduleSpec() = default;
  static ScheduleSpec none() { return {}; }
  static ScheduleSpec arithmetic(double start, double step) {
    if (!(start > 0.0) || !(step > 0.0)) {
      throw ValidationError("arithmetic schedule needs start > 0 and step > 0");
    }
    ScheduleSpec s;
    s.kind_ = Kind::kArithmetic;
    s.start_ = start;
    s.step_ = step;
    return s;
  }
  static ScheduleSpec explicit_times(std::vector<double> times) {
    ScheduleSpec s;
    s.kind_ = Kind::kExplicit;
    s.times_ = std::move(times);
    return s;
  }

  Kind kind() const { return kind_; }
  double start() const { return start_; }
  double step() const { return step_; }
  const std::vector<double>& times() const { return times_; }
  bool empty() const {
    return kind_ == Kind::kNone || (kind_ == Kind::kExplicit && times_.empty());
  }

  // Scheduled times in the half-open window (lo, hi].
  std::vector<double> times_in(double lo, double hi) const {
    std::vector<double> out;
    if (kind_ == Kind::kArithmetic) {
      const double first = std::max(1.0, std::floor((lo - start_) / step_) + 1.0);
      for (double i = first - 1.0;; i += 1.0) {
        const double ti = start_ + i * step_;
        if (ti > hi) break;
        if (ti > lo) out.push_back(ti);
      }
    } else if (kind_ == Kind::kExplicit) {
      for (double ti : times_) {
        if (ti > lo && ti <= hi) out.push_back(ti);
      }
    }
    return out;
  }

  // Smallest gap between successive times; +inf when fewer than two.
  double min_gap() const {
    if (kind_ == Kind::kArithmetic) return step_;
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < times_.size(); ++i) gap = std::min(gap, times_[i] - times_[i - 1]);
    return gap;
  }

  bool strictly_increasing() const {
    if (kind_ != Kind::kExplicit) return true;
    for (std::size_t i = 1; i < times_.size(); ++i) {
      if (!(times_[i] > times_[i - 1])) return false;
    }
    return times_.empty() || times_.front() > 0.0;
  }

  ScheduleSpec rescaled(double period) const {
    ScheduleSpec s = *this;
    s.start_ /= period;
    s.step_ /= period;
    for (double& t : s.times_) t /= period;
    return s;
  }

 private:
  Kind kind_ = Kind::kNone;
  double start_ = 0.0;
  double step_ = 0.0;
  std::vector<double> times_;
};

class InitialDistribution {
 public:
  enum class Kind { kPoint, kPmf, kTruncatedGeometric };

  static InitialDistribution point(StateIndex state) {
    InitialDistribution d;
    d.kind_ = Kind::kPoint;
    d.state_ = state;
    return d;
  }
  static InitialDistribution pmf(std::vector<double> p) {
    InitialDistribution d;
    d.kind_ = Kind::kPmf;
    d.p_ = std::move(p);
    return d;
  }
  // P(x) proportional to ratio^x on 0..d-1.
  static InitialDistribution truncated_geometric(double ratio) {
    InitialDistribution d;
    d.kind_ = Kind::kTruncatedGeometric;
    d.ratio_ = ratio;
    return d;
  }

  Kind kind() const { return kind_; }
  StateIndex state() const { return state_; }
  double ratio() const { return ratio_; }
  const std::vector<double>& raw_pmf() const { return p_; }

  std::vector<double> vector(int d) const {
    std::vector<double> mu(static_cast<std::size_t>(d), 0.0);
    switch (kind_) {
      case Kind::kPoint:
        if (state_ < 0 || state_ >= d) throw ValidationError("initial state out of range");
        mu[static_cast<std::size_t>(state_)] = 1.0;
        break;
      case Kind::kPmf:
        if (static_cast<int>(p_.size()) != d) {
          throw ValidationError("initial pmf has length " + std::to_string(p_.size()) +
                                ", expected " + std::to_string(d));
        }
        mu = p_;
        break;
      case Kind::kTruncatedGeometric: {
        if (!(ratio_ > 0.0)) throw ValidationError("truncated geometric ratio must be positive");
        double w = 1.0;
        double total = 0.0;
        for (auto& m : mu) {
          m = w;
          total += w;
          w *= ratio_;
        }
        for (auto& m : mu) m /= total;
        break;
      }
    }
    return mu;
  }

 private:
  Kind kind_ = Kind::kPoint;
  StateIndex state_ = 0;
  double ratio_ = 0.0;
  std::vector<double> p_;
};

// Points where model data may be non-smooth. Absolute points plus an optional
// pattern of offsets repeated every `period` time units.
struct BreakpointSet {
  std::vector<double> points;
  std::optional<double> period;
  std::vector<double> period_offsets{0.0};

  // Sorted, de-duplicated breakpoints strictly inside (lo, hi).
  std::vector<double> expand(double lo, double hi) const {
    std::vector<double> out;
    for (double p : points) {
      if (p > lo && p < hi) out.push_back(p);
    }
    if (period && *period > 0.0) {
      const double per = *period;
      for (double off : period_offsets) {
        const double first = std::floor((lo - off) / per);
        for (double k = first;; k += 1.0) {
          const double p = off + k * per;
          if (p >= hi) break;
          if (p > lo) out.push_back(p);
        }
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](double a, double b) {
                            return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a));
                          }),
              out.end());
    return out;
  }

  BreakpointSet rescaled(double scale) const {
    BreakpointSet b = *this;
    for (double& p : b.points) p /= scale;
    if (b.period) *b.period /= scale;
    for (double& o : b.period_offsets) o /= scale;
    return b;
  }
};

// Per-state dominating constants for thinning. Empty vectors mean "derive
// from the model by probing".
struct SimBounds {
  std::vector<double> lambda_bar;
  std::vector<double> beta_bar;
};

struct RateEntry {
  StateIndex from = 0;
  StateIndex to = 0;
  TimeFunction rate;
};

struct JumpReward {
  StateIndex from = 0;
  StateIndex to = 0;
  LumpDistribution law;
};

struct ScheduledRewards {
  ScheduleSpec times;
  // One law per state; empty means no scheduled rewards.
  std::vector<LumpDistribution> law;
};

struct ExternalRewards {
  std::vector<TimeFunction> intensity;
  std::vector<LumpDistribution> law;
};

struct RewardSpec {
  // r(t, x), one per state; missing entries mean zero.
  std::vector<TimeFunction> rate;
  std::vector<JumpReward> jump;
  ScheduledRewards scheduled;
  std::optional<ExternalRewards> external;
};

struct ModelSpec {
  std::string name;
  int d = 1;
  std::vector<RateEntry> rates;
  RewardSpec rewards;
  InitialDistribution initial = InitialDistribution::point(0);
  BreakpointSet breakpoints;
  SimBounds bounds;
  // Declared period of all time-varying data, if the model is periodic.
  std::optional<double> period;

  bool has_scheduled() const {
    return !rewards.scheduled.law.empty() && !rewards.scheduled.times.empty();
  }
  bool has_external() const { return rewards.external.has_value(); }
};

// Structural checks that do not need to evaluate any expression. Throws
// ValidationError on the first problem.
inline void check_structure(const ModelSpec& m) {
  const int d = m.d;
  if (d < 1) throw ValidationError("state count must be positive");
  auto in_range = [d](StateIndex s) { return s >= 0 && s < d; };
  for (const auto& e : m.rates) {
    if (!in_range(e.from) || !in_range(e.to)) throw ValidationError("rate entry state out of range");
    if (e.from == e.to) throw ValidationError("rate entry with from == to");
  }
  for (std::size_t i = 0; i < m.rates.size(); ++i) {
    for (std::size_t j = i + 1; j < m.rates.size(); ++j) {
      if (m.rates[i].from == m.rates[j].from && m.rates[i].to == m.rates[j].to) {
        throw ValidationError("duplicate rate entry " + std::to_string(m.rates[i].from) + "->" +
                              std::to_string(m.rates[i].to));
      }
    }
  }
  if (!m.rewards.rate.empty() && static_cast<int>(m.rewards.rate.size()) != d) {
    throw ValidationError("reward rate list must have one entry per state");
  }
  for (const auto& j : m.rewards.jump) {
    const bool has_edge = std::any_of(m.rates.begin(), m.rates.end(), [&](const RateEntry& e) {
      return e.from == j.from && e.to == j.to;
    });
    if (!has_edge) {
      throw ValidationError("jump reward on " + std::to_string(j.from) + "->" +
                            std::to_string(j.to) + " which has no rate entry");
    }
  }
  if (!m.rewards.scheduled.law.empty() && static_cast<int>(m.rewards.scheduled.law.size()) != d) {
    throw ValidationError("scheduled reward law list must have one entry per state");
  }
  if (m.rewards.external) {
    if (static_cast<int>(m.rewards.external->intensity.size()) != d ||
        static_cast<int>(m.rewards.external->law.size()) != d) {
      throw ValidationError("external reward intensity and law need one entry per state");
    }
  }
  if (!m.bounds.lambda_bar.empty() && static_cast<int>(m.bounds.lambda_bar.size()) != d) {
    throw ValidationError("lambda_bar must have one entry per state");
  }
  if (!m.bounds.beta_bar.empty() && static_cast<int>(m.bounds.beta_bar.size()) != d) {
    throw ValidationError("beta_bar must have one entry per state");
  }
  if (!m.rewards.scheduled.times.strictly_increasing()) {
    throw ValidationError("scheduled times must be positive and strictly increasing");
  }
  (void)m.initial.vector(d);
}

// All model data evaluated at one instant.
struct Snapshot {
  double t = 0.0;
  std::vector<double> rate;   // per rate entry
  std::vector<double> exit;   // lambda(t, x)
  std::vector<double> r;      // reward rate
  std::vector<double> g_m1;   // per rate entry, jump lump moments
  std::vector<double> g_m2;
  std::vector<double> beta;   // external intensity
  std::vector<double> k_m1;   // external lump moments
  std::vector<double> k_m2;
  std::vector<double> r_eff;  // r + gamma
};

// Precomputed index tables over a ModelSpec for fast repeated evaluation.
// Holds a reference: the model must outlive the evaluator.
class ModelEvaluator {
 public:
  explicit ModelEvaluator(const ModelSpec& model) : m_(model) {
    check_structure(model);
    const std::size_t n = model.rates.size();
    jump_of_edge_.assign(n, -1);
    for (std::size_t e = 0; e < n; ++e) {
      for (std::size_t j = 0; j < model.rewards.jump.size(); ++j) {
        if (model.rewards.jump[j].from == model.rates[e].from &&
            model.rewards.jump[j].to == model.rates[e].to) {
          jump_of_edge_[e] = static_cast<int>(j);
        }
      }
    }
    out_edges_.resize(static_cast<std::size_t>(model.d));
    for (std::size_t e = 0; e < n; ++e) {
      out_edges_[static_cast<std::size_t>(model.rates[e].from)].push_back(static_cast<int>(e));
    }
  }

  const ModelSpec& model() const { return m_; }
  int states() const { return m_.d; }
  const std::vector<int>& out_edges(StateIndex x) const {
    return out_edges_[static_cast<std::size_t>(x)];
  }
  int jump_index(int edge) const { return jump_of_edge_[static_cast<std::size_t>(edge)]; }

  Snapshot at(double t, Side side = Side::kInterior) const {
    Snapshot s;
    fill(s, t, side);
    return s;
  }

  void fill(Snapshot& s, double t_nominal, Side side = Side::kInterior) const {
    const double t = probe_time(t_nominal, side);
    const auto d = static_cast<std::size_t>(m_.d);
    const std::size_t n = m_.rates.size();
    s.t = t_nominal;
    s.rate.resize(n);
    s.g_m1.assign(n, 0.0);
    s.g_m2.assign(n, 0.0);
    s.exit.assign(d, 0.0);
    s.r.assign(d, 0.0);
    s.beta.assign(d, 0.0);
    s.k_m1.assign(d, 0.0);
    s.k_m2.assign(d, 0.0);
    s.r_eff.assign(d, 0.0);
    for (std::size_t e = 0; e < n; ++e) {
      const auto& entry = m_.rates[e];
      const double q = entry.rate(t, entry.from);
      s.rate[e] = q;
      s.exit[static_cast<std::size_t>(entry.from)] += q;
      if (jump_of_edge_[e] >= 0) {
        const LumpMoments g = m_.rewards.jump[static_cast<std::size_t>(jump_of_edge_[e])].law.moments(
            t, entry.from);
        s.g_m1[e] = g.m1;
        s.g_m2[e] = g.m2;
        s.r_eff[static_cast<std::size_t>(entry.from)] += q * g.m1;
      }
    }
    for (std::size_t x = 0; x < d; ++x) {
      const double xv = static_cast<double>(x);
      if (!m_.rewards.rate.empty()) s.r[x] = m_.rewards.rate[x](t, xv);
      s.r_eff[x] += s.r[x];
      if (m_.rewards.external) {
        const double b = m_.rewards.external->intensity[x](t, xv);
        const LumpMoments k = m_.rewards.external->law[x].moments(t, xv);
        s.beta[x] = b;
        s.k_m1[x] = k.m1;
        s.k_m2[x] = k.m2;
        s.r_eff[x] += b * k.m1;
      }
    }
  }

  // out = Q(t) v, using the rates held in `s`.
  void apply_q(const Snapshot& s, const double* v, double* out) const {
    const auto d = static_cast<std::size_t>(m_.d);
    for (std::size_t x = 0; x < d; ++x) out[x] = -s.exit[x] * v[x];
    for (std::size_t e = 0; e < m_.rates.size(); ++e) {
      const auto& entry = m_.rates[e];
      out[static_cast<std::size_t>(entry.from)] += s.rate[e] * v[static_cast<std::size_t>(entry.to)];
    }
  }

  // out = p Q(t) for a row vector p.
  void apply_q_left(const Snapshot& s, const double* p, double* out) const {
    const auto d = static_cast<std::size_t>(m_.d);
    for (std::size_t x = 0; x < d; ++x) out[x] = -s.exit[x] * p[x];
    for (std::size_t e = 0; e < m_.rates.size(); ++e) {
      const auto& entry = m_.rates[e];
      out[static_cast<std::size_t>(entry.to)] += p[static_cast<std::size_t>(entry.from)] * s.rate[e];
    }
  }

  // Scheduled-reward moments h(t_i, x) and E H^2 at a scheduled time.
  std::vector<LumpMoments> scheduled_moments(double ti) const {
    std::vector<LumpMoments> out(static_cast<std::size_t>(m_.d));
    if (m_.rewards.scheduled.law.empty()) return out;
    for (std::size_t x = 0; x < out.size(); ++x) {
      out[x] = m_.rewards.scheduled.law[x].moments(ti, static_cast<double>(x));
    }
    return out;
  }

 private:
  const ModelSpec& m_;
  std::vector<int> jump_of_edge_;
  std::vector<std::vector<int>> out_edges_;
};

// r~(t, x) = r(t, x) + sum_y Q(t,x,y) E G + beta(t, x) E K.
inline double effective_rate(const ModelSpec& model, double t, StateIndex x) {
  const ModelEvaluator ev(model);
  return ev.at(t).r_eff[static_cast<std::size_t>(x)];
}

// Same model on a clock where one unit equals `period` original units.
inline ModelSpec rescale_time(const ModelSpec& m, double period) {
  if (!(period > 0.0)) throw ValidationError("period must be positive");
  ModelSpec out = m;
  for (auto& e : out.rates) e.rate = e.rate.rescaled(period, period);
  for (auto& r : out.rewards.rate) r = r.rescaled(period, period);
  for (auto& j : out.rewards.jump) j.law = j.law.rescaled(period);
  out.rewards.scheduled.times = m.rewards.scheduled.times.rescaled(period);
  for (auto& l : out.rewards.scheduled.law) l = l.rescaled(period);
  if (out.rewards.external) {
    for (auto& b : out.rewards.external->intensity) b = b.rescaled(period, period);
    for (auto& l : out.rewards.external->law) l = l.rescaled(period);
  }
  out.breakpoints = m.breakpoints.rescaled(period);
  for (double& b : out.bounds.lambda_bar) b *= period;
  for (double& b : out.bounds.beta_bar) b *= period;
  if (out.period) *out.period /= period;
  return out;
}

}  // namespace mjr
