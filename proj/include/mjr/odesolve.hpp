#pragma once

// Discontinuity-aware integration of vector ODEs over a segmented interval.
//
// The interval [lo, hi] is cut at every declared non-smooth point; on each
// segment the field is smooth once its endpoint values are replaced by the
// appropriate one-sided limits. Fixed-step methods take exactly
// N = ceil(len / h) equal steps per segment; the embedded 5(4) pair adapts its
// step but never crosses a segment boundary. A jump callback updates the
// state at each interior boundary.
//
// The field returns the derivative along the direction of travel. For the
// backward problems this is d/ds y(T - s), so a step of size h moves
// y(t) -> y(t - h) ~ y(t) + h f(t, y).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mjr/core.hpp"
#include "mjr/error.hpp"

namespace mjr {

enum class Method { kEuler, kRk2, kRk4, kDopri54 };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::kEuler: return "euler";
    case Method::kRk2: return "rk2";
    case Method::kRk4: return "rk4";
    case Method::kDopri54: return "dopri54";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  if (s == "euler") return Method::kEuler;
  if (s == "rk2") return Method::kRk2;
  if (s == "rk4") return Method::kRk4;
  if (s == "dopri54") return Method::kDopri54;
  throw ValidationError("unknown ODE method '" + s + "'");
}

// Which solution points a solve keeps.
enum class Record { kSteps, kBoundaries, kEndpoint };

struct SolverConfig {
  Method method = Method::kDopri54;
  double h = 1e-2;  // fixed-step size
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_max = std::numeric_limits<double>::infinity();
  Record record = Record::kSteps;

  static SolverConfig fixed(Method m, double h) {
    SolverConfig c;
    c.method = m;
    c.h = h;
    return c;
  }
  static SolverConfig adaptive(double rtol, double atol) {
    SolverConfig c;
    c.method = Method::kDopri54;
    c.rtol = rtol;
    c.atol = atol;
    return c;
  }

  void check() const {
    if (method != Method::kDopri54 && !(h > 0.0)) throw ValidationError("step size must be positive");
    if (method == Method::kDopri54 && (!(rtol > 0.0) || !(atol > 0.0))) {
      throw ValidationError("rtol and atol must be positive");
    }
    if (!(h_max > 0.0)) throw ValidationError("h_max must be positive");
  }
};

// Ascending boundary points t_0 < t_1 < ... < t_n covering [lo, hi].
struct Segmentation {
  std::vector<double> bounds;

  static Segmentation build(double lo, double hi, std::vector<double> interior) {
    if (!(hi > lo)) throw ValidationError("segmentation needs hi > lo");
    const double tol = 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
    std::sort(interior.begin(), interior.end());
    Segmentation s;
    s.bounds.push_back(lo);
    for (double p : interior) {
      if (p > lo + tol && p < hi - tol && p > s.bounds.back() + tol) s.bounds.push_back(p);
    }
    s.bounds.push_back(hi);
    return s;
  }

  std::size_t segments() const { return bounds.size() - 1; }
  double lo() const { return bounds.front(); }
  double hi() const { return bounds.back(); }
  double length(std::size_t i) const { return bounds[i + 1] - bounds[i]; }

  // N_i = ceil(len_i / h), guarding against round-up from representation error.
  static long substeps(double len, double h) {
    const double ratio = len / h;
    const double n = std::ceil(ratio * (1.0 - 1e-12));
    return std::max(1L, static_cast<long>(n));
  }
};

struct GridSolution {
  std::vector<double> times;  // ascending
  std::vector<std::vector<double>> values;
  bool dense = false;
  std::size_t field_evaluations = 0;
  std::size_t rejected_steps = 0;

  const std::vector<double>& front() const { return values.front(); }
  const std::vector<double>& back() const { return values.back(); }

  // Value recorded at time t (nearest recorded point within tolerance).
  const std::vector<double>& at(double t) const {
    auto it = std::lower_bound(times.begin(), times.end(), t - 1e-12 * std::max(1.0, std::abs(t)));
    if (it == times.end() || std::abs(*it - t) > 1e-9 * std::max(1.0, std::abs(t))) {
      throw NumericalError("no recorded solution at t=" + expr::format_double(t));
    }
    return values[static_cast<std::size_t>(it - times.begin())];
  }
};

enum class Direction { kBackward, kForward };

namespace detail {

struct DopriTableau {
  static constexpr std::array<double, 7> c{0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0};
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                          a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                          a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                          a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
  // 5th-order minus embedded 4th-order weights.
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                          e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
};

template <class FieldFn>
class SegmentStepper {
 public:
  SegmentStepper(const FieldFn& field, std::size_t n, Direction dir, std::size_t& evals)
      : field_(field), n_(n), dir_(dir), evals_(evals) {
    for (auto& k : k_) k.resize(n);
    tmp_.resize(n);
  }

  void begin(double lo, double hi) {
    lo_ = lo;
    hi_ = hi;
    len_ = hi - lo;
  }
  double length() const { return len_; }

  // Evaluate the field at progress theta in [0, len] along the segment.
  void eval(double theta, const std::vector<double>& y, std::vector<double>& dy) {
    double t;
    Side side;
    const bool at_start = theta <= 0.0;
    const bool at_end = theta >= len_ * (1.0 - 1e-12);
    if (dir_ == Direction::kBackward) {
      t = at_end ? lo_ : (at_start ? hi_ : hi_ - theta);
      side = at_start ? Side::kLeft : (at_end ? Side::kRight : Side::kInterior);
    } else {
      t = at_end ? hi_ : (at_start ? lo_ : lo_ + theta);
      side = at_start ? Side::kRight : (at_end ? Side::kLeft : Side::kInterior);
    }
    field_(t, side, std::span<const double>(y), std::span<double>(dy));
    ++evals_;
  }

  void combine(const std::vector<double>& y, double h, std::initializer_list<std::pair<int, double>> terms,
               std::vector<double>& out) {
    for (std::size_t i = 0; i < n_; ++i) {
      double acc = 0.0;
      for (const auto& [k, w] : terms) acc += w * k_[static_cast<std::size_t>(k)][i];
      out[i] = y[i] + h * acc;
    }
  }

  void fixed_step(Method m, double theta, double h, std::vector<double>& y) {
    switch (m) {
      case Method::kEuler:
        eval(theta, y, k_[0]);
        combine(y, h, {{0, 1.0}}, y);
        break;
      case Method::kRk2:
        eval(theta, y, k_[0]);
        combine(y, 0.5 * h, {{0, 1.0}}, tmp_);
        eval(theta + 0.5 * h, tmp_, k_[1]);
        combine(y, h, {{1, 1.0}}, y);
        break;
      case Method::kRk4:
        eval(theta, y, k_[0]);
        combine(y, 0.5 * h, {{0, 1.0}}, tmp_);
        eval(theta + 0.5 * h, tmp_, k_[1]);
        combine(y, 0.5 * h, {{1, 1.0}}, tmp_);
        eval(theta + 0.5 * h, tmp_, k_[2]);
        combine(y, h, {{2, 1.0}}, tmp_);
        eval(theta + h, tmp_, k_[3]);
        combine(y, h / 6.0, {{0, 1.0}, {1, 2.0}, {2, 2.0}, {3, 1.0}}, y);
        break;
      default:
        break;
    }
  }

  // One embedded 5(4) attempt from theta with step h. Writes the candidate
  // into y_new and returns the scaled error norm. k_[0] must hold f(theta, y).
  double dopri_attempt(double theta, double h, bool to_end, const std::vector<double>& y,
                       std::vector<double>& y_new, double rtol, double atol) {
    using T = DopriTableau;
    combine(y, h, {{0, T::a21}}, tmp_);
    eval(theta + T::c[1] * h, tmp_, k_[1]);
    combine(y, h, {{0, T::a31}, {1, T::a32}}, tmp_);
    eval(theta + T::c[2] * h, tmp_, k_[2]);
    combine(y, h, {{0, T::a41}, {1, T::a42}, {2, T::a43}}, tmp_);
    eval(theta + T::c[3] * h, tmp_, k_[3]);
    combine(y, h, {{0, T::a51}, {1, T::a52}, {2, T::a53}, {3, T::a54}}, tmp_);
    eval(theta + T::c[4] * h, tmp_, k_[4]);
    combine(y, h, {{0, T::a61}, {1, T::a62}, {2, T::a63}, {3, T::a64}, {4, T::a65}}, tmp_);
    eval(to_end ? len_ : theta + h, tmp_, k_[5]);
    combine(y, h, {{0, T::a71}, {2, T::a73}, {3, T::a74}, {4, T::a75}, {5, T::a76}}, y_new);
    eval(to_end ? len_ : theta + h, y_new, k_[6]);
    double sum = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double e = h * (T::e1 * k_[0][i] + T::e3 * k_[2][i] + T::e4 * k_[3][i] +
                            T::e5 * k_[4][i] + T::e6 * k_[5][i] + T::e7 * k_[6][i]);
      const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      sum += (e / sc) * (e / sc);
    }
    return n_ == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(n_));
  }

  std::vector<double>& k(std::size_t i) { return k_[i]; }

 private:
  const FieldFn& field_;
  std::size_t n_;
  Direction dir_;
  std::size_t& evals_;
  double lo_ = 0.0, hi_ = 0.0, len_ = 0.0;
  std::array<std::vector<double>, 7> k_;
  std::vector<double> tmp_;
};

inline void require_finite(const std::vector<double>& y, double t) {
  for (double v : y) {
    if (!std::isfinite(v)) {
      throw NumericalError("non-finite solution value at t=" + expr::format_double(t));
    }
  }
}

}  // namespace detail

// Integrate across `seg` starting from `initial` at the start of travel
// (hi for backward, lo for forward). `field(t, side, y, dy)` fills dy;
// `jump(t, y)` is applied once at every interior boundary after the segment
// preceding it in travel order has been integrated.
template <class FieldFn, class JumpFn>
GridSolution integrate(const FieldFn& field, std::vector<double> initial, const Segmentation& seg,
                       const JumpFn& jump, const SolverConfig& cfg, Direction dir) {
  cfg.check();
  const std::size_t n = initial.size();
  GridSolution out;
  detail::SegmentStepper<FieldFn> stepper(field, n, dir, out.field_evaluations);
  std::vector<double> y = std::move(initial);
  std::vector<double> y_new(n);

  const std::size_t nseg = seg.segments();
  auto record = [&](double t, bool boundary) {
    if (cfg.record == Record::kSteps || (boundary && cfg.record == Record::kBoundaries)) {
      out.times.push_back(t);
      out.values.push_back(y);
    }
  };
  record(dir == Direction::kBackward ? seg.hi() : seg.lo(), true);

  double h_adapt = cfg.h_max;
  for (std::size_t s = 0; s < nseg; ++s) {
    const std::size_t idx = dir == Direction::kBackward ? nseg - 1 - s : s;
    const double lo = seg.bounds[idx];
    const double hi = seg.bounds[idx + 1];
    stepper.begin(lo, hi);
    const double len = hi - lo;
    auto time_of = [&](double theta) {
      return dir == Direction::kBackward ? hi - theta : lo + theta;
    };

    if (cfg.method != Method::kDopri54) {
      const long steps = Segmentation::substeps(len, cfg.h);
      const double hi_step = len / static_cast<double>(steps);
      for (long k = 0; k < steps; ++k) {
        const double theta = static_cast<double>(k) * hi_step;
        const double h = (k + 1 == steps) ? len - theta : hi_step;
        stepper.fixed_step(cfg.method, theta, h, y);
        const double t_now = (k + 1 == steps) ? (dir == Direction::kBackward ? lo : hi)
                                              : time_of(theta + h);
        detail::require_finite(y, t_now);
        if (k + 1 < steps) record(t_now, false);
      }
    } else {
      double theta = 0.0;
      double h = std::min({h_adapt, cfg.h_max, len});
      stepper.eval(0.0, y, stepper.k(0));
      for (;;) {
        bool to_end = false;
        if (theta + h >= len * (1.0 - 1e-13)) {
          h = len - theta;
          to_end = true;
        }
        if (h < 1e-14 * len) {
          throw NumericalError("step size underflow at t=" + expr::format_double(time_of(theta)));
        }
        const double err = stepper.dopri_attempt(theta, h, to_end, y, y_new, cfg.rtol, cfg.atol);
        if (!std::isfinite(err)) {
          // Treat as a rejection; a smaller step may stay in range.
          ++out.rejected_steps;
          h *= 0.2;
          continue;
        }
        const double factor =
            err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        if (err <= 1.0) {
          theta = to_end ? len : theta + h;
          y.swap(y_new);
          detail::require_finite(y, time_of(theta));
          // FSAL: the last stage is f at the new point.
          std::swap(stepper.k(0), stepper.k(6));
          if (to_end) {
            h_adapt = std::min(h * factor, cfg.h_max);
            break;
          }
          record(time_of(theta), false);
          h = std::min(h * factor, cfg.h_max);
        } else {
          ++out.rejected_steps;
          h *= factor;
        }
      }
    }

    const double t_end = dir == Direction::kBackward ? lo : hi;
    const bool interior = s + 1 < nseg;
    if (interior) jump(t_end, y);
    record(t_end, true);
  }

  if (dir == Direction::kBackward) {
    std::reverse(out.times.begin(), out.times.end());
    std::reverse(out.values.begin(), out.values.end());
  }
  if (cfg.record == Record::kEndpoint) {
    out.times.push_back(dir == Direction::kBackward ? seg.lo() : seg.hi());
    out.values.push_back(y);
  }
  return out;
}

template <class FieldFn, class JumpFn>
GridSolution integrate_backward(const FieldFn& field, std::vector<double> terminal,
                                const Segmentation& seg, const JumpFn& jump,
                                const SolverConfig& cfg) {
  return integrate(field, std::move(terminal), seg, jump, cfg, Direction::kBackward);
}

template <class FieldFn>
GridSolution integrate_forward(const FieldFn& field, std::vector<double> initial,
                               const Segmentation& seg, const SolverConfig& cfg) {
  return integrate(field, std::move(initial), seg, [](double, std::span<double>) {}, cfg,
                   Direction::kForward);
}

}  // namespace mjr
