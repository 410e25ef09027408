#pragma once

// JSON model files.
//
//   {
//     "name": "...",
//     "model": {"states": d, "rates": [{"from": 0, "to": 1, "expr": "2 + sin(t)"}]}
//            | {"builtin": {"name": "prendiville", "params": {...}}},
//     "rewards": {
//       "rate": [{"state": "all" | x, "expr": ...}],
//       "jump": [{"from": x, "to": y, "dist": DIST}],
//       "scheduled": {"times": {"kind": "arithmetic", "start": a, "step": s}
//                            | {"kind": "explicit", "values": [...]},
//                     "dist": DIST | "dist_per_state": [DIST, ...]},
//       "external": {"intensity": [{"state": "all" | x, "expr": ...}],
//                    "dist": DIST | "dist_per_state": [DIST, ...]}
//     },
//     "initial": {"kind": "point", "state": x} | {"kind": "pmf", "p": [...]}
//              | {"kind": "truncated_geometric", "ratio": r},
//     "breakpoints": {"points": [...], "period": p, "offsets": [...]},
//     "bounds": {"lambda_bar": [...], "beta_bar": [...]},
//     "period": p
//   }
//
//   DIST = {"kind": "deterministic", "value": v}
//        | {"kind": "beta", "alpha": a, "beta": b, "scale": v, "shift": v}
//        | {"kind": "affine_beta_sum", "offset": v,
//           "components": [{"count": n, "alpha": a, "beta": b, "scale": v}]}
//
// A value v is a number or an expression string in t and x. Unknown keys are
// rejected. With "builtin", any other section present replaces the built-in
// model's section.

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mjr/core.hpp"
#include "mjr/models.hpp"

namespace mjr {

namespace detail {

using json = nlohmann::json;

inline void allow_keys(const json& j, const std::string& where,
                       std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [k, _] : j.items()) {
    bool ok = false;
    for (const char* a : keys) ok = ok || k == a;
    if (!ok) throw ValidationError(where + ": unknown key '" + k + "'");
  }
}

inline const json& need(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) throw ValidationError(where + ": missing key '" + key + "'");
  return j.at(key);
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ValidationError(where + ": expected a number");
  return j.get<double>();
}

inline int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ValidationError(where + ": expected an integer");
  return j.get<int>();
}

inline std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + ": expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

inline TimeFunction time_function(const json& j, const std::string& where) {
  if (j.is_number()) return TimeFunction::constant(j.get<double>());
  if (!j.is_string()) throw ValidationError(where + ": expected a number or expression string");
  try {
    return TimeFunction(j.get<std::string>());
  } catch (const ParseError& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

inline LumpDistribution dist(const json& j, const std::string& where) {
  const std::string kind = need(j, where, "kind").get<std::string>();
  if (kind == "deterministic") {
    allow_keys(j, where, {"kind", "value"});
    return LumpDistribution::deterministic(time_function(need(j, where, "value"), where + ".value"));
  }
  if (kind == "beta") {
    allow_keys(j, where, {"kind", "alpha", "beta", "scale", "shift"});
    return LumpDistribution::beta(
        number(need(j, where, "alpha"), where + ".alpha"), number(need(j, where, "beta"), where + ".beta"),
        j.contains("scale") ? time_function(j["scale"], where + ".scale") : TimeFunction::constant(1.0),
        j.contains("shift") ? time_function(j["shift"], where + ".shift") : TimeFunction::constant(0.0));
  }
  if (kind == "affine_beta_sum") {
    allow_keys(j, where, {"kind", "offset", "components"});
    std::vector<BetaComponent> comps;
    const json& cs = need(j, where, "components");
    if (!cs.is_array()) throw ValidationError(where + ".components: expected an array");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const std::string w = where + ".components[" + std::to_string(i) + "]";
      allow_keys(cs[i], w, {"count", "alpha", "beta", "scale"});
      comps.push_back({integer(need(cs[i], w, "count"), w + ".count"),
                       number(need(cs[i], w, "alpha"), w + ".alpha"),
                       number(need(cs[i], w, "beta"), w + ".beta"),
                       cs[i].contains("scale") ? time_function(cs[i]["scale"], w + ".scale")
                                               : TimeFunction::constant(1.0)});
    }
    return LumpDistribution::affine_beta_sum(
        j.contains("offset") ? time_function(j["offset"], where + ".offset") : TimeFunction::constant(0.0),
        std::move(comps));
  }
  throw ValidationError(where + ": unknown distribution kind '" + kind + "'");
}

// [{"state": "all" | x, "expr": ...}] expanded to one function per state.
inline std::vector<TimeFunction> per_state(const json& j, int d, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + ": expected an array");
  std::vector<TimeFunction> out(static_cast<std::size_t>(d), TimeFunction::constant(0.0));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    allow_keys(j[i], w, {"state", "expr"});
    const TimeFunction f = time_function(need(j[i], w, "expr"), w + ".expr");
    const json& s = need(j[i], w, "state");
    if (s.is_string() && s.get<std::string>() == "all") {
      for (auto& g : out) g = f;
    } else {
      const int x = integer(s, w + ".state");
      if (x < 0 || x >= d) throw ValidationError(w + ".state: out of range");
      out[static_cast<std::size_t>(x)] = f;
    }
  }
  return out;
}

inline std::vector<LumpDistribution> laws_per_state(const json& j, int d, const std::string& where) {
  const bool one = j.contains("dist");
  const bool many = j.contains("dist_per_state");
  if (one == many) throw ValidationError(where + ": give exactly one of 'dist' and 'dist_per_state'");
  if (one) return std::vector<LumpDistribution>(static_cast<std::size_t>(d), dist(j["dist"], where + ".dist"));
  const json& arr = j["dist_per_state"];
  if (!arr.is_array() || static_cast<int>(arr.size()) != d) {
    throw ValidationError(where + ".dist_per_state: expected one entry per state");
  }
  std::vector<LumpDistribution> out;
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(dist(arr[i], where + ".dist_per_state[" + std::to_string(i) + "]"));
  return out;
}

inline ModelSpec builtin_from_json(const json& j) {
  allow_keys(j, "model.builtin", {"name", "params"});
  const std::string name = need(j, "model.builtin", "name").get<std::string>();
  const json params = j.value("params", json::object());
  auto param = [&](const char* key, double dflt) {
    return params.contains(key) ? number(params[key], std::string("model.builtin.params.") + key) : dflt;
  };
  if (name == "two_state") {
    allow_keys(params, "model.builtin.params", {"a", "b", "r0", "r1"});
    return stationary_two_state(param("a", 1.0), param("b", 1.0), param("r0", 1.0), param("r1", 0.0));
  }
  if (name == "poisson") {
    allow_keys(params, "model.builtin.params", {"beta"});
    return poisson_example(param("beta", 2.0));
  }
  allow_keys(params, "model.builtin.params", {});
  return builtin_model(name);
}

}  // namespace detail

inline ModelSpec model_from_json(const nlohmann::json& j) {
  using detail::need;
  detail::allow_keys(j, "model file",
                     {"name", "model", "rewards", "initial", "breakpoints", "bounds", "period"});
  const auto& mj = need(j, "model file", "model");
  ModelSpec m;
  const bool builtin = mj.contains("builtin");
  if (builtin) {
    detail::allow_keys(mj, "model", {"builtin"});
    m = detail::builtin_from_json(mj["builtin"]);
  } else {
    detail::allow_keys(mj, "model", {"states", "rates"});
    m.d = detail::integer(need(mj, "model", "states"), "model.states");
    if (m.d < 1) throw ValidationError("model.states: must be positive");
    const auto& rs = need(mj, "model", "rates");
    if (!rs.is_array()) throw ValidationError("model.rates: expected an array");
    for (std::size_t i = 0; i < rs.size(); ++i) {
      const std::string w = "model.rates[" + std::to_string(i) + "]";
      detail::allow_keys(rs[i], w, {"from", "to", "expr"});
      m.rates.push_back({detail::integer(need(rs[i], w, "from"), w + ".from"),
                         detail::integer(need(rs[i], w, "to"), w + ".to"),
                         detail::time_function(need(rs[i], w, "expr"), w + ".expr")});
    }
    m.initial = InitialDistribution::point(0);
  }
  if (j.contains("name")) m.name = j["name"].get<std::string>();

  if (j.contains("rewards")) {
    const auto& rj = j["rewards"];
    detail::allow_keys(rj, "rewards", {"rate", "jump", "scheduled", "external"});
    m.rewards = RewardSpec{};
    if (rj.contains("rate")) m.rewards.rate = detail::per_state(rj["rate"], m.d, "rewards.rate");
    if (rj.contains("jump")) {
      const auto& js = rj["jump"];
      if (!js.is_array()) throw ValidationError("rewards.jump: expected an array");
      for (std::size_t i = 0; i < js.size(); ++i) {
        const std::string w = "rewards.jump[" + std::to_string(i) + "]";
        detail::allow_keys(js[i], w, {"from", "to", "dist"});
        m.rewards.jump.push_back({detail::integer(need(js[i], w, "from"), w + ".from"),
                                  detail::integer(need(js[i], w, "to"), w + ".to"),
                                  detail::dist(need(js[i], w, "dist"), w + ".dist")});
      }
    }
    if (rj.contains("scheduled")) {
      const auto& sj = rj["scheduled"];
      detail::allow_keys(sj, "rewards.scheduled", {"times", "dist", "dist_per_state"});
      const auto& tj = need(sj, "rewards.scheduled", "times");
      const std::string kind = need(tj, "rewards.scheduled.times", "kind").get<std::string>();
      if (kind == "arithmetic") {
        detail::allow_keys(tj, "rewards.scheduled.times", {"kind", "start", "step"});
        m.rewards.scheduled.times = ScheduleSpec::arithmetic(
            detail::number(need(tj, "rewards.scheduled.times", "start"), "rewards.scheduled.times.start"),
            detail::number(need(tj, "rewards.scheduled.times", "step"), "rewards.scheduled.times.step"));
      } else if (kind == "explicit") {
        detail::allow_keys(tj, "rewards.scheduled.times", {"kind", "values"});
        m.rewards.scheduled.times = ScheduleSpec::explicit_times(
            detail::numbers(need(tj, "rewards.scheduled.times", "values"), "rewards.scheduled.times.values"));
      } else {
        throw ValidationError("rewards.scheduled.times: unknown kind '" + kind + "'");
      }
      m.rewards.scheduled.law = detail::laws_per_state(sj, m.d, "rewards.scheduled");
    }
    if (rj.contains("external")) {
      const auto& ej = rj["external"];
      detail::allow_keys(ej, "rewards.external", {"intensity", "dist", "dist_per_state"});
      ExternalRewards ext;
      ext.intensity = detail::per_state(need(ej, "rewards.external", "intensity"), m.d, "rewards.external.intensity");
      ext.law = detail::laws_per_state(ej, m.d, "rewards.external");
      m.rewards.external = std::move(ext);
    }
  } else if (!builtin) {
    m.rewards = RewardSpec{};
  }

  if (j.contains("initial")) {
    const auto& ij = j["initial"];
    const std::string kind = need(ij, "initial", "kind").get<std::string>();
    if (kind == "point") {
      detail::allow_keys(ij, "initial", {"kind", "state"});
      m.initial = InitialDistribution::point(detail::integer(need(ij, "initial", "state"), "initial.state"));
    } else if (kind == "pmf") {
      detail::allow_keys(ij, "initial", {"kind", "p"});
      const auto p = detail::numbers(need(ij, "initial", "p"), "initial.p");
      double total = 0.0;
      for (double v : p) {
        if (v < 0.0) throw ValidationError("initial.p: entries must be non-negative");
        total += v;
      }
      if (std::abs(total - 1.0) > 1e-12) throw ValidationError("initial.p: entries must sum to 1");
      m.initial = InitialDistribution::pmf(p);
    } else if (kind == "truncated_geometric") {
      detail::allow_keys(ij, "initial", {"kind", "ratio"});
      m.initial = InitialDistribution::truncated_geometric(
          detail::number(need(ij, "initial", "ratio"), "initial.ratio"));
    } else {
      throw ValidationError("initial: unknown kind '" + kind + "'");
    }
  }

  if (j.contains("breakpoints")) {
    const auto& bj = j["breakpoints"];
    detail::allow_keys(bj, "breakpoints", {"points", "period", "offsets"});
    m.breakpoints = BreakpointSet{};
    if (bj.contains("points")) m.breakpoints.points = detail::numbers(bj["points"], "breakpoints.points");
    if (bj.contains("period")) m.breakpoints.period = detail::number(bj["period"], "breakpoints.period");
    if (bj.contains("offsets")) m.breakpoints.period_offsets = detail::numbers(bj["offsets"], "breakpoints.offsets");
  }

  if (j.contains("bounds")) {
    const auto& bj = j["bounds"];
    detail::allow_keys(bj, "bounds", {"lambda_bar", "beta_bar"});
    m.bounds = SimBounds{};
    if (bj.contains("lambda_bar")) m.bounds.lambda_bar = detail::numbers(bj["lambda_bar"], "bounds.lambda_bar");
    if (bj.contains("beta_bar")) m.bounds.beta_bar = detail::numbers(bj["beta_bar"], "bounds.beta_bar");
  }

  if (j.contains("period")) {
    if (j["period"].is_null()) {
      m.period.reset();
    } else {
      const double p = detail::number(j["period"], "period");
      if (!(p > 0.0)) throw ValidationError("period: must be positive");
      m.period = p;
    }
  }
  check_structure(m);
  return m;
}

inline ModelSpec load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("model file '" + path + "' is not valid JSON: " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("model file '" + path + "': " + e.what());
  }
  try {
    return model_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("model file '" + path + "': " + e.what());
  }
}

}  // namespace mjr
