// mjr: command-line front end for the reward-moment library.
//
// Exit codes: 0 success, 1 validation failure, 2 numerical failure, 3 usage.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mjr/mjr.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kNumerical = 2;
constexpr int kUsage = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Level { kError = 0, kInfo = 1, kDebug = 2 };

Level log_level() {
  const char* env = std::getenv("MJP_LOG");
  if (env == nullptr) return Level::kInfo;
  const std::string v(env);
  if (v == "error") return Level::kError;
  if (v == "debug") return Level::kDebug;
  return Level::kInfo;
}

void log(Level lvl, const std::string& msg) {
  static const Level current = log_level();
  if (lvl > current) return;
  static const char* tags[] = {"error", "info", "debug"};
  std::cerr << "[" << tags[static_cast<int>(lvl)] << "] " << msg << '\n';
}

class Timer {
 public:
  explicit Timer(std::string what) : what_(std::move(what)), start_(std::chrono::steady_clock::now()) {}
  ~Timer() {
    const auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::ostringstream os;
    os << what_ << " took " << dt << " s";
    log(Level::kInfo, os.str());
  }

 private:
  std::string what_;
  std::chrono::steady_clock::time_point start_;
};

std::string fmt(double v) { return mjr::expr::format_double(v); }

std::string sig12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open '" + path + "' for writing");
  return out;
}

void write_json(const nlohmann::json& j, const std::string& path) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string("bad number '") + item + "' in " + what);
    }
  }
  return out;
}

struct SolverFlags {
  std::string method = "dopri54";
  double h = 1.0 / 64;
  double rtol = 1e-10;
  double atol = 1e-12;

  void add(CLI::App* cmd) {
    // "--h" is the step size, so help is "--help" only.
    cmd->set_help_flag("--help", "print this help message and exit");
    cmd->add_option("--method", method, "euler, rk2, rk4 or dopri54")->capture_default_str();
    cmd->add_option("--h", h, "fixed step size")->capture_default_str();
    cmd->add_option("--rtol", rtol, "dopri54 relative tolerance")->capture_default_str();
    cmd->add_option("--atol", atol, "dopri54 absolute tolerance")->capture_default_str();
  }
  mjr::SolverConfig config() const {
    mjr::SolverConfig c;
    try {
      c.method = mjr::parse_method(method);
    } catch (const mjr::ValidationError& e) {
      throw UsageError(e.what());
    }
    c.h = h;
    c.rtol = rtol;
    c.atol = atol;
    c.check();
    return c;
  }
};

mjr::ModelSpec load(const std::string& path) {
  log(Level::kDebug, "loading " + path);
  return mjr::load_model(path);
}

int cmd_validate(const std::string& config, double horizon) {
  const mjr::ModelSpec m = load(config);
  mjr::ValidationOptions opt;
  opt.horizon = horizon;
  const auto rep = mjr::validate_model(m, opt);
  std::cout << rep.to_string();
  return rep.valid() ? kOk : kValidation;
}

int cmd_moments(const std::string& config, double t, const SolverFlags& sf, const std::string& out) {
  const mjr::ModelSpec m = load(config);
  mjr::MomentSolution s = [&] {
    Timer timer("moment solve");
    return mjr::solve_moments(m, t, sf.config());
  }();
  std::cout << "E R(t) = " << sig12(s.mean()) << '\n' << "Var R(t) = " << sig12(s.variance()) << '\n';
  log(Level::kDebug, "field evaluations: " + std::to_string(s.field_evaluations));
  if (!out.empty()) {
    auto f = open_out(out);
    f << 's';
    for (int x = 0; x < m.d; ++x) f << ",m_" << x;
    for (int x = 0; x < m.d; ++x) f << ",v_" << x;
    f << ",V\n";
    for (std::size_t i = 0; i < s.times.size(); ++i) {
      f << fmt(s.times[i]);
      for (double v : s.m[i]) f << ',' << fmt(v);
      for (double v : s.v[i]) f << ',' << fmt(v);
      f << ',' << fmt(s.V[i]) << '\n';
    }
  }
  return kOk;
}

int cmd_simulate(const std::string& config, double t, std::size_t paths, std::uint64_t seed,
                 unsigned workers, const std::string& per_path, const std::string& out) {
  const mjr::ModelSpec m = load(config);
  const mjr::SampleStats st = [&] {
    Timer timer("simulation of " + std::to_string(paths) + " paths");
    return mjr::monte_carlo(m, t, paths, seed, workers);
  }();
  nlohmann::json j;
  j["horizon"] = t;
  j["n_paths"] = st.n;
  j["seed"] = seed;
  j["mean"] = st.mean;
  j["variance"] = st.variance;
  j["se_mean"] = st.se_mean;
  j["se_variance"] = st.se_variance;
  std::cout << j.dump(2) << '\n';
  if (!out.empty()) write_json(j, out);
  if (!per_path.empty()) {
    auto f = open_out(per_path);
    f << "path_index,R,integrated,jump,scheduled,external\n";
    for (std::size_t i = 0; i < st.samples.size(); ++i) {
      const auto& s = st.samples[i];
      f << i << ',' << fmt(s.total()) << ',' << fmt(s.integrated) << ',' << fmt(s.jump) << ','
        << fmt(s.scheduled) << ',' << fmt(s.external) << '\n';
    }
  }
  return kOk;
}

int cmd_coverage(const std::string& config, const std::string& times, const std::string& levels,
                 std::size_t paths, std::uint64_t seed, unsigned workers, const SolverFlags& sf,
                 const std::string& out) {
  const auto ts = parse_list(times, "--times");
  const auto ps = parse_list(levels, "--levels");
  if (ps.empty()) throw mjr::ValidationError("--levels must list at least one level");
  const mjr::ModelSpec m = load(config);
  const auto table = [&] {
    Timer timer("coverage study");
    return mjr::coverage_study(m, ts, ps, paths, seed, workers, sf.config());
  }();
  std::ostringstream csv;
  csv << "t,p,quantile,coverage,ci_halfwidth\n";
  for (const auto& r : table.rows) {
    csv << fmt(r.t) << ',' << fmt(r.p) << ',' << fmt(r.quantile) << ',' << fmt(r.coverage) << ','
        << fmt(r.halfwidth) << '\n';
  }
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    open_out(out) << csv.str();
  }
  return kOk;
}

int cmd_periodic(const std::string& config, int grid, const SolverFlags& sf, const std::string& out,
                 const std::string& rho_csv) {
  const mjr::ModelSpec m = load(config);
  if (!m.period) throw mjr::ValidationError("model does not declare a period; periodic constants need one");
  const auto c = [&] {
    Timer timer("periodic constants");
    return mjr::solve_periodic(m, sf.config(), grid);
  }();
  nlohmann::json j;
  j["alpha"] = c.alpha;
  j["sigma2"] = c.sigma2;
  j["pi0"] = c.pi0;
  j["k"] = c.k;
  std::cout << j.dump(2) << '\n';
  std::cout << "seam residual = " << fmt(c.seam_residual) << '\n';
  std::cout << "fredholm residual = " << fmt(c.fredholm_residual) << '\n';
  if (!out.empty()) write_json(j, out);
  if (!rho_csv.empty()) {
    auto f = open_out(rho_csv);
    f << "s";
    for (std::size_t x = 0; x < c.pi0.size(); ++x) f << ",rho_" << x;
    f << '\n';
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      f << fmt(c.grid[i] * c.period);
      for (double v : c.rho[i]) f << ',' << fmt(v);
      f << '\n';
    }
  }
  return kOk;
}

int cmd_reset(const std::string& config, int periods, const SolverFlags& sf, const std::string& out) {
  const mjr::ModelSpec m = load(config);
  mjr::ResetSpec spec;
  spec.laws = {m.initial.vector(m.d)};
  spec.periods = periods;
  const auto res = [&] {
    Timer timer("resetting solve");
    return mjr::solve_resetting(m, spec, sf.config());
  }();
  for (const auto& w : res.warnings) log(Level::kError, "warning: " + w);
  std::ostringstream csv;
  csv << "period,E_delta,Var_delta,E_cum,Var_cum\n";
  for (const auto& r : res.rows) {
    csv << r.period << ',' << fmt(r.mean) << ',' << fmt(r.variance) << ',' << fmt(r.cum_mean) << ','
        << fmt(r.cum_variance) << '\n';
  }
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    open_out(out) << csv.str();
  }
  return kOk;
}

int cmd_mixing(const std::string& config, double s, double umax, double step, const SolverFlags& sf,
               const std::string& out) {
  const mjr::ModelSpec m = load(config);
  const auto prof = [&] {
    Timer timer("mixing profile");
    return mjr::mixing_profile(m, s, umax, step, sf.config());
  }();
  std::ostringstream csv;
  csv << "u,tv\n";
  for (const auto& p : prof) csv << fmt(p.u) << ',' << fmt(p.tv) << '\n';
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    open_out(out) << csv.str();
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean, variance and normal approximation of cumulative rewards in time-varying Markov jump processes"};
  app.require_subcommand(1);

  std::string config;
  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "model JSON file")->required()->check(CLI::ExistingFile);
  };
  std::string out;
  unsigned workers = mjr::default_workers();
  std::uint64_t seed = 1;
  std::size_t paths = 10000;
  double t = 1.0;

  auto* validate = app.add_subcommand("validate", "check modelling assumptions");
  add_config(validate);
  double horizon = 64.0;
  validate->add_option("--horizon", horizon, "probe window [0, horizon]")->capture_default_str();

  auto* moments = app.add_subcommand("moments", "E R(t) and Var R(t) by backward ODEs");
  add_config(moments);
  moments->add_option("--t", t, "horizon")->required();
  SolverFlags sf_moments;
  sf_moments.add(moments);
  moments->add_option("--out", out, "CSV of the solution grid");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo reward samples");
  add_config(simulate);
  simulate->add_option("--t", t, "horizon")->required();
  simulate->add_option("--paths", paths)->capture_default_str();
  simulate->add_option("--seed", seed)->capture_default_str();
  simulate->add_option("--workers", workers, "worker threads (default: hardware concurrency)");
  std::string per_path;
  simulate->add_option("--per-path", per_path, "CSV with one row per path");
  simulate->add_option("--out", out, "also write the summary JSON here");

  auto* coverage = app.add_subcommand("coverage", "normal-approximation quantile coverage");
  add_config(coverage);
  std::string times, levels;
  coverage->add_option("--times", times, "comma-separated horizons")->required();
  coverage->add_option("--levels", levels, "comma-separated probabilities")->required();
  coverage->add_option("--paths", paths)->capture_default_str();
  coverage->add_option("--seed", seed)->capture_default_str();
  coverage->add_option("--workers", workers, "worker threads (default: hardware concurrency)");
  SolverFlags sf_coverage;
  sf_coverage.add(coverage);
  coverage->add_option("--out", out, "CSV output (default: stdout)");

  auto* periodic = app.add_subcommand("periodic", "long-run constants alpha and sigma2");
  add_config(periodic);
  int grid = 1024;
  periodic->add_option("--grid", grid, "grid points per period")->capture_default_str();
  SolverFlags sf_periodic;
  sf_periodic.add(periodic);
  periodic->add_option("--out", out, "JSON output");
  std::string rho_csv;
  periodic->add_option("--rho-csv", rho_csv, "CSV of rho over one period");

  auto* reset = app.add_subcommand("reset", "per-period statistics with resetting at integer times");
  add_config(reset);
  int periods = 1;
  reset->add_option("--periods", periods)->required();
  SolverFlags sf_reset;
  sf_reset.add(reset);
  reset->add_option("--out", out, "CSV output (default: stdout)");

  auto* mixing = app.add_subcommand("mixing", "row-distance profile of P(s, s+u)");
  add_config(mixing);
  double s = 0.0, umax = 1.0, step = 0.1;
  mixing->add_option("--s", s)->capture_default_str();
  mixing->add_option("--umax", umax)->capture_default_str();
  mixing->add_option("--step", step)->capture_default_str();
  SolverFlags sf_mixing;
  sf_mixing.add(mixing);
  mixing->add_option("--out", out, "CSV output (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*validate) return cmd_validate(config, horizon);
    if (*moments) return cmd_moments(config, t, sf_moments, out);
    if (*simulate) return cmd_simulate(config, t, paths, seed, workers, per_path, out);
    if (*coverage) return cmd_coverage(config, times, levels, paths, seed, workers, sf_coverage, out);
    if (*periodic) return cmd_periodic(config, grid, sf_periodic, out, rho_csv);
    if (*reset) return cmd_reset(config, periods, sf_reset, out);
    if (*mixing) return cmd_mixing(config, s, umax, step, sf_mixing, out);
  } catch (const UsageError& e) {
    log(Level::kError, e.what());
    return kUsage;
  } catch (const mjr::ValidationError& e) {
    log(Level::kError, e.what());
    return kValidation;
  } catch (const mjr::ParseError& e) {
    log(Level::kError, e.what());
    return kValidation;
  } catch (const mjr::Error& e) {
    log(Level::kError, e.what());
    return kNumerical;
  } catch (const std::exception& e) {
    log(Level::kError, e.what());
    return kNumerical;
  }
  return kUsage;
}
