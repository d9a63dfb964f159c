#include "lipgeo/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "lipgeo/catalog.hpp"
#include "lipgeo/config.hpp"
#include "lipgeo/diagnostics.hpp"
#include "lipgeo/errors.hpp"
#include "lipgeo/filippov.hpp"
#include "lipgeo/integrator.hpp"

namespace lipgeo::cli {

using json = nlohmann::ordered_json;

void write_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid()) + "." +
                          std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::config, "cannot open '" + tmp + "' for writing");
    out << contents;
    out.flush();
    if (!out) fail(ErrorKind::config, "write to '" + tmp + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorKind::config, "cannot move output into place at '" + path + "'");
  }
}

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::invalid_argument:
    case ErrorKind::domain:
    case ErrorKind::signature:
    case ErrorKind::precondition:
    case ErrorKind::oracle_domain:
      return kValidationError;
    default:
      return kSolverError;
  }
}

json vec_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Flags shared by integrate / compare / sweep. Values are applied on top of
// the --config file.
struct RunFlags {
  std::string config_path;
  std::string metric;
  std::vector<std::string> params;
  std::vector<double> x0, v0, tspan;
  std::string solver;
  double eps = 0.0, step = 0.0;
  double rel_tol = 0.0, abs_tol = 0.0, event_tol = 0.0;
  int max_events = 0, tie_break = 0;
  std::uint64_t seed = 0;
  std::string out, events;

  CLI::Option* o_eps = nullptr;
  CLI::Option* o_step = nullptr;
  CLI::Option* o_rel = nullptr;
  CLI::Option* o_abs = nullptr;
  CLI::Option* o_evt = nullptr;
  CLI::Option* o_maxev = nullptr;
  CLI::Option* o_tie = nullptr;
  CLI::Option* o_seed = nullptr;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON run configuration");
    app->add_option("--metric", metric, "catalog metric: flat, kink1d, conformal2d, rosen");
    app->add_option("--param", params, "metric parameter NAME=VALUE (repeatable)");
    app->add_option("--x0", x0, "initial coordinates")->allow_extra_args()->expected(1, 64);
    app->add_option("--v0", v0, "initial velocity")->allow_extra_args()->expected(1, 64);
    app->add_option("--tspan", tspan, "T0 T1")->expected(2);
    app->add_option("--solver", solver, "filippov | caratheodory | regularized");
    o_eps = app->add_option("--eps", eps, "mollifier width for the regularized solver");
    o_step = app->add_option("--step", step, "fixed step for the Caratheodory solver");
    o_rel = app->add_option("--rel-tol", rel_tol);
    o_abs = app->add_option("--abs-tol", abs_tol);
    o_evt = app->add_option("--event-tol", event_tol);
    o_maxev = app->add_option("--max-events", max_events);
    o_tie = app->add_option("--tie-break", tie_break, "+1 or -1");
    o_seed = app->add_option("--seed", seed);
    app->add_option("--out", out, "output path");
  }

  // Applies everything except x0/v0/tspan requirements; returns the merged
  // (unvalidated) configuration.
  RunConfig merge() const {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (!metric.empty() && metric != cfg.metric) {
      cfg.metric = metric;
      if (config_path.empty() || metric != "inline") cfg.inline_metric.reset();
      cfg.params.clear();
    }
    for (const auto& p : params) {
      const auto eq = p.find('=');
      if (eq == std::string::npos || eq == 0)
        fail(ErrorKind::config, "--param: expected NAME=VALUE, got '" + p + "'");
      const std::string key = p.substr(0, eq);
      try {
        std::size_t used = 0;
        const double v = std::stod(p.substr(eq + 1), &used);
        if (used != p.size() - eq - 1) throw std::invalid_argument("trailing");
        cfg.params[key] = v;
      } catch (const std::exception&) {
        fail(ErrorKind::config, "--param " + key + ": not a number");
      }
    }
    if (!x0.empty()) cfg.x0 = x0;
    if (!v0.empty()) cfg.v0 = v0;
    if (!tspan.empty()) {
      cfg.t0 = tspan[0];
      cfg.t1 = tspan[1];
    }
    if (!solver.empty()) {
      if (solver == "filippov") cfg.solver = SolverKind::filippov;
      else if (solver == "caratheodory") cfg.solver = SolverKind::caratheodory;
      else if (solver == "regularized") cfg.solver = SolverKind::regularized;
      else fail(ErrorKind::config, "--solver: expected filippov, caratheodory or regularized");
    }
    if (o_eps->count()) cfg.epsilon = eps;
    if (o_step->count()) cfg.step = step;
    if (o_rel->count()) cfg.integrator.rel_tol = rel_tol;
    if (o_abs->count()) cfg.integrator.abs_tol = abs_tol;
    if (o_evt->count()) cfg.integrator.event_tol = event_tol;
    if (o_maxev->count()) cfg.integrator.max_events = max_events;
    if (o_tie->count()) cfg.integrator.tie_break = tie_break;
    if (o_seed->count()) cfg.seed = seed;
    if (!out.empty()) cfg.trajectory_path = out;
    if (!events.empty()) cfg.events_path = events;
    return cfg;
  }
};

// Canonical resolved configuration: params with defaults filled in.
RunConfig resolved(RunConfig cfg) {
  cfg.validate();
  if (cfg.metric != "inline") cfg.params = catalog_model(cfg.metric, cfg.params).params;
  return cfg;
}

json config_json(const RunConfig& cfg) { return json::parse(write_run_config(cfg, -1)); }

Trajectory solve(const RunConfig& cfg, const MetricModel& model) {
  const GeodesicState z0{to_vector(cfg.x0), to_vector(cfg.v0)};
  switch (cfg.solver) {
    case SolverKind::filippov:
      return integrate_filippov(model, z0, cfg.t0, cfg.t1, cfg.integrator);
    case SolverKind::caratheodory:
      return integrate_caratheodory(model, z0, cfg.t0, cfg.t1, cfg.step, cfg.integrator.tie_break);
    case SolverKind::regularized:
      return integrate_regularized(model, cfg.epsilon, z0, cfg.t0, cfg.t1, cfg.integrator);
  }
  fail(ErrorKind::config, "unknown solver");
}

std::string trajectory_csv(const Trajectory& traj, const RunConfig& cfg) {
  const int n = traj.position_dim;
  std::ostringstream os;
  os << "# lipgeo trajectory format_version=" << kFormatVersion << "\n";
  os << "# config " << write_run_config(cfg, -1) << "\n";
  os << "t";
  for (int i = 1; i <= n; ++i) os << ",x" << i;
  for (int i = 1; i <= n; ++i) os << ",v" << i;
  os << "\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    os << fmt(traj.times[k]);
    for (Eigen::Index i = 0; i < traj.states[k].size(); ++i) os << "," << fmt(traj.states[k][i]);
    os << "\n";
  }
  return os.str();
}

json events_json(const Trajectory& traj, const RunConfig& cfg) {
  json j;
  j["format_version"] = kFormatVersion;
  j["config"] = config_json(cfg);
  j["solver"] = std::string(to_string(traj.tag));
  j["termination"] = std::string(to_string(traj.termination));
  j["message"] = traj.message;
  j["t_last"] = traj.t_last();
  const auto c1 = velocity_jump(traj);
  j["max_velocity_jump"] = c1.max_velocity_jump;
  json evs = json::array();
  for (std::size_t i = 0; i < traj.events.size(); ++i) {
    const auto& e = traj.events[i];
    json ej;
    ej["time"] = e.time;
    ej["kind"] = std::string(to_string(e.kind));
    ej["surface"] = e.surface;
    ej["flagged"] = e.flagged;
    ej["note"] = e.note;
    ej["velocity_jump"] = c1.per_event_jumps[i];
    ej["state_before"] = vec_json(e.state_before);
    ej["state_after"] = vec_json(e.state_after);
    evs.push_back(std::move(ej));
  }
  j["events"] = std::move(evs);
  return j;
}

void emit(const std::string& path, const std::string& contents, std::ostream& out) {
  if (path.empty() || path == "-") out << contents;
  else write_atomic(path, contents);
}

// --- integrate --------------------------------------------------------------

int cmd_integrate(const RunFlags& flags, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = resolved(flags.merge());
  const MetricModel model = resolve_model(cfg);
  const Trajectory traj = solve(cfg, model);
  emit(cfg.trajectory_path, trajectory_csv(traj, cfg), out);
  std::string events_path = cfg.events_path;
  if (events_path.empty() && !cfg.trajectory_path.empty() && cfg.trajectory_path != "-")
    events_path = cfg.trajectory_path + ".events.json";
  if (!events_path.empty()) write_atomic(events_path, events_json(traj, cfg).dump(2) + "\n");
  if (!traj.completed()) {
    err << "lipgeo: error[" << to_string(traj.termination) << "]: " << one_line(traj.message)
        << " (t = " << fmt(traj.t_last()) << ")\n";
    return kSolverError;
  }
  return kOk;
}

// --- compare ----------------------------------------------------------------

int cmd_compare(const RunFlags& flags, const std::string& scenario_name, std::ostream& out,
                std::ostream& err) {
  RunConfig cfg = flags.merge();
  if (cfg.metric == "inline") fail(ErrorKind::config, "compare: inline metrics are not supported");
  const CatalogEntry entry = catalog_model(cfg.metric, cfg.params);
  const Scenario sc = catalog_scenario(entry, scenario_name);
  if (flags.x0.empty()) cfg.x0.assign(sc.z0.x.data(), sc.z0.x.data() + sc.z0.x.size());
  if (flags.v0.empty()) cfg.v0.assign(sc.z0.v.data(), sc.z0.v.data() + sc.z0.v.size());
  if (flags.tspan.empty()) {
    cfg.t0 = sc.t0;
    cfg.t1 = sc.t1;
  }
  cfg = resolved(cfg);
  const GeodesicState z0{to_vector(cfg.x0), to_vector(cfg.v0)};

  const Trajectory fil = integrate_filippov(entry.model, z0, cfg.t0, cfg.t1, cfg.integrator);
  const Trajectory car =
      integrate_caratheodory(entry.model, z0, cfg.t0, cfg.t1, cfg.step, cfg.integrator.tie_break);
  const Trajectory reg = integrate_regularized(entry.model, cfg.epsilon, z0, cfg.t0, cfg.t1, cfg.integrator);

  json j;
  j["format_version"] = kFormatVersion;
  j["config"] = config_json(cfg);
  j["scenario"] = scenario_name;
  json runs;
  for (const auto* t : {&fil, &car, &reg}) {
    json r;
    r["termination"] = std::string(to_string(t->termination));
    r["t_last"] = t->t_last();
    r["events"] = t->events.size();
    r["steps"] = t->steps_taken;
    r["final_state"] = vec_json(t->final_state());
    runs[std::string(to_string(t->tag))] = std::move(r);
  }
  j["runs"] = std::move(runs);
  j["max_dev_caratheodory"] = max_position_deviation(fil, car);
  j["max_dev_regularized"] = max_position_deviation(fil, reg);
  if (entry.has_oracle()) {
    const int n = entry.model.dim();
    const double hi = fil.t_last();
    double dx = 0.0, dv = 0.0;
    constexpr int kGrid = 2001;
    for (int i = 0; i < kGrid; ++i) {
      const double t = i + 1 == kGrid ? hi : cfg.t0 + (hi - cfg.t0) * i / (kGrid - 1);
      const Vector z = fil.dense.eval(t);
      const auto ex = exact_geodesic(entry, z0, t - cfg.t0);
      dx = std::max(dx, (z.head(n) - ex.x).lpNorm<Eigen::Infinity>());
      dv = std::max(dv, (z.tail(n) - ex.v).lpNorm<Eigen::Infinity>());
    }
    j["max_dev_exact"] = dx;
    j["max_dev_exact_velocity"] = dv;
  } else {
    j["max_dev_exact"] = nullptr;
    j["max_dev_exact_velocity"] = nullptr;
  }
  j["max_velocity_jump"] = velocity_jump(fil).max_velocity_jump;
  emit(cfg.trajectory_path, j.dump(2) + "\n", out);
  for (const auto* t : {&fil, &car, &reg}) {
    if (!t->completed()) {
      err << "lipgeo: error[" << to_string(t->termination) << "]: " << to_string(t->tag)
          << " run ended early: " << one_line(t->message) << "\n";
      return kSolverError;
    }
  }
  return kOk;
}

// --- sweep ------------------------------------------------------------------

struct SweepRow {
  RunConfig cfg;
  std::string termination;
  std::string message;
  std::size_t events = 0;
  double t_last = 0.0;
  Vector final_state;
  double jump = 0.0;
  double drift = std::nan("");
};

int cmd_sweep(const RunFlags& flags, const std::vector<double>& vary_x,
              const std::vector<double>& vary_v, int count, int jobs, std::ostream& out,
              std::ostream& err) {
  const RunConfig base = resolved(flags.merge());
  if (count < 1) fail(ErrorKind::config, "--count must be >= 1");
  if (jobs < 1) fail(ErrorKind::config, "--jobs must be >= 1");
  if (vary_x.empty() && vary_v.empty()) fail(ErrorKind::config, "sweep needs --vary-x or --vary-v");
  auto check_vary = [&](const std::vector<double>& v, std::size_t dim, const char* name) {
    if (v.empty()) return;
    if (v[0] != std::floor(v[0]) || v[0] < 0 || v[0] >= static_cast<double>(dim))
      fail(ErrorKind::config, std::string(name) + ": INDEX out of range");
  };
  check_vary(vary_x, base.x0.size(), "--vary-x");
  check_vary(vary_v, base.v0.size(), "--vary-v");

  std::vector<SweepRow> rows(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    RunConfig c = base;
    const double s = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    if (!vary_x.empty()) c.x0[static_cast<std::size_t>(vary_x[0])] = vary_x[1] + s * (vary_x[2] - vary_x[1]);
    if (!vary_v.empty()) c.v0[static_cast<std::size_t>(vary_v[0])] = vary_v[1] + s * (vary_v[2] - vary_v[1]);
    rows[static_cast<std::size_t>(i)].cfg = std::move(c);
  }

  const MetricModel model = resolve_model(base);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < rows.size();) {
      auto& row = rows[i];
      try {
        row.cfg.validate();
        const Trajectory t = solve(row.cfg, model);
        row.termination = std::string(to_string(t.termination));
        row.message = t.message;
        row.events = t.events.size();
        row.t_last = t.t_last();
        row.final_state = t.final_state();
        row.jump = velocity_jump(t).max_velocity_jump;
        try {
          row.drift = energy_drift(t, model);
        } catch (const Error&) {
        }
      } catch (const Error& e) {
        row.termination = "error:" + std::string(to_string(e.kind()));
        row.message = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const int n_threads = std::min<int>(jobs, count);
  for (int k = 1; k < n_threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  const std::size_t n = base.x0.size();
  std::ostringstream os;
  os << "# lipgeo sweep format_version=" << kFormatVersion << "\n";
  os << "# config " << write_run_config(base, -1) << "\n";
  os << "run";
  for (std::size_t i = 1; i <= n; ++i) os << ",x0_" << i;
  for (std::size_t i = 1; i <= n; ++i) os << ",v0_" << i;
  os << ",termination,events,t_last";
  for (std::size_t i = 1; i <= n; ++i) os << ",x" << i;
  for (std::size_t i = 1; i <= n; ++i) os << ",v" << i;
  os << ",max_velocity_jump,energy_drift\n";
  bool errors = false;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    os << r;
    for (double x : row.cfg.x0) os << "," << fmt(x);
    for (double v : row.cfg.v0) os << "," << fmt(v);
    os << "," << row.termination << "," << row.events << "," << fmt(row.t_last);
    for (std::size_t i = 0; i < 2 * n; ++i)
      os << "," << (row.final_state.size() == static_cast<Eigen::Index>(2 * n) ? fmt(row.final_state[i]) : "");
    os << "," << fmt(row.jump) << "," << (std::isnan(row.drift) ? "" : fmt(row.drift)) << "\n";
    if (row.termination.rfind("error:", 0) == 0) {
      errors = true;
      err << "lipgeo: error[sweep]: run " << r << ": " << one_line(row.message) << "\n";
    }
  }
  emit(base.trajectory_path, os.str(), out);
  return errors ? kSolverError : kOk;
}

// --- verify -----------------------------------------------------------------

struct Check {
  std::string entry;
  std::string invariant;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  // "<", "<=", ">=", "in", "=="
  bool pass = false;
  std::string detail;
};

class Verifier {
 public:
  Verifier(std::uint64_t seed, int fan, bool inject) : seed_(seed), fan_(fan), inject_(inject) {}

  void run_entry(const std::string& name, const std::vector<std::string>& suites) {
    CatalogEntry entry = catalog_model(name);
    if (inject_) {
      auto orig = entry.model.derivative;
      entry.model.derivative = [orig](const Vector& x, const Region& r) {
        auto dg = orig(x, r);
        for (auto& m : dg) m = -m;
        return dg;
      };
    }
    auto wants = [&](const char* s) {
      return std::find(suites.begin(), suites.end(), "all") != suites.end() ||
             std::find(suites.begin(), suites.end(), s) != suites.end();
    };
    if (wants("christoffel")) christoffel_fd(entry);
    if (wants("lipschitz") && entry.name != "flat") lipschitz(entry);
    if (wants("oracle") && entry.has_oracle() && entry.name != "flat") oracle_equation(entry);

    std::vector<Scenario> fan;
    if (entry.model.surfaces.empty()) fan.push_back(catalog_scenario(entry));
    else fan = crossing_fan(entry, fan_);
    std::vector<Trajectory> runs;
    for (const auto& sc : fan) runs.push_back(integrate_filippov(entry.model, sc.z0, sc.t0, sc.t1));

    if (wants("c1")) {
      double worst = 0.0;
      for (const auto& t : runs) worst = std::max(worst, velocity_jump(t).max_velocity_jump);
      add(entry.name, "c1_velocity_jump", worst, "<", 1e-6);
    }
    if (wants("inclusion")) {
      double worst = 0.0;
      for (std::size_t i = 0; i < runs.size(); ++i)
        worst = std::max(worst, inclusion_residual(runs[i], entry.model, 200, seed_ + i).max);
      add(entry.name, "inclusion_residual", worst, "<", 1e-6);
    }
    if (wants("energy")) {
      double worst = 0.0;
      for (const auto& t : runs) {
        const bool sliding = std::any_of(t.events.begin(), t.events.end(),
                                         [](const Event& e) { return e.kind == ContactKind::sliding; });
        if (!sliding) worst = std::max(worst, energy_drift(t, entry.model));
      }
      add(entry.name, "energy_drift", worst, "<", 1e-8);
    }
    if (wants("oracle") && entry.has_oracle()) {
      double worst = 0.0;
      for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& t = runs[i];
        const int n = entry.model.dim();
        for (int k = 0; k <= 200; ++k) {
          const double tt = fan[i].t0 + (t.t_last() - fan[i].t0) * k / 200.0;
          const auto ex = exact_geodesic(entry, fan[i].z0, tt - fan[i].t0);
          worst = std::max(worst, (t.dense.eval(tt).head(n) - ex.x).lpNorm<Eigen::Infinity>());
        }
      }
      add(entry.name, "oracle_agreement", worst, "<", 1e-6);
    }
    if (wants("completion")) {
      std::size_t incomplete = 0;
      for (const auto& t : runs) incomplete += !t.completed();
      add(entry.name, "fan_runs_completed", static_cast<double>(incomplete), "==", 0.0);
    }
    if (wants("totality")) totality(entry);
    if (wants("regularization") && (entry.name == "kink1d" || entry.name == "rosen")) {
      const auto sc = catalog_scenario(entry);
      try {
        const auto r = regularization_convergence(entry, sc.z0, sc.t0, sc.t1, {1e-1, 1e-2, 1e-3});
        add(entry.name, "regularization_decreasing", r.strictly_decreasing ? 1.0 : 0.0, "==", 1.0);
        add(entry.name, "regularization_order", r.order, ">=", 0.8);
        add(entry.name, "regularization_final_error", r.errors.back(), "<", 1e-3);
      } catch (const Error& e) {
        add(entry.name, "regularization", 0.0, "==", 1.0, e.what());
      }
    }
    if (wants("holder") && (entry.name == "kink1d" || entry.name == "conformal2d")) {
      double worst = 0.0, worst_r2 = 1.0;
      int fits = 0;
      for (const auto& t : runs) {
        if (t.events.empty()) continue;
        const double gap = t.events.size() > 1 ? t.events[1].time - t.events[0].time : 1.0;
        try {
          const auto h = holder_fit(t, 0, std::min({0.05, 0.5 * gap, t.t_last() - t.events[0].time}));
          worst = std::max(worst, std::abs(h.beta_fit - h.beta_predicted));
          worst_r2 = std::min(worst_r2, h.r_squared);
          ++fits;
        } catch (const Error&) {
        }
      }
      add(entry.name, "holder_beta_deviation", fits > 0 ? worst : 1.0, "<=", 0.1);
      add(entry.name, "holder_r_squared", worst_r2, ">", 0.99);
    }
  }

  void run_global(const std::vector<std::string>& suites) {
    auto wants = [&](const char* s) {
      return std::find(suites.begin(), suites.end(), "all") != suites.end() ||
             std::find(suites.begin(), suites.end(), s) != suites.end();
    };
    if (wants("filippov")) {
      const auto sys = demo_system("sign1d");
      const Vector origin = Vector::Zero(1);
      const auto exact = filippov_set(sys, origin);
      Vector lo(1), hi(1);
      lo << -1.0;
      hi << 1.0;
      const double dev = std::max(exact.distance(lo), exact.distance(hi));
      add("demo", "piecewise_sign_segment", dev, "<=", 1e-12);
      FilippovMapConfig fc;
      fc.delta_ladder = {0.1, 0.01};
      fc.seed = seed_;
      const AeField f = [](const Vector& x) -> std::optional<Vector> {
        Vector v(1);
        v << (x[0] > 0.0 ? -1.0 : x[0] < 0.0 ? 1.0 : 0.0);
        return v;
      };
      const auto sampled = filippov_sampled(f, origin, fc);
      add("demo", "sampled_sign_segment", hausdorff(sampled.set, ConvexSet::segment(lo, hi)), "<", 5e-2);
    }
    if (wants("sliding")) {
      const auto sys = demo_system("sliding");
      Vector z0(2);
      z0 << 1.0, -1.0;
      const auto t = integrate_filippov(sys, z0, 0.0, 3.0);
      double dev = 0.0;
      for (int k = 0; k <= 200; ++k) {
        const double tt = 1.0 + 2.0 * k / 200.0;
        const Vector z = t.dense.eval(tt);
        dev = std::max(dev, std::max(std::abs(z[0]), std::abs(z[1] - (tt - 1.0))));
      }
      add("demo", "sliding_path", dev, "<", 1e-8);
    }
  }

  const std::vector<Check>& checks() const { return checks_; }
  bool all_pass() const {
    return std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.pass; });
  }

 private:
  void add(const std::string& entry, const std::string& inv, double value, const std::string& rel,
           double threshold, std::string detail = {}) {
    bool pass = false;
    if (rel == "<") pass = value < threshold;
    else if (rel == "<=") pass = value <= threshold;
    else if (rel == ">=") pass = value >= threshold;
    else if (rel == ">") pass = value > threshold;
    else if (rel == "==") pass = value == threshold;
    if (!std::isfinite(value)) pass = false;
    checks_.push_back({entry, inv, value, threshold, rel, pass, std::move(detail)});
  }

  void christoffel_fd(const CatalogEntry& entry) {
    const int n = entry.model.dim();
    std::mt19937_64 rng(seed_);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      Vector x(n);
      for (int i = 0; i < n; ++i) x[i] = u(rng);
      if (!entry.model.surfaces.empty() && std::abs(entry.model.surfaces[0].sigma(x)) < 0.05) continue;
      const auto a = christoffel(entry.model, x, ChristoffelMode::analytic);
      const auto f = christoffel(entry.model, x, ChristoffelMode::finite_difference, 1e-4);
      worst = std::max(worst, a.max_abs_diff(f));
    }
    add(entry.name, "christoffel_fd_agreement", worst, "<", 1e-6);
  }

  void lipschitz(const CatalogEntry& entry) {
    const double est = lipschitz_estimate(entry.model, 10000, seed_);
    add(entry.name, "lipschitz_bound", est, "<=", entry.model.lipschitz_bound.value_or(0.0));
  }

  void oracle_equation(const CatalogEntry& entry) {
    const int n = entry.model.dim();
    const auto fan = crossing_fan(entry, 10);
    double worst = 0.0;
    int used = 0;
    for (const auto& sc : fan) {
      for (int k = 0; k < 10; ++k) {
        const double t = (sc.t1 - sc.t0) * (k + 0.5) / 10.0;
        const double h = 1e-3;
        const auto z = exact_geodesic(entry, sc.z0, t);
        auto second_diff = [&](double hh) {
          return Vector((exact_geodesic(entry, sc.z0, t + hh).x - 2.0 * z.x +
                         exact_geodesic(entry, sc.z0, t - hh).x) / (hh * hh));
        };
        bool smooth = true;
        for (const auto& s : entry.model.surfaces) {
          const double a = s.sigma(exact_geodesic(entry, sc.z0, t - h).x);
          const double b = s.sigma(exact_geodesic(entry, sc.z0, t + h).x);
          if ((a <= 0.0) != (b <= 0.0) || std::abs(s.sigma(z.x)) < 1e-2) smooth = false;
        }
        if (!smooth) continue;
        // Richardson: O(h^4)
        const Vector acc = (4.0 * second_diff(0.5 * h) - second_diff(h)) / 3.0;
        const Vector rhs = geodesic_rhs(entry.model, z).tail(n);
        worst = std::max(worst, (acc - rhs).lpNorm<Eigen::Infinity>());
        ++used;
      }
    }
    add(entry.name, "oracle_equation_consistency", used > 0 ? worst : 1.0, "<", 1e-6);
  }

  void totality(const CatalogEntry& entry) {
    const int n = entry.model.dim();
    std::mt19937_64 rng(seed_ + 17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int silent = 0;
    for (int k = 0; k < 100; ++k) {
      Vector x(n), v(n);
      for (int i = 0; i < n; ++i) {
        x[i] = u(rng);
        v[i] = 2.0 * u(rng);
      }
      if (!entry.model.chart.contains(x)) x[0] = 0.0;
      try {
        const auto t = integrate_filippov(entry.model, GeodesicState{x, v}, 0.0, 2.0);
        const bool covered = t.completed() && t.t_last() == 2.0;
        const bool declared = !t.completed() && !t.message.empty();
        if (!covered && !declared) ++silent;
      } catch (const Error&) {
        ++silent;
      }
    }
    add(entry.name, "totality_silent_failures", silent, "==", 0.0);
  }

  std::uint64_t seed_;
  int fan_;
  bool inject_;
  std::vector<Check> checks_;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

int cmd_verify(const std::string& suite, const std::string& entries, const std::string& report,
               std::uint64_t seed, int fan, const std::string& fault, std::ostream& out) {
  static const std::vector<std::string> known{"all", "christoffel", "lipschitz", "oracle", "c1",
                                              "inclusion", "energy", "completion", "totality",
                                              "regularization", "holder", "filippov", "sliding"};
  const auto suites = split_list(suite);
  if (suites.empty()) fail(ErrorKind::config, "--suite: empty");
  for (const auto& s : suites)
    if (std::find(known.begin(), known.end(), s) == known.end())
      fail(ErrorKind::config, "--suite: unknown suite '" + s + "'");
  const auto names = split_list(entries);
  for (const auto& n : names)
    if (std::find(catalog_names().begin(), catalog_names().end(), n) == catalog_names().end())
      fail(ErrorKind::config, "--entries: unknown metric '" + n + "'");
  if (!fault.empty() && fault != "christoffel-sign")
    fail(ErrorKind::config, "--inject-fault: unknown fault '" + fault + "'");
  if (fan < 2) fail(ErrorKind::config, "--fan must be >= 2");

  Verifier v(seed, fan, !fault.empty());
  for (const auto& n : names) v.run_entry(n, suites);
  v.run_global(suites);

  json j;
  j["format_version"] = kFormatVersion;
  j["config"] = {{"suite", suite}, {"entries", names}, {"seed", seed}, {"fan", fan},
                 {"inject_fault", fault}};
  json arr = json::array();
  for (const auto& c : v.checks()) {
    out << (c.pass ? "PASS " : "FAIL ") << c.entry << " " << c.invariant << " = " << fmt(c.value)
        << " (" << c.relation << " " << fmt(c.threshold) << ")";
    if (!c.detail.empty()) out << " " << one_line(c.detail);
    out << "\n";
    json cj;
    cj["entry"] = c.entry;
    cj["invariant"] = c.invariant;
    cj["value"] = std::isfinite(c.value) ? json(c.value) : json(nullptr);
    cj["relation"] = c.relation;
    cj["threshold"] = c.threshold;
    cj["pass"] = c.pass;
    if (!c.detail.empty()) cj["detail"] = c.detail;
    arr.push_back(std::move(cj));
  }
  j["checks"] = std::move(arr);
  j["pass"] = v.all_pass();
  if (!report.empty()) write_atomic(report, j.dump(2) + "\n");
  return v.all_pass() ? kOk : kVerifyFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Filippov geodesics of Lipschitz semi-Riemannian metrics", "lipgeo"};
  app.require_subcommand(1);

  RunFlags integrate_flags, compare_flags, sweep_flags;
  auto* integrate = app.add_subcommand("integrate", "integrate one geodesic, write CSV + event log");
  integrate_flags.attach(integrate);
  integrate->add_option("--events", integrate_flags.events, "event log path (JSON)");

  auto* compare = app.add_subcommand("compare", "Filippov vs Caratheodory vs regularized vs exact");
  compare_flags.attach(compare);
  std::string scenario = "crossing";
  compare->add_option("--scenario", scenario, "named scenario of the metric");

  auto* sweep = app.add_subcommand("sweep", "grid of initial conditions, one CSV row per run");
  sweep_flags.attach(sweep);
  std::vector<double> vary_x, vary_v;
  int count = 11, jobs = 1;
  sweep->add_option("--vary-x", vary_x, "INDEX FROM TO")->expected(3)->allow_extra_args();
  sweep->add_option("--vary-v", vary_v, "INDEX FROM TO")->expected(3)->allow_extra_args();
  sweep->add_option("--count", count, "grid size");
  sweep->add_option("--jobs", jobs, "parallel runs");

  auto* verify = app.add_subcommand("verify", "diagnostics suite, pass/fail per invariant");
  std::string suite = "all", entries = "flat,kink1d,conformal2d,rosen", report, fault;
  std::uint64_t vseed = 0;
  int fan = 20;
  verify->add_option("--suite", suite, "all or a comma-separated list of suites");
  verify->add_option("--entries", entries, "comma-separated catalog metrics");
  verify->add_option("--report", report, "JSON report path");
  verify->add_option("--seed", vseed);
  verify->add_option("--fan", fan, "initial conditions per entry");
  verify->add_option("--inject-fault", fault)->group("");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "lipgeo: error[usage]: " << one_line(e.what()) << "\n";
    return kValidationError;
  }

  try {
    if (*integrate) return cmd_integrate(integrate_flags, out, err);
    if (*compare) return cmd_compare(compare_flags, scenario, out, err);
    if (*sweep) return cmd_sweep(sweep_flags, vary_x, vary_v, count, jobs, out, err);
    if (*verify) return cmd_verify(suite, entries, report, vseed, fan, fault, out);
  } catch (const Error& e) {
    err << "lipgeo: error[" << to_string(e.kind()) << "]: " << one_line(e.what()) << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "lipgeo: error[internal]: " << one_line(e.what()) << "\n";
    return kSolverError;
  }
  return kValidationError;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace lipgeo::cli
