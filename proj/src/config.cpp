#include "lipgeo/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "json.hpp"
#include "lipgeo/errors.hpp"

namespace lipgeo {

using json = nlohmann::ordered_json;

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::filippov: return "filippov";
    case SolverKind::caratheodory: return "caratheodory";
    case SolverKind::regularized: return "regularized";
  }
  return "unknown";
}

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& msg) {
  fail(ErrorKind::config, path + ": " + msg);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

void only_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) bad(path.empty() ? "config" : path, "expected an object");
  for (const auto& [k, _] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) bad(join(path, k), "unknown key '" + k + "'");
  }
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) bad(path, "must be finite");
  return x;
}

long long integer(const json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<long long>();
  if (j.is_number_float()) {
    const double x = j.get<double>();
    if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9e15) return static_cast<long long>(x);
  }
  bad(path, "expected an integer");
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) bad(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) bad(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], index_path(path, i)));
  return out;
}

InlineMetric parse_inline(const json& j, const std::string& path) {
  only_keys(j, path, {"name", "signature", "switch_coordinate", "switch_offset", "components"});
  InlineMetric m;
  if (j.contains("name")) m.name = text(j["name"], join(path, "name"));
  if (!j.contains("signature")) bad(join(path, "signature"), "required");
  const auto& sig = j["signature"];
  if (!sig.is_array()) bad(join(path, "signature"), "expected an array of +1/-1");
  for (std::size_t i = 0; i < sig.size(); ++i)
    m.signature.push_back(static_cast<int>(integer(sig[i], index_path(join(path, "signature"), i))));
  if (j.contains("switch_coordinate"))
    m.switch_coordinate = static_cast<int>(integer(j["switch_coordinate"], join(path, "switch_coordinate")));
  if (j.contains("switch_offset")) m.switch_offset = number(j["switch_offset"], join(path, "switch_offset"));
  if (!j.contains("components")) bad(join(path, "components"), "required");
  const auto& comps = j["components"];
  const std::string cpath = join(path, "components");
  if (!comps.is_array()) bad(cpath, "expected an array");
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const std::string p = index_path(cpath, k);
    only_keys(comps[k], p, {"i", "j", "minus", "plus"});
    InlineComponent c;
    for (const char* key : {"i", "j", "minus", "plus"})
      if (!comps[k].contains(key)) bad(join(p, key), "required");
    c.i = static_cast<int>(integer(comps[k]["i"], join(p, "i")));
    c.j = static_cast<int>(integer(comps[k]["j"], join(p, "j")));
    c.minus = numbers(comps[k]["minus"], join(p, "minus"));
    c.plus = numbers(comps[k]["plus"], join(p, "plus"));
    m.components.push_back(std::move(c));
  }
  return m;
}

json inline_to_json(const InlineMetric& m) {
  json j;
  j["name"] = m.name;
  j["signature"] = m.signature;
  j["switch_coordinate"] = m.switch_coordinate;
  j["switch_offset"] = m.switch_offset;
  json comps = json::array();
  for (const auto& c : m.components) {
    json cj;
    cj["i"] = c.i;
    cj["j"] = c.j;
    cj["minus"] = c.minus;
    cj["plus"] = c.plus;
    comps.push_back(std::move(cj));
  }
  j["components"] = std::move(comps);
  return j;
}

double poly(const std::vector<double>& c, double s) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * s + *it;
  return v;
}

double poly_slope(const std::vector<double>& c, double s) {
  double v = 0.0;
  for (std::size_t k = c.size(); k-- > 1;) v = v * s + static_cast<double>(k) * c[k];
  return v;
}

}  // namespace

MetricModel build_inline_model(const InlineMetric& spec) {
  const int n = static_cast<int>(spec.signature.size());
  if (n < 1) bad("inline_metric.signature", "must not be empty");
  for (std::size_t i = 0; i < spec.signature.size(); ++i)
    if (spec.signature[i] != 1 && spec.signature[i] != -1)
      bad(index_path("inline_metric.signature", i), "entries must be +1 or -1");
  if (spec.switch_coordinate < 0 || spec.switch_coordinate >= n)
    bad("inline_metric.switch_coordinate", "out of range");
  if (!std::isfinite(spec.switch_offset)) bad("inline_metric.switch_offset", "must be finite");
  std::set<std::pair<int, int>> seen;
  for (std::size_t k = 0; k < spec.components.size(); ++k) {
    const auto& c = spec.components[k];
    const std::string p = index_path("inline_metric.components", k);
    if (c.i < 0 || c.i >= n || c.j < 0 || c.j >= n) bad(p, "index out of range");
    if (!seen.insert({std::min(c.i, c.j), std::max(c.i, c.j)}).second) bad(p, "duplicate component");
    if (c.minus.empty() || c.plus.empty()) bad(p, "polynomials need at least one coefficient");
    const double a = c.minus.front(), b = c.plus.front();
    if (std::abs(a - b) > 1e-12 * (1.0 + std::abs(a) + std::abs(b)))
      bad(p, "pieces disagree at the switch (metric must be continuous)");
  }

  const int sw = spec.switch_coordinate;
  const double off = spec.switch_offset;
  const auto comps = spec.components;
  auto build = [n, sw, off, comps](const Vector& x, int side) {
    const double s = x[sw] - off;
    Matrix g = Matrix::Zero(n, n);
    for (const auto& c : comps) g(c.i, c.j) = g(c.j, c.i) = poly(side > 0 ? c.plus : c.minus, s);
    return g;
  };
  MetricModel m;
  m.name = spec.name;
  m.chart = ChartSpec::unbounded(spec.signature);
  m.eval = [build, sw, off](const Vector& x) { return build(x, x[sw] - off > 0.0 ? 1 : -1); };
  m.piece = [build](const Vector& x, const Region& r) { return build(x, r[0]); };
  m.derivative = [n, sw, off, comps](const Vector& x, const Region& r) {
    const double s = x[sw] - off;
    std::vector<Matrix> dg(n, Matrix::Zero(n, n));
    for (const auto& c : comps)
      dg[sw](c.i, c.j) = dg[sw](c.j, c.i) = poly_slope(r[0] > 0 ? c.plus : c.minus, s);
    return dg;
  };
  m.surfaces.push_back(SwitchingSurface::coordinate(sw, off, "x" + std::to_string(sw + 1) + "=" + num(off)));

  Vector at = Vector::Zero(n);
  at[sw] = off;
  const Matrix g = build(at, 1);
  if (!(std::abs(g.determinant()) > m.degeneracy_floor)) bad("inline_metric", "metric is degenerate on the switch");
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  int negative = 0;
  for (int i = 0; i < n; ++i) negative += es.eigenvalues()[i] < 0.0;
  if (negative != m.chart.negative_count()) bad("inline_metric.signature", "does not match the metric on the switch");
  return m;
}

void RunConfig::validate() const {
  MetricModel model;
  if (metric == "inline") {
    if (!inline_metric) bad("inline_metric", "required when metric is \"inline\"");
    model = build_inline_model(*inline_metric);
    if (!params.empty()) bad("params", "not used by inline metrics");
  } else {
    if (inline_metric) bad("inline_metric", "only allowed when metric is \"inline\"");
    bool known = false;
    for (const auto& n : catalog_names()) known = known || n == metric;
    if (!known) bad("metric", "unknown metric '" + metric + "'");
    try {
      model = catalog_model(metric, params).model;
    } catch (const Error& e) {
      bad("params", e.what());
    }
  }
  const auto n = static_cast<std::size_t>(model.dim());
  if (x0.size() != n) bad("x0", "expected " + std::to_string(n) + " coordinates");
  if (v0.size() != n) bad("v0", "expected " + std::to_string(n) + " components");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x0[i])) bad(index_path("x0", i), "must be finite");
    if (!std::isfinite(v0[i])) bad(index_path("v0", i), "must be finite");
  }
  if (!model.chart.contains(Eigen::Map<const Vector>(x0.data(), static_cast<Eigen::Index>(n))))
    bad("x0", "outside the chart of " + metric);
  if (!std::isfinite(t0) || !std::isfinite(t1)) bad("tspan", "must be finite");
  if (!(t1 > t0)) bad("tspan", "t1 must exceed t0");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) bad("epsilon", "must be positive");
  if (!(step > 0.0) || !std::isfinite(step)) bad("step", "must be positive");
  if (solver == SolverKind::regularized && metric == "inline")
    bad("solver", "inline metrics have no mollified variant");
  try {
    integrator.validate();
  } catch (const Error& e) {
    fail(ErrorKind::config, std::string("tolerances.") + e.what());
  }
}

RunConfig parse_run_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::config, std::string("config: invalid JSON: ") + e.what());
  }
  only_keys(j, "", {"format_version", "metric", "params", "inline_metric", "x0", "v0", "tspan",
                    "solver", "epsilon", "step", "tolerances", "seed", "output"});
  RunConfig c;
  if (j.contains("format_version") && integer(j["format_version"], "format_version") != kFormatVersion)
    bad("format_version", "unsupported version");
  for (const char* key : {"metric", "x0", "v0", "tspan"})
    if (!j.contains(key)) bad(key, "required");
  c.metric = text(j["metric"], "metric");
  if (j.contains("params")) {
    const auto& p = j["params"];
    if (!p.is_object()) bad("params", "expected an object");
    for (const auto& [k, v] : p.items()) c.params[k] = number(v, join("params", k));
  }
  if (j.contains("inline_metric")) c.inline_metric = parse_inline(j["inline_metric"], "inline_metric");
  c.x0 = numbers(j["x0"], "x0");
  c.v0 = numbers(j["v0"], "v0");
  const auto ts = numbers(j["tspan"], "tspan");
  if (ts.size() != 2) bad("tspan", "expected [t0, t1]");
  c.t0 = ts[0];
  c.t1 = ts[1];
  if (j.contains("solver")) {
    const auto s = text(j["solver"], "solver");
    if (s == "filippov") c.solver = SolverKind::filippov;
    else if (s == "caratheodory") c.solver = SolverKind::caratheodory;
    else if (s == "regularized") c.solver = SolverKind::regularized;
    else bad("solver", "expected filippov, caratheodory or regularized");
  }
  if (j.contains("epsilon")) c.epsilon = number(j["epsilon"], "epsilon");
  if (j.contains("step")) c.step = number(j["step"], "step");
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    only_keys(t, "tolerances", {"rel_tol", "abs_tol", "max_step", "event_tol", "max_events",
                                "sliding_exit_tol", "surface_tol", "tangency_tol", "tie_break",
                                "max_steps"});
    auto& ic = c.integrator;
    auto num = [&](const char* key, double& dst) {
      if (t.contains(key)) dst = number(t[key], join("tolerances", key));
    };
    num("rel_tol", ic.rel_tol);
    num("abs_tol", ic.abs_tol);
    num("event_tol", ic.event_tol);
    num("sliding_exit_tol", ic.sliding_exit_tol);
    num("surface_tol", ic.surface_tol);
    num("tangency_tol", ic.tangency_tol);
    if (t.contains("max_step")) {
      // null stands for an unbounded step
      ic.max_step = t["max_step"].is_null() ? std::numeric_limits<double>::infinity()
                                            : number(t["max_step"], "tolerances.max_step");
    }
    if (t.contains("max_events")) {
      const auto v = integer(t["max_events"], "tolerances.max_events");
      if (v < 1 || v > std::numeric_limits<int>::max()) bad("tolerances.max_events", "out of range");
      ic.max_events = static_cast<int>(v);
    }
    if (t.contains("tie_break")) {
      const auto v = integer(t["tie_break"], "tolerances.tie_break");
      if (v != 1 && v != -1) bad("tolerances.tie_break", "must be +1 or -1");
      ic.tie_break = static_cast<int>(v);
    }
    if (t.contains("max_steps")) ic.max_steps = static_cast<long>(integer(t["max_steps"], "tolerances.max_steps"));
  }
  if (j.contains("seed")) {
    const auto& s = j["seed"];
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      bad("seed", "expected a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  if (j.contains("output")) {
    const auto& o = j["output"];
    only_keys(o, "output", {"trajectory", "events"});
    if (o.contains("trajectory")) c.trajectory_path = text(o["trajectory"], "output.trajectory");
    if (o.contains("events")) c.events_path = text(o["events"], "output.events");
  }
  c.validate();
  if (c.metric != "inline") c.params = catalog_model(c.metric, c.params).params;
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::config, "config: cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string write_run_config(const RunConfig& c, int indent) {
  json j;
  j["format_version"] = kFormatVersion;
  j["metric"] = c.metric;
  json params = json::object();
  for (const auto& [k, v] : c.params) params[k] = v;
  j["params"] = std::move(params);
  if (c.inline_metric) j["inline_metric"] = inline_to_json(*c.inline_metric);
  j["x0"] = c.x0;
  j["v0"] = c.v0;
  j["tspan"] = {c.t0, c.t1};
  j["solver"] = std::string(to_string(c.solver));
  j["epsilon"] = c.epsilon;
  j["step"] = c.step;
  const auto& ic = c.integrator;
  json t;
  t["rel_tol"] = ic.rel_tol;
  t["abs_tol"] = ic.abs_tol;
  t["max_step"] = std::isinf(ic.max_step) ? json(nullptr) : json(ic.max_step);
  t["event_tol"] = ic.event_tol;
  t["max_events"] = ic.max_events;
  t["sliding_exit_tol"] = ic.sliding_exit_tol;
  t["surface_tol"] = ic.surface_tol;
  t["tangency_tol"] = ic.tangency_tol;
  t["tie_break"] = ic.tie_break;
  t["max_steps"] = ic.max_steps;
  j["tolerances"] = std::move(t);
  j["seed"] = c.seed;
  j["output"] = {{"trajectory", c.trajectory_path}, {"events", c.events_path}};
  return j.dump(indent);
}

MetricModel resolve_model(const RunConfig& cfg) {
  if (cfg.metric == "inline") {
    if (!cfg.inline_metric) bad("inline_metric", "required when metric is \"inline\"");
    return build_inline_model(*cfg.inline_metric);
  }
  return catalog_model(cfg.metric, cfg.params).model;
}

}  // namespace lipgeo
