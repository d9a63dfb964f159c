#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lipgeo/catalog.hpp"
#include "lipgeo/ode.hpp"

namespace lipgeo {

inline constexpr int kFormatVersion = 1;

/// One metric component g_ij = g_ji as two polynomials in s = x[switch] - offset,
/// coefficients in increasing degree: `minus` for s < 0, `plus` for s > 0.
struct InlineComponent {
  int i = 0;
  int j = 0;
  std::vector<double> minus;
  std::vector<double> plus;
  bool operator==(const InlineComponent&) const = default;
};

/// Piecewise-polynomial metric switching across one coordinate hyperplane.
/// Components not listed are zero.
struct InlineMetric {
  std::string name = "inline";
  std::vector<int> signature;
  int switch_coordinate = 0;
  double switch_offset = 0.0;
  std::vector<InlineComponent> components;
  bool operator==(const InlineMetric&) const = default;
};

/// Throws ErrorKind::config for inconsistent specs (index range, continuity
/// across the switch, signature).
MetricModel build_inline_model(const InlineMetric& spec);

enum class SolverKind { filippov, caratheodory, regularized };
std::string_view to_string(SolverKind kind);

struct RunConfig {
  std::string metric = "flat";
  Params params;
  std::optional<InlineMetric> inline_metric;  // used when metric == "inline"
  std::vector<double> x0;
  std::vector<double> v0;
  double t0 = 0.0;
  double t1 = 1.0;
  SolverKind solver = SolverKind::filippov;
  double epsilon = 1e-3;
  double step = 1e-3;
  IntegratorConfig integrator;
  std::uint64_t seed = 0;
  std::string trajectory_path;
  std::string events_path;

  /// Throws ErrorKind::config naming the offending field.
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

/// Parses and validates; unknown keys are rejected and every error names the
/// field path (e.g. "tolerances.rel_tol").
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_config(const std::string& path);
/// Canonical JSON (stable key order) that parse_run_config reads back exactly.
std::string write_run_config(const RunConfig& cfg, int indent = 2);

/// Metric model selected by the config (catalog entry or inline spec).
MetricModel resolve_model(const RunConfig& cfg);

}  // namespace lipgeo
