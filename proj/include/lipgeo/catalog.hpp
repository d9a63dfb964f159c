#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "lipgeo/geometry.hpp"
#include "lipgeo/integrator.hpp"

namespace lipgeo {

using Params = std::map<std::string, double>;

/// Built-in metric with (optionally) a closed-form geodesic oracle.
///
/// Oracles come from conservation laws, never from numerical integration.
struct CatalogEntry {
  std::string name;
  Params params;
  MetricModel model;
  /// Exact geodesic state at time t from z0 at time 0. Empty when the entry
  /// has no closed form.
  std::function<GeodesicState(const GeodesicState&, double)> oracle;
  std::string oracle_domain;

  bool has_oracle() const { return static_cast<bool>(oracle); }
};

/// Names accepted by catalog_model.
const std::vector<std::string>& catalog_names();

/// flat        n (default 2), lorentzian (0 or 1, default 0)
/// kink1d      c > 0 (default 1):            g = exp(2c|x|) dx^2
/// conformal2d c (default 1):                g = exp(2c|x|)(dx^2 + dy^2)
/// rosen       coordinates (u, v, X, Y):     -du dv + (1+u+)^2 dX^2 + (1-u+)^2 dY^2
///
/// Missing parameters take their defaults; unknown names or parameters throw
/// ErrorKind::invalid_argument.
CatalogEntry catalog_model(const std::string& name, const Params& params = {});

/// Throws ErrorKind::precondition without an oracle and
/// ErrorKind::oracle_domain outside its validity.
GeodesicState exact_geodesic(const CatalogEntry& entry, const GeodesicState& z0, double t);

/// Smooth approximation: |x| -> sqrt(x^2 + eps^2), u+ -> (u + sqrt(u^2 + eps^2)) / 2.
MetricModel mollify(const CatalogEntry& entry, double epsilon);

/// A named initial condition and time span.
struct Scenario {
  std::string name;
  GeodesicState z0;
  double t0 = 0.0;
  double t1 = 1.0;
};

/// "crossing" for every entry with a surface; rosen also answers to
/// "impulse-crossing".
Scenario catalog_scenario(const CatalogEntry& entry, const std::string& name = "crossing");

/// `count` initial conditions whose geodesics cross the entry's surface
/// transversally within the returned span.
std::vector<Scenario> crossing_fan(const CatalogEntry& entry, int count);

/// Non-geodesic demo fields on R^2 (x1 switching) and R^1:
///   "sliding"   F = (-sgn x1, 1)
///   "repulsive" F = ( sgn x1, 1)
///   "sign1d"    F = -sgn x
PiecewiseSystem demo_system(const std::string& name);

}  // namespace lipgeo
