#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lipgeo/convex_set.hpp"
#include "lipgeo/geometry.hpp"
#include "lipgeo/ode.hpp"

namespace lipgeo {

/// Autonomous first-order system z' = F(z) that is smooth on each region cut
/// out by its switching surfaces. `field(z, region)` is the smooth extension
/// of the region's vector field, so one-sided limits on a surface are plain
/// evaluations.
struct PiecewiseSystem {
  std::string name;
  int dim = 0;
  /// n when z = (x, v) with x in R^n; otherwise equal to dim.
  int position_dim = 0;
  std::vector<SwitchingSurface> surfaces;
  std::function<Vector(const Vector&, const Region&)> field;

  Region region_at(const Vector& z, double surface_tol, int tie_break) const;
};

/// The first-order geodesic system z = (x, v), F(z) = (v, -Gamma(x) v v),
/// with the model's surfaces lifted to phase space.
PiecewiseSystem geodesic_system(const MetricModel& model);

/// Exact Filippov set of the system at z: the field value off the surfaces,
/// the segment between the one-sided limits on a surface.
ConvexSet filippov_set(const PiecewiseSystem& sys, const Vector& z,
                       double surface_tol = kDefaultSurfaceTol);

/// Event-driven Filippov solution.
///
/// Integrates the active region's smooth field, stops at surface contacts,
/// classifies them with the one-sided fields and continues by crossing,
/// sliding along the surface, or (repulsive contact) by the configured
/// tie-break. The state is carried through every event unchanged, so z is
/// continuous by construction.
///
/// Reaching the chart boundary, a degenerate metric, or more than
/// cfg.max_events events ends the run with the matching Termination.
Trajectory integrate_filippov(const PiecewiseSystem& sys, const Vector& z0, double t0, double t1,
                              const IntegratorConfig& cfg = {});

Trajectory integrate_filippov(const MetricModel& model, const GeodesicState& z0, double t0,
                              double t1, const IntegratorConfig& cfg = {});

/// Fixed-step explicit Euler on the pointwise (a.e.-defined) field; points
/// exactly on a surface use the tie-break side.
Trajectory integrate_caratheodory(const PiecewiseSystem& sys, const Vector& z0, double t0,
                                  double t1, double step, int tie_break = +1);

Trajectory integrate_caratheodory(const MetricModel& model, const GeodesicState& z0, double t0,
                                  double t1, double step, int tie_break = +1);

/// Smooth integration of the model's mollified metric.
Trajectory integrate_regularized(const MetricModel& model, double epsilon,
                                 const GeodesicState& z0, double t0, double t1,
                                 const IntegratorConfig& cfg = {});

}  // namespace lipgeo
