#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "lipgeo/catalog.hpp"
#include "lipgeo/integrator.hpp"

namespace lipgeo {

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least-squares line through (log x, log y). Needs two or more points with
/// positive coordinates.
LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct HolderFit {
  double alpha_assumed = 1.0;
  double beta_fit = 0.0;
  double beta_predicted = 1.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

/// beta = alpha / (2 - alpha).
double holder_beta(double alpha);

struct C1Report {
  double max_velocity_jump = 0.0;
  std::vector<double> per_event_jumps;
  std::optional<HolderFit> holder;
};

/// Velocity jump |v(t+) - v(t-)| at every event, from the one-sided limits
/// of the dense output. For non-geodesic layouts the whole state is used.
C1Report velocity_jump(const Trajectory& traj);

struct ResidualReport {
  double max = 0.0;
  double mean = 0.0;
  int samples = 0;
};

/// Distance from the central-difference derivative of the dense output to
/// the Filippov set, at uniformly drawn times away from events.
ResidualReport inclusion_residual(const Trajectory& traj, const PiecewiseSystem& sys,
                                  int n_samples, std::uint64_t seed);
ResidualReport inclusion_residual(const Trajectory& traj, const MetricModel& model,
                                  int n_samples, std::uint64_t seed);

/// max_t |g(v,v)(t) - g(v,v)(t0)| over the trajectory's samples.
double energy_drift(const Trajectory& traj, const MetricModel& model);

struct ConvergenceReport {
  std::vector<double> parameters;   // eps values or step sizes
  std::vector<double> errors;       // max position deviation
  double order = 0.0;
  bool strictly_decreasing = false;
};

/// Max position deviation of two trajectories over a uniform grid on their
/// common interval.
double max_position_deviation(const Trajectory& a, const Trajectory& b, int grid = 2001);

ConvergenceReport regularization_convergence(const CatalogEntry& entry, const GeodesicState& z0,
                                             double t0, double t1,
                                             const std::vector<double>& eps_ladder,
                                             const IntegratorConfig& cfg = {});

ConvergenceReport caratheodory_convergence(const CatalogEntry& entry, const GeodesicState& z0,
                                           double t0, double t1,
                                           const std::vector<double>& steps,
                                           const IntegratorConfig& cfg = {});

/// Log-log fit of |v(t) - v(t*)| against |t - t*| on both sides of an event,
/// offsets from 1e-6 up to half_window.
HolderFit holder_fit(const Trajectory& traj, std::size_t event_index, double half_window,
                     double alpha_assumed = 1.0);

enum class UniquenessFlag { contracting, bounded, splitting };
std::string_view to_string(UniquenessFlag flag);

struct FunnelReport {
  double initial_radius = 0.0;
  std::vector<std::pair<double, double>> spread_over_time;
  double max_ratio = 0.0;
  UniquenessFlag flag = UniquenessFlag::bounded;
};

inline constexpr double kSplittingRatio = 1e3;

/// Spread of n_curves solutions started uniformly in a ball around z0.
FunnelReport uniqueness_funnel(const PiecewiseSystem& sys, const Vector& z0, double radius,
                               int n_curves, double t0, double t1, std::uint64_t seed,
                               const IntegratorConfig& cfg = {});
FunnelReport uniqueness_funnel(const MetricModel& model, const GeodesicState& z0, double radius,
                               int n_curves, double t0, double t1, std::uint64_t seed,
                               const IntegratorConfig& cfg = {});

struct ShortestCurveOptions {
  int max_iterations = 20000;
  /// Bound on the preconditioned gradient step, in coordinate units.
  double gradient_tol = 1e-9;
  /// Trapezoid sub-intervals per polyline segment for the length.
  int length_subdivisions = 16;
};

struct ShortestCurve {
  std::vector<Vector> polyline;
  double length = 0.0;
  double energy = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
};

/// Discrete-energy minimizer between p and q with n_nodes nodes, started
/// from the straight segment. Throws ErrorKind::precondition for
/// non-Riemannian models and ErrorKind::stagnation when the gradient does not
/// fall below tolerance.
ShortestCurve shortest_curve_oracle(const MetricModel& model, const Vector& p, const Vector& q,
                                    int n_nodes, const ShortestCurveOptions& opts = {});

/// Riemannian length of a polyline (trapezoid rule, split at surfaces).
double polyline_length(const MetricModel& model, const std::vector<Vector>& polyline,
                       int subdivisions = 8);

struct ShotGeodesic {
  double angle = 0.0;
  double miss = 0.0;     // distance from q at the closest approach plane
  double length = 0.0;
  Trajectory trajectory;
};

/// Unit-speed Filippov geodesic from p aimed at q (two-dimensional models),
/// by bisection on the initial angle until the miss is below tol.
ShotGeodesic shoot_geodesic(const MetricModel& model, const Vector& p, const Vector& q,
                            double tol = 1e-9, const IntegratorConfig& cfg = {});

/// Largest |g(x) - g(y)|_max / |x - y| over random pairs in the model's
/// Lipschitz box.
double lipschitz_estimate(const MetricModel& model, int pairs, std::uint64_t seed);

/// max |a(x) - b(x)|_max over a uniform grid of the box [lower, upper].
double metric_sup_distance(const MetricModel& a, const MetricModel& b, const Vector& lower,
                           const Vector& upper, int points_per_axis);

}  // namespace lipgeo
