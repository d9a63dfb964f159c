#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "lipgeo/convex_set.hpp"
#include "lipgeo/surface.hpp"

namespace lipgeo {

enum class ContactKind { crossing_up, crossing_down, sliding, repulsive, tangential };

std::string_view to_string(ContactKind kind);

inline constexpr double kDefaultTangencyTol = 1e-10;
inline constexpr double kDefaultSurfaceTol = 1e-9;

/// First-order contact of the one-sided fields with {sigma = 0}.
///
/// f_minus is the limit from {sigma < 0}, f_plus from {sigma > 0}. With
/// a = n.f_minus and b = n.f_plus for the unit normal n, |a| or |b| within
/// tangency_tol is tangential; otherwise the signs of (a, b) decide.
ContactKind classify_contact(const Vector& f_minus, const Vector& f_plus,
                             const Vector& grad_sigma,
                             double tangency_tol = kDefaultTangencyTol);

struct SlidingSelection {
  double alpha = 0.0;
  Vector field;
};

/// The unique element of co{f_minus, f_plus} tangent to the surface.
/// Throws ErrorKind::precondition unless the contact is sliding.
SlidingSelection sliding_field(const Vector& f_minus, const Vector& f_plus,
                               const Vector& grad_sigma,
                               double tangency_tol = kDefaultTangencyTol);

/// alpha = a / (a - b) without the sliding precondition; used while tracking
/// a sliding motion up to its exit. Throws ErrorKind::precondition when a == b.
double sliding_weight(const Vector& f_minus, const Vector& f_plus, const Vector& grad_sigma);

using SideField = std::function<Vector(const Vector&)>;

/// Exact Filippov set of a two-region piecewise-smooth field.
ConvexSet filippov_piecewise(const SideField& f_minus, const SideField& f_plus,
                             const SwitchingSurface& surface, const Vector& x,
                             double surface_tol = kDefaultSurfaceTol);

struct FilippovMapConfig {
  std::vector<double> delta_ladder{1e-1, 1e-2, 1e-3, 1e-4};
  int samples_per_ball = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SampledFilippov {
  ConvexSet set;                   // hull for the smallest radius
  std::vector<double> deltas;
  std::vector<double> diameters;   // hull diameter per radius
  std::vector<double> steps;       // Hausdorff distance between consecutive hulls
  /// Diameters non-increasing along the ladder, up to a noise floor of
  /// 2 * diameter / sqrt(samples).
  bool shrinking = true;
};

/// A field defined almost everywhere; std::nullopt marks points where it is
/// undefined.
using AeField = std::function<std::optional<Vector>(const Vector&)>;

/// Essential convex hull approximated by uniform sampling of shrinking balls.
/// Continuous sampling misses any fixed null set almost surely.
SampledFilippov filippov_sampled(const AeField& field, const Vector& x,
                                 const FilippovMapConfig& cfg);

/// Uniform sample of the closed ball B(center, radius).
Vector sample_ball(const Vector& center, double radius, std::mt19937_64& rng);

}  // namespace lipgeo
