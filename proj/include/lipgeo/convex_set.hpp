#pragma once

#include <vector>

#include "lipgeo/surface.hpp"

namespace lipgeo {

enum class SetKind { singleton, segment, polytope };

/// Compact convex set stored by its extreme vertices.
class ConvexSet {
 public:
  static ConvexSet point(Vector p);
  /// co{a, b}; collapses to a singleton when a == b.
  static ConvexSet segment(Vector a, Vector b);
  /// Convex hull of a finite point cloud. Exact in one and two dimensions;
  /// in three or more, vertices are the support points of a fixed family of
  /// directions, which is an inner approximation of the hull.
  static ConvexSet hull(const std::vector<Vector>& points);

  SetKind kind() const { return kind_; }
  const std::vector<Vector>& vertices() const { return vertices_; }
  int dim() const { return static_cast<int>(vertices_.front().size()); }

  /// Nearest point of the set. Exact for singletons and segments; Wolfe's
  /// minimum-norm-point iteration for polytopes.
  Vector project(const Vector& p) const;
  double distance(const Vector& p) const;
  bool contains(const Vector& p, double tol = 1e-12) const { return distance(p) <= tol; }
  double diameter() const;

 private:
  ConvexSet(SetKind kind, std::vector<Vector> vertices)
      : kind_(kind), vertices_(std::move(vertices)) {}

  SetKind kind_;
  std::vector<Vector> vertices_;
};

/// Hausdorff distance between two polytopes (attained at vertices).
double hausdorff(const ConvexSet& a, const ConvexSet& b);

/// Minimum-norm point of co{points} (Wolfe 1976).
Vector min_norm_point(const std::vector<Vector>& points);

}  // namespace lipgeo
