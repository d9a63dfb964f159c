#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lipgeo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Side of a switching surface: -1 for {sigma < 0}, +1 for {sigma > 0}.
/// A region is one side per surface of the owning model or system.
using Region = std::vector<int>;

/// Hypersurface {sigma = 0} across which a right-hand side may be discontinuous.
struct SwitchingSurface {
  std::string label;
  std::function<double(const Vector&)> sigma;
  std::function<Vector(const Vector&)> gradient;

  /// sigma(x) = x[index] - offset.
  static SwitchingSurface coordinate(int index, double offset, std::string label);

  /// The same surface seen from a state z = (x, v) of twice the dimension:
  /// sigma depends on x only.
  SwitchingSurface lifted(int position_dim) const;
};

/// |grad sigma| below this counts as a degenerate surface.
inline constexpr double kSurfaceGradientFloor = 1e-12;

}  // namespace lipgeo
