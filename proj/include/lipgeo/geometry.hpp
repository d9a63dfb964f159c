#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lipgeo/surface.hpp"

namespace lipgeo {

/// Single coordinate box with a declared signature.
struct ChartSpec {
  int dim = 0;
  Vector lower;  // -inf allowed
  Vector upper;  // +inf allowed
  std::vector<int> signature;

  static ChartSpec unbounded(std::vector<int> signature);

  bool contains(const Vector& x) const;
  /// Throws ErrorKind::invalid_argument when the invariants do not hold.
  void validate() const;
  int negative_count() const;
};

using MetricTensor = Matrix;

/// Gamma^i_{jk}, stored densely, symmetric in (j, k).
class ChristoffelSymbols {
 public:
  explicit ChristoffelSymbols(int dim);

  int dim() const { return dim_; }
  double operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }
  double& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }

  /// Replace every pair (j,k),(k,j) by its mean.
  void symmetrize();
  bool all_finite() const;

  /// a^i = -Gamma^i_{jk} v^j v^k
  Vector acceleration(const Vector& v) const;

  double max_abs_diff(const ChristoffelSymbols& other) const;

 private:
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dim_ + j) * dim_ + k;
  }
  int dim_;
  std::vector<double> data_;
};

/// Levi-Civita connection from g and its partial derivatives dg[k] = d_k g.
ChristoffelSymbols levi_civita(const MetricTensor& g, std::span<const Matrix> dg);

/// z = (x, xdot).
struct GeodesicState {
  Vector x;
  Vector v;

  Vector stacked() const;
  static GeodesicState split(const Vector& z);
};

/// Chart-local metric with a declared piecewise-smooth structure.
///
/// `eval` is the (continuous) metric itself. Off the switching surfaces the
/// model is smooth; `piece` returns the smooth extension of the metric living
/// on a given region, which is what one-sided limits on a surface are built
/// from. Models are immutable once built.
struct MetricModel {
  std::string name;
  ChartSpec chart;
  std::function<MetricTensor(const Vector&)> eval;
  /// Smooth extension of the region's piece. Empty: `eval` is smooth.
  std::function<MetricTensor(const Vector&, const Region&)> piece;
  /// Analytic partial derivatives of the region's piece. Empty: no analytic
  /// Christoffel symbols; finite differences are used instead.
  std::function<std::vector<Matrix>(const Vector&, const Region&)> derivative;
  std::vector<SwitchingSurface> surfaces;
  /// Local Lipschitz constant of g (max-entry norm over Euclidean distance),
  /// valid on the box [-lipschitz_radius, lipschitz_radius]^n intersected
  /// with the chart.
  std::optional<double> lipschitz_bound;
  double lipschitz_radius = 1.0;
  /// Smooth epsilon-approximation, when the model has one.
  std::function<MetricModel(double)> mollified;

  double degeneracy_floor = 1e-10;
  double surface_tol = 1e-9;

  int dim() const { return chart.dim; }
  bool is_riemannian() const { return chart.negative_count() == 0; }

  /// Side of every surface at x; points within surface_tol of a surface get
  /// `tie_break`.
  Region region_of(const Vector& x, int tie_break = +1) const;
  /// Index of a surface with |sigma(x)| <= tol, if any.
  std::optional<std::size_t> surface_at(const Vector& x, double tol) const;
};

enum class ChristoffelMode { analytic, finite_difference };

/// Default central-difference step 1e-6 * (1 + |x|).
double default_fd_step(const Vector& x);

MetricTensor eval_metric(const MetricModel& model, const Vector& x,
                         bool check_signature = false);

/// Metric of the region's smooth piece at x (one-sided limit on a surface).
MetricTensor eval_piece(const MetricModel& model, const Vector& x, const Region& region);

/// Partial derivatives d_k g of the region's piece: analytic when the model
/// provides them, central differences of the piece otherwise.
std::vector<Matrix> metric_derivative(const MetricModel& model, const Vector& x,
                                      const Region& region);

ChristoffelSymbols christoffel(const MetricModel& model, const Vector& x,
                               ChristoffelMode mode,
                               std::optional<double> step = std::nullopt);

/// Christoffel symbols of the region's smooth piece; valid on and across the
/// surface bounding that region.
ChristoffelSymbols christoffel_one_sided(const MetricModel& model, const Vector& x,
                                         const Region& region);

/// F(z) = (v, -Gamma(x) v v). Requires x off every switching surface.
Vector geodesic_rhs(const MetricModel& model, const GeodesicState& z);

/// F evaluated with the Christoffel symbols of a fixed region's piece.
Vector geodesic_rhs(const MetricModel& model, const Vector& z, const Region& region);

/// g(v, v).
double quadratic_form(const MetricTensor& g, const Vector& v);

}  // namespace lipgeo
