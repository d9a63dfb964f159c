#include "lipgeo/filippov.hpp"

#include <cmath>
#include <string>

#include "lipgeo/errors.hpp"

namespace lipgeo {

std::string_view to_string(ContactKind kind) {
  switch (kind) {
    case ContactKind::crossing_up: return "crossing_up";
    case ContactKind::crossing_down: return "crossing_down";
    case ContactKind::sliding: return "sliding";
    case ContactKind::repulsive: return "repulsive";
    case ContactKind::tangential: return "tangential";
  }
  return "unknown";
}

namespace {

struct NormalComponents {
  double a;
  double b;
};

NormalComponents normal_components(const Vector& f_minus, const Vector& f_plus,
                                   const Vector& grad_sigma) {
  const double g = grad_sigma.norm();
  if (!(g > kSurfaceGradientFloor))
    fail(ErrorKind::surface_degeneracy, "switching surface gradient vanishes");
  if (f_minus.size() != grad_sigma.size() || f_plus.size() != grad_sigma.size())
    fail(ErrorKind::invalid_argument, "field and gradient dimensions differ");
  return {grad_sigma.dot(f_minus) / g, grad_sigma.dot(f_plus) / g};
}

}  // namespace

ContactKind classify_contact(const Vector& f_minus, const Vector& f_plus,
                             const Vector& grad_sigma, double tangency_tol) {
  const auto [a, b] = normal_components(f_minus, f_plus, grad_sigma);
  if (std::abs(a) <= tangency_tol || std::abs(b) <= tangency_tol) return ContactKind::tangential;
  if (a > 0.0 && b > 0.0) return ContactKind::crossing_up;
  if (a < 0.0 && b < 0.0) return ContactKind::crossing_down;
  if (a > 0.0) return ContactKind::sliding;
  return ContactKind::repulsive;
}

double sliding_weight(const Vector& f_minus, const Vector& f_plus, const Vector& grad_sigma) {
  const auto [a, b] = normal_components(f_minus, f_plus, grad_sigma);
  if (a == b) fail(ErrorKind::precondition, "sliding weight undefined: equal normal components");
  return a / (a - b);
}

SlidingSelection sliding_field(const Vector& f_minus, const Vector& f_plus,
                               const Vector& grad_sigma, double tangency_tol) {
  const auto kind = classify_contact(f_minus, f_plus, grad_sigma, tangency_tol);
  if (kind != ContactKind::sliding) {
    fail(ErrorKind::precondition,
         "sliding_field requires a sliding contact, got " + std::string(to_string(kind)));
  }
  const double alpha = sliding_weight(f_minus, f_plus, grad_sigma);
  return {alpha, alpha * f_plus + (1.0 - alpha) * f_minus};
}

ConvexSet filippov_piecewise(const SideField& f_minus, const SideField& f_plus,
                             const SwitchingSurface& surface, const Vector& x,
                             double surface_tol) {
  const double s = surface.sigma(x);
  if (s > surface_tol) return ConvexSet::point(f_plus(x));
  if (s < -surface_tol) return ConvexSet::point(f_minus(x));
  return ConvexSet::segment(f_minus(x), f_plus(x));
}

void FilippovMapConfig::validate() const {
  if (delta_ladder.empty()) fail(ErrorKind::invalid_argument, "delta ladder is empty");
  for (std::size_t i = 0; i < delta_ladder.size(); ++i) {
    if (!(delta_ladder[i] > 0.0)) fail(ErrorKind::invalid_argument, "ball radii must be positive");
    if (i > 0 && !(delta_ladder[i] < delta_ladder[i - 1]))
      fail(ErrorKind::invalid_argument, "delta ladder must be strictly decreasing");
  }
  if (samples_per_ball < 10) fail(ErrorKind::invalid_argument, "samples_per_ball must be >= 10");
}

Vector sample_ball(const Vector& center, double radius, std::mt19937_64& rng) {
  const auto n = center.size();
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  Vector dir(n);
  double len = 0.0;
  do {
    for (Eigen::Index i = 0; i < n; ++i) dir[i] = normal(rng);
    len = dir.norm();
  } while (len == 0.0);
  const double r = radius * std::pow(uniform(rng), 1.0 / static_cast<double>(n));
  return center + (r / len) * dir;
}

SampledFilippov filippov_sampled(const AeField& field, const Vector& x,
                                 const FilippovMapConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::vector<ConvexSet> hulls;
  SampledFilippov out{ConvexSet::point(Vector::Zero(1)), {}, {}, {}, true};

  for (double delta : cfg.delta_ladder) {
    std::vector<Vector> values;
    values.reserve(static_cast<std::size_t>(cfg.samples_per_ball));
    int undefined = 0;
    for (int i = 0; i < cfg.samples_per_ball; ++i) {
      auto f = field(sample_ball(x, delta, rng));
      if (f && f->allFinite()) values.push_back(std::move(*f));
      else ++undefined;
    }
    if (2 * undefined > cfg.samples_per_ball) {
      fail(ErrorKind::evaluation, "field undefined on " + std::to_string(undefined) + " of " +
                                      std::to_string(cfg.samples_per_ball) +
                                      " samples in a ball of radius " + num(delta));
    }
    hulls.push_back(ConvexSet::hull(values));
    out.deltas.push_back(delta);
    out.diameters.push_back(hulls.back().diameter());
  }

  const double noise_scale = 2.0 / std::sqrt(static_cast<double>(cfg.samples_per_ball));
  for (std::size_t i = 1; i < hulls.size(); ++i) {
    out.steps.push_back(hausdorff(hulls[i - 1], hulls[i]));
    if (out.diameters[i] > out.diameters[i - 1] * (1.0 + noise_scale)) out.shrinking = false;
  }
  out.set = hulls.back();
  return out;
}

}  // namespace lipgeo
