#pragma once

#include <cmath>
#include <initializer_list>

#include "lipgeo/surface.hpp"

namespace test {

inline lipgeo::Vector vec(std::initializer_list<double> xs) {
  lipgeo::Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline double inf_dist(const lipgeo::Vector& a, const lipgeo::Vector& b) {
  return (a - b).lpNorm<Eigen::Infinity>();
}

// Independent kink1d closed form, g = exp(2c|x|): with F(x) = sgn(x) expm1(c|x|)/c
// the quantity F(x(t)) moves linearly with slope w = exp(c|x0|) v0.
struct Kink1dExact {
  double c;
  double F(double x) const { return std::copysign(std::expm1(c * std::abs(x)) / c, x); }
  double Finv(double y) const { return std::copysign(std::log1p(c * std::abs(y)) / c, y); }
  double x(double x0, double v0, double t) const {
    return Finv(F(x0) + std::exp(c * std::abs(x0)) * v0 * t);
  }
  double v(double x0, double v0, double t) const {
    return std::exp(c * std::abs(x0)) * v0 * std::exp(-c * std::abs(x(x0, v0, t)));
  }
};

}  // namespace test
