#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lipgeo/catalog.hpp"
#include "lipgeo/diagnostics.hpp"
#include "lipgeo/errors.hpp"
#include "lipgeo/integrator.hpp"
#include "support.hpp"

using namespace lipgeo;
using test::vec;

namespace {

void check_trajectory_shape(const Trajectory& t) {
  REQUIRE(t.times.size() == t.states.size());
  for (std::size_t k = 1; k < t.times.size(); ++k) CHECK(t.times[k] > t.times[k - 1]);
  for (std::size_t k = 0; k < t.times.size(); ++k) CHECK(test::inf_dist(t.dense.eval(t.times[k]), t.states[k]) == 0.0);
}

}  // namespace

TEST_CASE("integrate_smooth: straight line") {
  const auto flat = catalog_model("flat");
  const Rhs rhs = [&](const Vector& z) { return geodesic_rhs(flat.model, GeodesicState::split(z)); };
  const auto t = integrate_smooth(rhs, vec({0, 0, 1, 2}), 0.0, 10.0, {});
  CHECK(t.completed());
  CHECK(test::inf_dist(t.final_state(), vec({10, 20, 1, 2})) < 1e-9);
  check_trajectory_shape(t);
}

TEST_CASE("integrate_smooth: harmonic oscillator returns after one period") {
  const Rhs rhs = [](const Vector& z) { return vec({z[1], -z[0]}); };
  const auto t = integrate_smooth(rhs, vec({1, 0}), 0.0, 2 * std::numbers::pi, {});
  CHECK(test::inf_dist(t.final_state(), vec({1, 0})) < 1e-8);
}

TEST_CASE("integrate_smooth: kink1d in the smooth region against the closed form") {
  const auto kink = catalog_model("kink1d", {{"c", 1.0}});
  const Rhs rhs = [&](const Vector& z) { return geodesic_rhs(kink.model, GeodesicState::split(z)); };
  const auto t = integrate_smooth(rhs, vec({0.5, 1.0}), 0.0, 2.0, {});
  const test::Kink1dExact ex{1.0};
  double err = 0.0;
  for (int k = 0; k <= 400; ++k) {
    const double s = 2.0 * k / 400;
    const Vector z = t.dense.eval(s);
    err = std::max({err, std::abs(z[0] - ex.x(0.5, 1.0, s)), std::abs(z[1] - ex.v(0.5, 1.0, s))});
  }
  CHECK(err < 1e-9);
}

TEST_CASE("integrate_smooth validates its configuration") {
  IntegratorConfig cfg;
  cfg.rel_tol = -1.0;
  const Rhs rhs = [](const Vector& z) { return z; };
  CHECK_THROWS_AS(integrate_smooth(rhs, vec({1.0}), 0.0, 1.0, cfg), Error);
  CHECK_THROWS_AS(integrate_smooth(rhs, vec({1.0}), 1.0, 0.0, {}), Error);
}

TEST_CASE("locate_root examples") {
  const auto lin = locate_root([](double t) { return t - 1.0; }, 0.0, 2.0, 1e-12);
  REQUIRE(lin.has_value());
  CHECK(std::abs(lin->time - 1.0) <= 1e-12);
  CHECK_FALSE(lin->tangential);

  CHECK_FALSE(locate_root([](double t) { return t * t + 1.0; }, 0.0, 2.0, 1e-12).has_value());

  const auto graze = locate_root([](double t) { return (t - 1.0) * (t - 1.0); }, 0.0, 2.0, 1e-12);
  REQUIRE(graze.has_value());
  CHECK(graze->tangential);
  CHECK(std::abs(graze->time - 1.0) < 1e-4);
}

TEST_CASE("locate_event on a dense interpolant") {
  DenseOutput d;
  d.push(DenseSegment::linear(0.0, 2.0, vec({-1.0}), vec({1.0})));
  const auto e = locate_event(d, SwitchingSurface::coordinate(0, 0.0, "x=0"), 0.0, 2.0, 1e-12);
  REQUIRE(e.has_value());
  CHECK(std::abs(e->time - 1.0) <= 1e-12);
}

TEST_CASE("filippov: flat model gives a straight line without events") {
  const auto flat = catalog_model("flat");
  const auto t = integrate_filippov(flat.model, GeodesicState{vec({0.3, -0.2}), vec({-1.0, 0.5})}, 0.0, 4.0);
  CHECK(t.completed());
  CHECK(t.events.empty());
  CHECK(test::inf_dist(t.final_state(), vec({-3.7, 1.8, -1.0, 0.5})) < 1e-12);
}

TEST_CASE("filippov: kink1d crossing against the closed form") {
  const auto kink = catalog_model("kink1d", {{"c", 1.0}});
  const auto t = integrate_filippov(kink.model, GeodesicState{vec({-1.0}), vec({1.0})}, 0.0, 2.0);
  check_trajectory_shape(t);
  REQUIRE(t.completed());
  REQUIRE(t.events.size() == 1);
  const double t_star = 1.0 - std::exp(-1.0);
  CHECK(t.events[0].kind == ContactKind::crossing_up);
  CHECK(std::abs(t.events[0].time - t_star) < 1e-9);
  CHECK(std::abs(t.events[0].state_after[1] - std::numbers::e) < 1e-9);
  CHECK(test::inf_dist(t.events[0].state_before, t.events[0].state_after) == 0.0);
  double err = 0.0;
  for (int k = 0; k <= 200; ++k) {
    const double s = t_star + (2.0 - t_star) * k / 200;
    err = std::max(err, std::abs(t.dense.eval(s)[0] - std::log(std::numbers::e * (s - t_star) + 1.0)));
  }
  CHECK(err < 1e-8);
}

TEST_CASE("filippov: rosen impulse crossing, X(u) = X(0) + p u / (1 + u)") {
  const auto rosen = catalog_model("rosen");
  const double p = 0.5;
  // starts at u = -1 with unit du/dt, so u = t - 1 and X(0) = p before the impulse
  const auto t = integrate_filippov(rosen.model, GeodesicState{vec({-1, 0, 0, 0}), vec({1, 0, p, 0})}, 0.0, 1.9);
  REQUIRE(t.completed());
  REQUIRE(t.events.size() == 1);
  double err = 0.0, verr = 0.0;
  for (int k = 0; k <= 180; ++k) {
    const double u = 0.9 * k / 180;
    const Vector z = t.dense.eval(u + 1.0);
    err = std::max(err, std::abs(z[2] - (p + p * u / (1 + u))));
    verr = std::max(verr, std::abs(z[6] - p / ((1 + u) * (1 + u))));
  }
  CHECK(err < 1e-6);
  CHECK(verr < 1e-6);
  CHECK(velocity_jump(t).max_velocity_jump < 1e-6);
}

TEST_CASE("filippov: sliding demo follows the surface after contact") {
  const auto sys = demo_system("sliding");
  {
    const auto t = integrate_filippov(sys, vec({1.0, 0.0}), 0.0, 3.0);
    REQUIRE(t.completed());
    REQUIRE_FALSE(t.events.empty());
    CHECK(std::abs(t.events[0].time - 1.0) < 1e-12);
    CHECK(t.events[0].kind == ContactKind::sliding);
    double dev = 0.0;
    for (int k = 0; k <= 100; ++k) {
      const double s = 1.0 + 2.0 * k / 100;
      const Vector z = t.dense.eval(s);
      dev = std::max({dev, std::abs(z[0]), std::abs(z[1] - s)});
    }
    CHECK(dev < 1e-8);
  }
  {
    const auto t = integrate_filippov(sys, vec({1.0, -1.0}), 0.0, 3.0);
    double dev = 0.0;
    for (int k = 0; k <= 100; ++k) {
      const double s = 1.0 + 2.0 * k / 100;
      const Vector z = t.dense.eval(s);
      dev = std::max({dev, std::abs(z[0]), std::abs(z[1] - (s - 1.0))});
    }
    CHECK(dev < 1e-8);
  }
}

TEST_CASE("filippov: repulsive start is flagged and follows the tie-break") {
  const auto sys = demo_system("repulsive");
  for (int side : {+1, -1}) {
    IntegratorConfig cfg;
    cfg.tie_break = side;
    const auto t = integrate_filippov(sys, vec({0.0, 0.0}), 0.0, 1.0, cfg);
    REQUIRE(t.completed());
    REQUIRE_FALSE(t.events.empty());
    CHECK(t.events[0].kind == ContactKind::repulsive);
    CHECK(t.events[0].flagged);
    CHECK(t.final_state()[0] == doctest::Approx(side * 1.0).epsilon(1e-12));
  }
}

TEST_CASE("filippov: event cascades and degeneracy are declared terminations") {
  // x'' = -sgn(x): crosses x = 0 every 2 sqrt(2) time units from (1, 0)
  PiecewiseSystem osc;
  osc.name = "sign-oscillator";
  osc.dim = 2;
  osc.position_dim = 1;
  osc.surfaces.push_back(SwitchingSurface::coordinate(0, 0.0, "x=0"));
  osc.field = [](const Vector& z, const Region& r) { return vec({z[1], -static_cast<double>(r[0])}); };
  IntegratorConfig cfg;
  cfg.max_events = 3;
  const auto z = integrate_filippov(osc, vec({1.0, 0.0}), 0.0, 100.0, cfg);
  CHECK(z.termination == Termination::zeno);
  CHECK_FALSE(z.message.empty());
  CHECK(z.t_last() < 100.0);
  cfg.max_events = 10000;
  const auto full = integrate_filippov(osc, vec({1.0, 0.0}), 0.0, 100.0, cfg);
  CHECK(full.completed());
  // |x| <= 1 and x' in [-sqrt 2, sqrt 2] on the invariant level set
  for (const auto& st : full.states) CHECK(std::abs(st[0]) <= 1.0 + 1e-8);

  const auto rosen = catalog_model("rosen");
  const auto d = integrate_filippov(rosen.model, GeodesicState{vec({0.5, 0, 0, 0}), vec({1, 0, 0, 0})}, 0.0, 1.0);
  CHECK_FALSE(d.completed());
  CHECK((d.termination == Termination::degeneracy || d.termination == Termination::chart_exit));
  CHECK_FALSE(d.message.empty());
  CHECK(d.t_last() < 0.5);
}

TEST_CASE("filippov: start exactly on the kink") {
  const auto kink = catalog_model("kink1d", {{"c", 1.0}});
  const auto t = integrate_filippov(kink.model, GeodesicState{vec({0.0}), vec({1.0})}, 0.0, 1.0);
  REQUIRE(t.completed());
  const test::Kink1dExact ex{1.0};
  CHECK(std::abs(t.final_state()[0] - ex.x(0.0, 1.0, 1.0)) < 1e-8);
}

TEST_CASE("caratheodory: flat model is exact for any step") {
  const auto flat = catalog_model("flat");
  for (double h : {0.3, 0.01}) {
    const auto t = integrate_caratheodory(flat.model, GeodesicState{vec({0, 0}), vec({1, 2})}, 0.0, 3.0, h);
    CHECK(test::inf_dist(t.final_state(), vec({3, 6, 1, 2})) < 1e-12);
  }
}

TEST_CASE("caratheodory: kink1d converges to the Filippov solution at first order") {
  const auto kink = catalog_model("kink1d", {{"c", 1.0}});
  const GeodesicState z0{vec({-1.0}), vec({1.0})};
  const auto ref = integrate_filippov(kink.model, z0, 0.0, 2.0);
  std::vector<double> errs;
  for (double h : {1e-2, 1e-3, 1e-4}) {
    const auto c = integrate_caratheodory(kink.model, z0, 0.0, 2.0, h);
    errs.push_back(max_position_deviation(ref, c));
    CHECK(errs.back() <= 10.0 * h);
  }
  CHECK(errs[1] < errs[0]);
  CHECK(errs[2] < errs[1]);
}

TEST_CASE("caratheodory: sliding demo chatters within one step of the surface") {
  const auto sys = demo_system("sliding");
  const double h = 1e-2;
  const auto t = integrate_caratheodory(sys, vec({1.0, 0.0}), 0.0, 3.0, h);
  double amp = 0.0;
  for (std::size_t k = 0; k < t.times.size(); ++k)
    if (t.times[k] > 1.0 + h) amp = std::max(amp, std::abs(t.states[k][0]));
  CHECK(amp <= h * 1.0 + 1e-12);
}

TEST_CASE("regularized: flat model is unchanged") {
  const auto flat = catalog_model("flat");
  const GeodesicState z0{vec({0, 0}), vec({1, 2})};
  const auto a = integrate_regularized(flat.model, 0.1, z0, 0.0, 3.0);
  CHECK(test::inf_dist(a.final_state(), vec({3, 6, 1, 2})) < 1e-12);
}

TEST_CASE("regularized: kink1d deviation shrinks with epsilon") {
  const auto kink = catalog_model("kink1d", {{"c", 1.0}});
  const GeodesicState z0{vec({-1.0}), vec({1.0})};
  const auto ref = integrate_filippov(kink.model, z0, 0.0, 2.0);
  std::vector<double> devs;
  for (double e : {1e-1, 1e-2, 1e-3}) {
    devs.push_back(max_position_deviation(ref, integrate_regularized(kink.model, e, z0, 0.0, 2.0)));
    CHECK(devs.back() <= 5.0 * e);
  }
  CHECK(devs[2] < devs[1]);
  CHECK(devs[1] < devs[0]);
}

TEST_CASE("regularized: rosen velocity stays close to the closed form away from the impulse") {
  const auto rosen = catalog_model("rosen");
  const double p = 0.5, eps = 1e-3;
  const auto t = integrate_regularized(rosen.model, eps, GeodesicState{vec({-1, 0, 0, 0}), vec({1, 0, p, 0})}, 0.0, 1.9);
  REQUIRE(t.completed());
  double err = 0.0;
  for (int k = 0; k <= 380; ++k) {
    const double u = -1.0 + 1.9 * k / 380;
    if (std::abs(u) <= eps) continue;
    const double up = std::max(u, 0.0);
    err = std::max(err, std::abs(t.dense.eval(u + 1.0)[6] - p / ((1 + up) * (1 + up))));
  }
  CHECK(err <= 5.0 * eps);
}

TEST_CASE("regularized: models without a mollifier are rejected") {
  const auto kink = catalog_model("kink1d");
  MetricModel m = kink.model;
  m.mollified = nullptr;
  CHECK_THROWS_AS(integrate_regularized(m, 1e-3, GeodesicState{vec({-1.0}), vec({1.0})}, 0.0, 1.0), Error);
}
