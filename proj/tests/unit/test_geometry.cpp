#include <cmath>

#include "doctest.h"
#include "lipgeo/catalog.hpp"
#include "lipgeo/errors.hpp"
#include "lipgeo/geometry.hpp"
#include "support.hpp"

using namespace lipgeo;
using test::vec;

TEST_CASE("flat lorentzian metric is constant diag(-1, 1)") {
  const auto e = catalog_model("flat", {{"n", 2}, {"lorentzian", 1}});
  const Matrix g = eval_metric(e.model, vec({0.3, -1.0}), true);
  CHECK(g(0, 0) == -1.0);
  CHECK(g(1, 1) == 1.0);
  CHECK(g(0, 1) == 0.0);
  CHECK(g(1, 0) == 0.0);
}

TEST_CASE("rosen metric at u = 0.5") {
  const auto e = catalog_model("rosen");
  const Matrix g = eval_metric(e.model, vec({0.5, 0.0, 0.0, 0.0}));
  // (1 + u)^2, (1 - u)^2 and the null pair -du dv
  CHECK(g(2, 2) == doctest::Approx(2.25).epsilon(1e-15));
  CHECK(g(3, 3) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(g(0, 1) == -0.5);
  CHECK(g(1, 0) == -0.5);
  CHECK(g(0, 0) == 0.0);
  CHECK(g(1, 1) == 0.0);
  CHECK(g(2, 3) == 0.0);
}

TEST_CASE("kink1d metric at x = -0.2") {
  const auto e = catalog_model("kink1d", {{"c", 1.0}});
  CHECK(eval_metric(e.model, vec({-0.2}))(0, 0) == doctest::Approx(std::exp(0.4)).epsilon(1e-15));
}

TEST_CASE("out-of-chart and degenerate points fail loudly") {
  const auto rosen = catalog_model("rosen");
  try {
    eval_metric(rosen.model, vec({1.5, 0.0, 0.0, 0.0}));
    FAIL("expected an error");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::domain);
  }
  const auto kink = catalog_model("kink1d");
  CHECK_THROWS_AS(eval_metric(kink.model, vec({std::nan("")})), Error);
}

TEST_CASE("flat christoffel symbols vanish in both modes") {
  const auto e = catalog_model("flat", {{"n", 3}});
  for (auto mode : {ChristoffelMode::analytic, ChristoffelMode::finite_difference}) {
    const auto G = christoffel(e.model, vec({0.1, 2.0, -3.0}), mode);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) CHECK(G(i, j, k) == 0.0);
  }
}

TEST_CASE("kink1d christoffel symbol is c sgn(x)") {
  const auto e = catalog_model("kink1d", {{"c", 1.0}});
  CHECK(christoffel(e.model, vec({0.5}), ChristoffelMode::analytic)(0, 0, 0) ==
        doctest::Approx(1.0).epsilon(1e-14));
  const auto e2 = catalog_model("kink1d", {{"c", 0.7}});
  CHECK(christoffel(e2.model, vec({-0.3}), ChristoffelMode::analytic)(0, 0, 0) ==
        doctest::Approx(-0.7).epsilon(1e-14));
  CHECK(christoffel(e2.model, vec({-0.3}), ChristoffelMode::finite_difference)(0, 0, 0) ==
        doctest::Approx(-0.7).epsilon(1e-8));
}

TEST_CASE("rosen christoffel Gamma^X_{uX} = 1/(1+u)") {
  const auto e = catalog_model("rosen");
  const auto G = christoffel(e.model, vec({0.5, 0.0, 0.0, 0.0}), ChristoffelMode::analytic);
  CHECK(G(2, 0, 2) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(G(2, 2, 0) == G(2, 0, 2));
  // Gamma^Y_{uY} = -1/(1-u)
  CHECK(G(3, 0, 3) == doctest::Approx(-2.0).epsilon(1e-14));
}

TEST_CASE("analytic christoffels agree with an independent finite difference of g") {
  // Gamma^i_{jk} = 1/2 g^{il}(d_j g_lk + d_k g_lj - d_l g_jk), dg by central differences here.
  const auto e = catalog_model("conformal2d", {{"c", 0.8}});
  const Vector x = vec({0.4, -0.3});
  const double h = 1e-5;
  std::vector<Matrix> dg;
  for (int k = 0; k < 2; ++k) {
    Vector xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    dg.push_back((eval_metric(e.model, xp) - eval_metric(e.model, xm)) / (2 * h));
  }
  const Matrix gi = eval_metric(e.model, x).inverse();
  const auto G = christoffel(e.model, x, ChristoffelMode::analytic);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        double ref = 0.0;
        for (int l = 0; l < 2; ++l) ref += 0.5 * gi(i, l) * (dg[j](l, k) + dg[k](l, j) - dg[l](j, k));
        CHECK(G(i, j, k) == doctest::Approx(ref).epsilon(1e-8));
      }
}

TEST_CASE("geodesic rhs examples") {
  const auto flat = catalog_model("flat");
  const Vector f = geodesic_rhs(flat.model, GeodesicState{vec({0, 0}), vec({1, 0.5})});
  CHECK(test::inf_dist(f, vec({1, 0.5, 0, 0})) == 0.0);

  const auto kink = catalog_model("kink1d", {{"c", 1.0}});
  const Vector k = geodesic_rhs(kink.model, GeodesicState{vec({0.5}), vec({2.0})});
  CHECK(k[0] == 2.0);
  CHECK(k[1] == doctest::Approx(-4.0).epsilon(1e-14));

  const auto rosen = catalog_model("rosen");
  const Vector r = geodesic_rhs(rosen.model, GeodesicState{vec({0.5, 0, 0, 0}), vec({1, 0, 1, 0})});
  CHECK(r[6] == doctest::Approx(-4.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("geodesic rhs refuses points on a switching surface") {
  const auto kink = catalog_model("kink1d");
  try {
    geodesic_rhs(kink.model, GeodesicState{vec({0.0}), vec({1.0})});
    FAIL("expected an error");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::proximity);
  }
}

TEST_CASE("one-sided christoffels on the kink") {
  const auto kink = catalog_model("kink1d", {{"c", 2.0}});
  CHECK(christoffel_one_sided(kink.model, vec({0.0}), {+1})(0, 0, 0) == doctest::Approx(2.0));
  CHECK(christoffel_one_sided(kink.model, vec({0.0}), {-1})(0, 0, 0) == doctest::Approx(-2.0));
}

TEST_CASE("chart spec validation") {
  ChartSpec c = ChartSpec::unbounded({1, 1});
  CHECK_NOTHROW(c.validate());
  c.lower = vec({0.0, 1.0});
  c.upper = vec({1.0, 1.0});
  CHECK_THROWS_AS(c.validate(), Error);
  ChartSpec bad = ChartSpec::unbounded({1, 2});
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("levi-civita symbols are symmetric in the lower indices") {
  const auto rosen = catalog_model("rosen");
  const auto G = christoffel(rosen.model, vec({0.3, 0.1, 0.2, -0.4}), ChristoffelMode::finite_difference);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) CHECK(G(i, j, k) == G(i, k, j));
}
