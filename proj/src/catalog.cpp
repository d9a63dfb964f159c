#include "lipgeo/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lipgeo/errors.hpp"

namespace lipgeo {

namespace {

constexpr double kRosenMargin = 1e-6;
constexpr double kGolden = 0.6180339887498949;

double sgn(double x) { return x > 0.0 ? 1.0 : x < 0.0 ? -1.0 : 0.0; }
double frac(double x) { return x - std::floor(x); }

double param(const Params& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

void check_keys(const std::string& name, const Params& p, std::initializer_list<const char*> keys) {
  for (const auto& [k, _] : p) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* key) { return k == key; }))
      fail(ErrorKind::invalid_argument, "unknown parameter '" + k + "' for metric " + name);
  }
}

// Smoothed kink profiles and their derivatives; eps == 0 gives the exact ones
// with the side taken from `side`.
struct Profile {
  double value;
  double slope;
};

Profile abs_profile(double x, double eps, int side) {
  if (eps == 0.0) return {side * x, static_cast<double>(side)};
  const double r = std::sqrt(x * x + eps * eps);
  return {r, x / r};
}

Profile positive_part(double u, double eps, int side) {
  if (eps == 0.0) return side > 0 ? Profile{u, 1.0} : Profile{0.0, 0.0};
  const double r = std::sqrt(u * u + eps * eps);
  return {0.5 * (u + r), 0.5 * (1.0 + u / r)};
}

int side_of(double s) { return s > 0.0 ? 1 : -1; }

// --- flat -----------------------------------------------------------------

CatalogEntry make_flat(const Params& p) {
  check_keys("flat", p, {"n", "lorentzian"});
  const double nd = param(p, "n", 2.0);
  const double lor = param(p, "lorentzian", 0.0);
  if (!(nd >= 1.0) || nd != std::floor(nd) || nd > 64.0)
    fail(ErrorKind::invalid_argument, "flat: n must be an integer in [1, 64]");
  if (lor != 0.0 && lor != 1.0) fail(ErrorKind::invalid_argument, "flat: lorentzian must be 0 or 1");
  const int n = static_cast<int>(nd);
  std::vector<int> sig(n, 1);
  if (lor == 1.0) sig[0] = -1;

  CatalogEntry e;
  e.name = "flat";
  e.params = {{"n", nd}, {"lorentzian", lor}};
  auto& m = e.model;
  m.name = "flat";
  m.chart = ChartSpec::unbounded(sig);
  Matrix g = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) g(i, i) = sig[i];
  m.eval = [g](const Vector&) { return g; };
  m.derivative = [n](const Vector&, const Region&) {
    return std::vector<Matrix>(n, Matrix::Zero(n, n));
  };
  m.lipschitz_bound = 0.0;
  const MetricModel copy = m;
  m.mollified = [copy](double eps) {
    if (!(eps > 0.0)) fail(ErrorKind::invalid_argument, "mollifier width must be positive");
    return copy;
  };
  e.oracle = [](const GeodesicState& z0, double t) {
    return GeodesicState{z0.x + t * z0.v, z0.v};
  };
  e.oracle_domain = "all states and times";
  return e;
}

// --- kink1d ---------------------------------------------------------------

MetricModel kink1d_model(double c, double eps) {
  MetricModel m;
  m.name = eps == 0.0 ? "kink1d" : "kink1d-mollified";
  m.chart = ChartSpec::unbounded({1});
  auto g_of = [c](double x, double e, int side) {
    const auto pr = abs_profile(x, e, side);
    const double g = std::exp(2.0 * c * pr.value);
    return std::pair{g, 2.0 * c * pr.slope * g};
  };
  m.eval = [g_of, eps](const Vector& x) {
    return Matrix::Constant(1, 1, g_of(x[0], eps, side_of(x[0])).first);
  };
  m.derivative = [g_of, eps](const Vector& x, const Region& r) {
    const int side = r.empty() ? side_of(x[0]) : r[0];
    return std::vector<Matrix>{Matrix::Constant(1, 1, g_of(x[0], eps, side).second)};
  };
  if (eps == 0.0) {
    m.piece = [g_of](const Vector& x, const Region& r) {
      return Matrix::Constant(1, 1, g_of(x[0], 0.0, r[0]).first);
    };
    m.surfaces.push_back(SwitchingSurface::coordinate(0, 0.0, "x=0"));
    m.lipschitz_bound = 2.0 * c * std::exp(2.0 * c);
    m.lipschitz_radius = 1.0;
    m.mollified = [c](double e) {
      if (!(e > 0.0)) fail(ErrorKind::invalid_argument, "mollifier width must be positive");
      return kink1d_model(c, e);
    };
  }
  return m;
}

// F(x) = int_0^x sqrt(g) = sgn(x)(exp(c|x|) - 1)/c, so F(x(t)) is linear in t.
double kink_F(double x, double c) { return sgn(x) * std::expm1(c * std::abs(x)) / c; }
double kink_F_inv(double y, double c) { return sgn(y) * std::log1p(c * std::abs(y)) / c; }

CatalogEntry make_kink1d(const Params& p) {
  check_keys("kink1d", p, {"c"});
  const double c = param(p, "c", 1.0);
  if (!(c > 0.0) || !std::isfinite(c)) fail(ErrorKind::invalid_argument, "kink1d: c must be > 0");
  CatalogEntry e;
  e.name = "kink1d";
  e.params = {{"c", c}};
  e.model = kink1d_model(c, 0.0);
  e.oracle = [c](const GeodesicState& z0, double t) {
    const double x0 = z0.x[0];
    const double w = std::exp(c * std::abs(x0)) * z0.v[0];
    const double x = kink_F_inv(kink_F(x0, c) + w * t, c);
    Vector xv(1), vv(1);
    xv[0] = x;
    vv[0] = w * std::exp(-c * std::abs(x));
    return GeodesicState{xv, vv};
  };
  e.oracle_domain = "all states and times";
  return e;
}

// --- conformal2d ----------------------------------------------------------

MetricModel conformal_model(double c, double eps) {
  MetricModel m;
  m.name = eps == 0.0 ? "conformal2d" : "conformal2d-mollified";
  m.chart = ChartSpec::unbounded({1, 1});
  auto factor = [c](double x, double e, int side) {
    const auto pr = abs_profile(x, e, side);
    const double f = std::exp(2.0 * c * pr.value);
    return std::pair{f, 2.0 * c * pr.slope * f};
  };
  m.eval = [factor, eps](const Vector& x) {
    return Matrix(factor(x[0], eps, side_of(x[0])).first * Matrix::Identity(2, 2));
  };
  m.derivative = [factor, eps](const Vector& x, const Region& r) {
    const int side = r.empty() ? side_of(x[0]) : r[0];
    return std::vector<Matrix>{factor(x[0], eps, side).second * Matrix::Identity(2, 2),
                               Matrix::Zero(2, 2)};
  };
  if (eps == 0.0) {
    m.piece = [factor](const Vector& x, const Region& r) {
      return Matrix(factor(x[0], 0.0, r[0]).first * Matrix::Identity(2, 2));
    };
    m.surfaces.push_back(SwitchingSurface::coordinate(0, 0.0, "x=0"));
    m.lipschitz_bound = 2.0 * std::abs(c) * std::exp(2.0 * std::abs(c));
    m.lipschitz_radius = 1.0;
    m.mollified = [c](double e) {
      if (!(e > 0.0)) fail(ErrorKind::invalid_argument, "mollifier width must be positive");
      return conformal_model(c, e);
    };
  }
  return m;
}

CatalogEntry make_conformal(const Params& p) {
  check_keys("conformal2d", p, {"c"});
  const double c = param(p, "c", 1.0);
  if (!std::isfinite(c)) fail(ErrorKind::invalid_argument, "conformal2d: c must be finite");
  CatalogEntry e;
  e.name = "conformal2d";
  e.params = {{"c", c}};
  e.model = conformal_model(c, 0.0);
  e.oracle_domain = "no closed form";
  return e;
}

// --- rosen ----------------------------------------------------------------
// coordinates (u, v, X, Y)

MetricModel rosen_model(double eps) {
  MetricModel m;
  m.name = eps == 0.0 ? "rosen" : "rosen-mollified";
  m.chart = ChartSpec::unbounded({-1, 1, 1, 1});
  m.chart.upper[0] = 1.0 - kRosenMargin;
  auto metric = [](double up) {
    Matrix g = Matrix::Zero(4, 4);
    g(0, 1) = g(1, 0) = -0.5;
    g(2, 2) = (1.0 + up) * (1.0 + up);
    g(3, 3) = (1.0 - up) * (1.0 - up);
    return g;
  };
  m.eval = [metric, eps](const Vector& x) {
    return metric(positive_part(x[0], eps, side_of(x[0])).value);
  };
  m.derivative = [eps](const Vector& x, const Region& r) {
    const int side = r.empty() ? side_of(x[0]) : r[0];
    const auto pr = positive_part(x[0], eps, side);
    std::vector<Matrix> dg(4, Matrix::Zero(4, 4));
    dg[0](2, 2) = 2.0 * (1.0 + pr.value) * pr.slope;
    dg[0](3, 3) = -2.0 * (1.0 - pr.value) * pr.slope;
    return dg;
  };
  if (eps == 0.0) {
    m.piece = [metric](const Vector& x, const Region& r) {
      return metric(positive_part(x[0], 0.0, r[0]).value);
    };
    m.surfaces.push_back(SwitchingSurface::coordinate(0, 0.0, "u=0"));
    const double r = 0.9;
    m.lipschitz_bound = 2.0 * (1.0 + r);
    m.lipschitz_radius = r;
    m.mollified = [](double e) {
      if (!(e > 0.0)) fail(ErrorKind::invalid_argument, "mollifier width must be positive");
      return rosen_model(e);
    };
  }
  return m;
}

// Antiderivatives of 1/(1 + u+)^2 and 1/(1 - u+)^2, zero at u = 0.
double rosen_GX(double u) { return u < 0.0 ? u : u / (1.0 + u); }
double rosen_GY(double u) { return u < 0.0 ? u : u / (1.0 - u); }

GeodesicState rosen_oracle(const GeodesicState& z0, double t) {
  const double u0 = z0.x[0], v0 = z0.x[1], X0 = z0.x[2], Y0 = z0.x[3];
  const double U = z0.v[0], Vd = z0.v[1], Xd = z0.v[2], Yd = z0.v[3];
  const double limit = 1.0 - kRosenMargin;
  const double u = u0 + U * t;
  if (!(u0 <= limit) || !(u <= limit))
    fail(ErrorKind::oracle_domain, "rosen oracle requires u <= 1 - 1e-6 along the geodesic");
  const double a0 = 1.0 + std::max(u0, 0.0), b0 = 1.0 - std::max(u0, 0.0);
  const double P = a0 * a0 * Xd;
  const double Q = b0 * b0 * Yd;
  const double L = -U * Vd + P * Xd + Q * Yd;
  const double a = 1.0 + std::max(u, 0.0), b = 1.0 - std::max(u, 0.0);

  Vector x(4), v(4);
  if (U != 0.0) {
    const double dGX = rosen_GX(u) - rosen_GX(u0);
    const double dGY = rosen_GY(u) - rosen_GY(u0);
    x << u, v0 + (P * P * dGX + Q * Q * dGY) / (U * U) - L * t / U, X0 + P / U * dGX,
        Y0 + Q / U * dGY;
    v << U, (P * P / (a * a) + Q * Q / (b * b) - L) / U, P / (a * a), Q / (b * b);
    return {x, v};
  }
  if (u0 == 0.0)
    fail(ErrorKind::oracle_domain, "rosen oracle undefined for geodesics lying in u = 0");
  // u frozen: X, Y uniform, v quadratic.
  const double acc = u0 > 0.0 ? -2.0 * (1.0 + u0) * Xd * Xd + 2.0 * (1.0 - u0) * Yd * Yd : 0.0;
  x << u0, v0 + Vd * t + 0.5 * acc * t * t, X0 + Xd * t, Y0 + Yd * t;
  v << 0.0, Vd + acc * t, Xd, Yd;
  return {x, v};
}

CatalogEntry make_rosen(const Params& p) {
  check_keys("rosen", p, {});
  CatalogEntry e;
  e.name = "rosen";
  e.model = rosen_model(0.0);
  e.oracle = rosen_oracle;
  e.oracle_domain = "u <= 1 - 1e-6 along the geodesic; not for geodesics inside u = 0";
  return e;
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names{"flat", "kink1d", "conformal2d", "rosen"};
  return names;
}

CatalogEntry catalog_model(const std::string& name, const Params& params) {
  if (name == "flat") return make_flat(params);
  if (name == "kink1d") return make_kink1d(params);
  if (name == "conformal2d") return make_conformal(params);
  if (name == "rosen") return make_rosen(params);
  fail(ErrorKind::invalid_argument, "unknown metric '" + name + "'");
}

GeodesicState exact_geodesic(const CatalogEntry& entry, const GeodesicState& z0, double t) {
  if (!entry.oracle) fail(ErrorKind::precondition, entry.name + " has no closed-form geodesics");
  if (z0.x.size() != entry.model.dim() || z0.v.size() != entry.model.dim())
    fail(ErrorKind::invalid_argument, "initial state has wrong dimension for " + entry.name);
  return entry.oracle(z0, t);
}

MetricModel mollify(const CatalogEntry& entry, double epsilon) {
  if (!(epsilon > 0.0)) fail(ErrorKind::invalid_argument, "mollifier width must be positive");
  if (!entry.model.mollified) fail(ErrorKind::precondition, entry.name + " has no mollifier");
  return entry.model.mollified(epsilon);
}

Scenario catalog_scenario(const CatalogEntry& entry, const std::string& name) {
  Scenario s;
  s.name = name;
  if (entry.name == "flat") {
    if (name != "crossing" && name != "straight")
      fail(ErrorKind::invalid_argument, "unknown scenario '" + name + "' for flat");
    const int n = entry.model.dim();
    Vector x = Vector::Zero(n), v = Vector::Zero(n);
    v[0] = 1.0;
    if (n > 1) v[1] = 2.0;
    s.z0 = {x, v};
    s.t1 = 10.0;
    return s;
  }
  if (name != "crossing" && !(entry.name == "rosen" && name == "impulse-crossing"))
    fail(ErrorKind::invalid_argument, "unknown scenario '" + name + "' for " + entry.name);
  if (entry.name == "kink1d") {
    s.z0 = {vec({-1.0}), vec({1.0})};
    s.t1 = 2.0;
  } else if (entry.name == "conformal2d") {
    s.z0 = {vec({-0.5, 0.0}), vec({1.0, 0.3})};
    s.t1 = 2.0;
  } else {
    s.z0 = {vec({-1.0, 0.0, 0.0, 0.0}), vec({1.0, 0.0, 0.5, 0.0})};
    s.t1 = 1.9;
  }
  return s;
}

std::vector<Scenario> crossing_fan(const CatalogEntry& entry, int count) {
  if (count < 1) fail(ErrorKind::invalid_argument, "fan size must be positive");
  std::vector<Scenario> fan;
  for (int i = 0; i < count; ++i) {
    const double s = count == 1 ? 0.5 : static_cast<double>(i) / (count - 1);
    const double r1 = frac(kGolden * (i + 1));
    const double r2 = frac(kGolden * kGolden * (i + 1) + 0.1);
    Scenario sc;
    sc.name = entry.name + "-fan-" + std::to_string(i);
    if (entry.name == "kink1d") {
      double x0 = -1.0 + 0.8 * s, v0 = 0.5 + 1.5 * r1;
      if (i % 2 == 1) {
        x0 = -x0;
        v0 = -v0;
      }
      sc.z0 = {vec({x0}), vec({v0})};
      sc.t1 = 2.0;
    } else if (entry.name == "conformal2d") {
      const double c = entry.params.at("c");
      const double theta = -0.5 + r1;
      const double x0 = -0.5;
      const double speed = std::exp(-c * std::abs(x0));
      sc.z0 = {vec({x0, -0.3 + 0.6 * s}), vec({speed * std::cos(theta), speed * std::sin(theta)})};
      sc.t1 = 2.0;
    } else if (entry.name == "rosen") {
      const double U = 0.5 + 0.5 * r1;
      sc.z0 = {vec({-0.5, -0.5 + s, s, 1.0 - s}), vec({U, -1.0 + 2.0 * r2, -1.0 + 2.0 * r1, 1.0 - 2.0 * r2})};
      sc.t1 = 1.0 / U;
    } else {
      fail(ErrorKind::invalid_argument, entry.name + " has no switching surface to cross");
    }
    fan.push_back(std::move(sc));
  }
  return fan;
}

PiecewiseSystem demo_system(const std::string& name) {
  PiecewiseSystem sys;
  sys.name = name;
  if (name == "sliding" || name == "repulsive") {
    const double dir = name == "sliding" ? -1.0 : 1.0;
    sys.dim = sys.position_dim = 2;
    sys.surfaces.push_back(SwitchingSurface::coordinate(0, 0.0, "x1=0"));
    sys.field = [dir](const Vector&, const Region& r) { return vec({dir * r[0], 1.0}); };
    return sys;
  }
  if (name == "sign1d") {
    sys.dim = sys.position_dim = 1;
    sys.surfaces.push_back(SwitchingSurface::coordinate(0, 0.0, "x=0"));
    sys.field = [](const Vector&, const Region& r) { return vec({-static_cast<double>(r[0])}); };
    return sys;
  }
  fail(ErrorKind::invalid_argument, "unknown demo system '" + name + "'");
}

}  // namespace lipgeo
