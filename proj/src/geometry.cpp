#include "lipgeo/geometry.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "lipgeo/errors.hpp"

namespace lipgeo {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::degeneracy: return "degeneracy";
    case ErrorKind::signature: return "signature";
    case ErrorKind::proximity: return "proximity";
    case ErrorKind::surface_degeneracy: return "surface_degeneracy";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::evaluation: return "evaluation";
    case ErrorKind::step_underflow: return "step_underflow";
    case ErrorKind::chart_exit: return "chart_exit";
    case ErrorKind::zeno: return "zeno";
    case ErrorKind::oracle_domain: return "oracle_domain";
    case ErrorKind::stagnation: return "stagnation";
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// SwitchingSurface

SwitchingSurface SwitchingSurface::coordinate(int index, double offset, std::string label) {
  SwitchingSurface s;
  s.label = std::move(label);
  s.sigma = [index, offset](const Vector& x) { return x[index] - offset; };
  s.gradient = [index](const Vector& x) {
    Vector g = Vector::Zero(x.size());
    g[index] = 1.0;
    return g;
  };
  return s;
}

SwitchingSurface SwitchingSurface::lifted(int position_dim) const {
  SwitchingSurface s;
  s.label = label;
  s.sigma = [sigma = sigma, position_dim](const Vector& z) {
    return sigma(z.head(position_dim));
  };
  s.gradient = [gradient = gradient, position_dim](const Vector& z) {
    Vector g = Vector::Zero(z.size());
    g.head(position_dim) = gradient(z.head(position_dim));
    return g;
  };
  return s;
}

// ---------------------------------------------------------------------------
// ChartSpec

ChartSpec ChartSpec::unbounded(std::vector<int> signature) {
  ChartSpec c;
  c.dim = static_cast<int>(signature.size());
  c.lower = Vector::Constant(c.dim, -std::numeric_limits<double>::infinity());
  c.upper = Vector::Constant(c.dim, std::numeric_limits<double>::infinity());
  c.signature = std::move(signature);
  return c;
}

bool ChartSpec::contains(const Vector& x) const {
  if (x.size() != dim) return false;
  for (int i = 0; i < dim; ++i) {
    if (!std::isfinite(x[i]) || x[i] < lower[i] || x[i] > upper[i]) return false;
  }
  return true;
}

void ChartSpec::validate() const {
  if (dim < 1) fail(ErrorKind::invalid_argument, "chart dimension must be >= 1");
  if (static_cast<int>(signature.size()) != dim)
    fail(ErrorKind::invalid_argument, "signature length does not match chart dimension");
  if (lower.size() != dim || upper.size() != dim)
    fail(ErrorKind::invalid_argument, "chart bounds do not match chart dimension");
  for (int s : signature) {
    if (s != 1 && s != -1) fail(ErrorKind::invalid_argument, "signature entries must be +1 or -1");
  }
  for (int i = 0; i < dim; ++i) {
    if (!(lower[i] < upper[i])) fail(ErrorKind::invalid_argument, "chart domain is empty");
  }
}

int ChartSpec::negative_count() const {
  int n = 0;
  for (int s : signature) n += (s < 0);
  return n;
}

// ---------------------------------------------------------------------------
// ChristoffelSymbols

ChristoffelSymbols::ChristoffelSymbols(int dim)
    : dim_(dim), data_(static_cast<std::size_t>(dim) * dim * dim, 0.0) {}

void ChristoffelSymbols::symmetrize() {
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      for (int k = j + 1; k < dim_; ++k) {
        const double m = 0.5 * ((*this)(i, j, k) + (*this)(i, k, j));
        (*this)(i, j, k) = m;
        (*this)(i, k, j) = m;
      }
    }
  }
}

bool ChristoffelSymbols::all_finite() const {
  for (double d : data_) {
    if (!std::isfinite(d)) return false;
  }
  return true;
}

Vector ChristoffelSymbols::acceleration(const Vector& v) const {
  Vector a = Vector::Zero(dim_);
  for (int i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (int j = 0; j < dim_; ++j) {
      for (int k = 0; k < dim_; ++k) s += (*this)(i, j, k) * v[j] * v[k];
    }
    a[i] = -s;
  }
  return a;
}

double ChristoffelSymbols::max_abs_diff(const ChristoffelSymbols& other) const {
  double m = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) m = std::max(m, std::abs(data_[i] - other.data_[i]));
  return m;
}

ChristoffelSymbols levi_civita(const MetricTensor& g, std::span<const Matrix> dg) {
  const int n = static_cast<int>(g.rows());
  const Matrix ginv = g.inverse();
  ChristoffelSymbols gamma(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = j; k < n; ++k) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) {
          s += ginv(i, l) * (dg[j](l, k) + dg[k](j, l) - dg[l](j, k));
        }
        gamma(i, j, k) = 0.5 * s;
        gamma(i, k, j) = 0.5 * s;
      }
    }
  }
  gamma.symmetrize();
  return gamma;
}

// ---------------------------------------------------------------------------
// GeodesicState

Vector GeodesicState::stacked() const {
  Vector z(x.size() + v.size());
  z << x, v;
  return z;
}

GeodesicState GeodesicState::split(const Vector& z) {
  const auto n = z.size() / 2;
  return {z.head(n), z.tail(n)};
}

// ---------------------------------------------------------------------------
// MetricModel

Region MetricModel::region_of(const Vector& x, int tie_break) const {
  Region r(surfaces.size(), tie_break);
  for (std::size_t k = 0; k < surfaces.size(); ++k) {
    const double s = surfaces[k].sigma(x);
    if (s > surface_tol) r[k] = 1;
    else if (s < -surface_tol) r[k] = -1;
  }
  return r;
}

std::optional<std::size_t> MetricModel::surface_at(const Vector& x, double tol) const {
  for (std::size_t k = 0; k < surfaces.size(); ++k) {
    if (std::abs(surfaces[k].sigma(x)) <= tol) return k;
  }
  return std::nullopt;
}

namespace {

std::string describe(const Vector& x) {
  std::ostringstream os;
  os << '(';
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
  os << ')';
  return os.str();
}

void require_in_domain(const MetricModel& model, const Vector& x) {
  if (!model.chart.contains(x)) {
    fail(ErrorKind::domain, "point " + describe(x) + " outside the chart of " + model.name);
  }
}

MetricTensor checked(const MetricModel& model, MetricTensor g, const Vector& x,
                     bool check_signature) {
  const int n = model.dim();
  if (g.rows() != n || g.cols() != n)
    fail(ErrorKind::evaluation, "metric of " + model.name + " has the wrong shape");
  if (!g.allFinite())
    fail(ErrorKind::evaluation, "non-finite metric at " + describe(x));
  g = 0.5 * (g + g.transpose()).eval();
  const double det = g.determinant();
  if (!(std::abs(det) > model.degeneracy_floor)) {
    std::ostringstream os;
    os << "degenerate metric of " << model.name << " at " << describe(x)
       << " (|det g| = " << std::abs(det) << ")";
    fail(ErrorKind::degeneracy, os.str());
  }
  if (check_signature) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
    int negatives = 0;
    for (int i = 0; i < n; ++i) negatives += es.eigenvalues()[i] < 0.0;
    if (negatives != model.chart.negative_count())
      fail(ErrorKind::signature, "metric signature mismatch at " + describe(x));
  }
  return g;
}

}  // namespace

double default_fd_step(const Vector& x) { return 1e-6 * (1.0 + x.norm()); }

MetricTensor eval_metric(const MetricModel& model, const Vector& x, bool check_signature) {
  require_in_domain(model, x);
  return checked(model, model.eval(x), x, check_signature);
}

MetricTensor eval_piece(const MetricModel& model, const Vector& x, const Region& region) {
  require_in_domain(model, x);
  if (!model.piece) return checked(model, model.eval(x), x, false);
  return checked(model, model.piece(x, region), x, false);
}

std::vector<Matrix> metric_derivative(const MetricModel& model, const Vector& x,
                                      const Region& region) {
  require_in_domain(model, x);
  if (model.derivative) return model.derivative(x, region);
  const int n = model.dim();
  const double h = default_fd_step(x);
  auto piece = [&](const Vector& y) -> Matrix {
    return model.piece ? model.piece(y, region) : model.eval(y);
  };
  std::vector<Matrix> dg(n);
  for (int k = 0; k < n; ++k) {
    Vector xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    dg[k] = (piece(xp) - piece(xm)) / (2.0 * h);
  }
  return dg;
}

ChristoffelSymbols christoffel(const MetricModel& model, const Vector& x, ChristoffelMode mode,
                               std::optional<double> step) {
  require_in_domain(model, x);
  const int n = model.dim();
  if (mode == ChristoffelMode::analytic) {
    if (!model.derivative)
      fail(ErrorKind::precondition, model.name + " has no analytic Christoffel symbols");
    if (auto k = model.surface_at(x, model.surface_tol)) {
      fail(ErrorKind::proximity, "point " + describe(x) + " lies on surface " +
                                     model.surfaces[*k].label + "; use one-sided limits");
    }
    const Region region = model.region_of(x);
    const MetricTensor g = eval_metric(model, x);
    const auto dg = model.derivative(x, region);
    return levi_civita(g, dg);
  }

  const double h = step.value_or(default_fd_step(x));
  if (!(h > 0.0)) fail(ErrorKind::invalid_argument, "finite-difference step must be positive");
  for (const auto& s : model.surfaces) {
    const double grad = s.gradient(x).norm();
    if (grad <= kSurfaceGradientFloor)
      fail(ErrorKind::surface_degeneracy, "vanishing gradient of surface " + s.label);
    if (std::abs(s.sigma(x)) / grad <= h) {
      fail(ErrorKind::proximity, "point " + describe(x) + " within one step of surface " +
                                     s.label + "; use one-sided limits");
    }
  }
  const MetricTensor g = eval_metric(model, x);
  std::vector<Matrix> dg(n);
  for (int k = 0; k < n; ++k) {
    Vector xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    dg[k] = (eval_metric(model, xp) - eval_metric(model, xm)) / (2.0 * h);
  }
  return levi_civita(g, dg);
}

ChristoffelSymbols christoffel_one_sided(const MetricModel& model, const Vector& x,
                                         const Region& region) {
  const MetricTensor g = eval_piece(model, x, region);
  const auto dg = metric_derivative(model, x, region);
  return levi_civita(g, dg);
}

Vector geodesic_rhs(const MetricModel& model, const GeodesicState& z) {
  if (auto k = model.surface_at(z.x, model.surface_tol)) {
    fail(ErrorKind::proximity, "geodesic_rhs evaluated on surface " + model.surfaces[*k].label +
                                   "; use the Filippov map");
  }
  return geodesic_rhs(model, z.stacked(), model.region_of(z.x));
}

Vector geodesic_rhs(const MetricModel& model, const Vector& z, const Region& region) {
  const int n = model.dim();
  const Vector x = z.head(n);
  const Vector v = z.tail(n);
  Vector f(2 * n);
  f.head(n) = v;
  f.tail(n) = christoffel_one_sided(model, x, region).acceleration(v);
  return f;
}

double quadratic_form(const MetricTensor& g, const Vector& v) { return v.dot(g * v); }

}  // namespace lipgeo
