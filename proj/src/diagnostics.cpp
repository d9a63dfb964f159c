#include "lipgeo/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <random>

#include "lipgeo/errors.hpp"

namespace lipgeo {

LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    fail(ErrorKind::invalid_argument, "log-log fit needs two or more paired points");
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      fail(ErrorKind::invalid_argument, "log-log fit needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  const double vxx = sxx - sx * sx / n;
  const double vxy = sxy - sx * sy / n;
  const double vyy = syy - sy * sy / n;
  if (!(vxx > 0.0)) fail(ErrorKind::invalid_argument, "log-log fit needs distinct abscissae");
  LogLogFit fit;
  fit.slope = vxy / vxx;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.r_squared = vyy > 0.0 ? vxy * vxy / (vxx * vyy) : 1.0;
  return fit;
}

double holder_beta(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    fail(ErrorKind::invalid_argument, "Holder exponent must lie in (0, 1]");
  return alpha / (2.0 - alpha);
}

namespace {

Vector velocity_part(const Trajectory& traj, const Vector& z) {
  return traj.geodesic_layout() ? Vector(z.tail(traj.position_dim)) : z;
}

// Limits of the dense output at t from one side, extrapolated quadratically
// from three interior points so the value at the node itself is not used.
Vector one_sided_limit(const Trajectory& traj, double t, double side, double lo, double hi) {
  const double d = 1e-6 * (1.0 + std::abs(t));
  const double far = t + side * 3.0 * d;
  if (far <= lo || far >= hi) return side < 0 ? traj.dense.eval_left(t) : traj.dense.eval_right(t);
  const Vector z1 = traj.dense.eval(t + side * d);
  const Vector z2 = traj.dense.eval(t + side * 2.0 * d);
  const Vector z3 = traj.dense.eval(far);
  return 3.0 * z1 - 3.0 * z2 + z3;
}

}  // namespace

C1Report velocity_jump(const Trajectory& traj) {
  C1Report report;
  if (traj.dense.empty()) return report;
  const double t_begin = traj.dense.t_begin();
  const double t_end = traj.dense.t_end();
  for (std::size_t i = 0; i < traj.events.size(); ++i) {
    const double t = traj.events[i].time;
    if (t <= t_begin || t >= t_end) {
      report.per_event_jumps.push_back(0.0);
      continue;
    }
    const double prev = i > 0 ? std::max(t_begin, traj.events[i - 1].time) : t_begin;
    const double next = i + 1 < traj.events.size() ? std::min(t_end, traj.events[i + 1].time) : t_end;
    const Vector left = velocity_part(traj, one_sided_limit(traj, t, -1.0, prev, next));
    const Vector right = velocity_part(traj, one_sided_limit(traj, t, 1.0, prev, next));
    const double jump = (right - left).norm();
    report.per_event_jumps.push_back(jump);
    report.max_velocity_jump = std::max(report.max_velocity_jump, jump);
  }
  return report;
}

ResidualReport inclusion_residual(const Trajectory& traj, const PiecewiseSystem& sys,
                                  int n_samples, std::uint64_t seed) {
  if (n_samples < 1) fail(ErrorKind::invalid_argument, "n_samples must be positive");
  ResidualReport report;
  if (traj.dense.empty()) return report;
  std::mt19937_64 rng(seed);
  const double lo = traj.dense.t_begin(), hi = traj.dense.t_end();
  std::uniform_real_distribution<double> pick(lo, hi);
  double sum = 0.0;
  const int max_attempts = 50 * n_samples;
  for (int attempt = 0; attempt < max_attempts && report.samples < n_samples; ++attempt) {
    const double t = pick(rng);
    const double h = 1e-6 * (1.0 + std::abs(t));
    if (t - h < lo || t + h > hi) continue;
    const bool near_event = std::any_of(traj.events.begin(), traj.events.end(),
                                        [&](const Event& e) { return std::abs(e.time - t) <= 2.0 * h; });
    if (near_event) continue;
    const Vector zdot = (traj.dense.eval(t + h) - traj.dense.eval(t - h)) / (2.0 * h);
    const double d = filippov_set(sys, traj.dense.eval(t)).distance(zdot);
    report.max = std::max(report.max, d);
    sum += d;
    ++report.samples;
  }
  if (report.samples > 0) report.mean = sum / report.samples;
  return report;
}

ResidualReport inclusion_residual(const Trajectory& traj, const MetricModel& model,
                                  int n_samples, std::uint64_t seed) {
  return inclusion_residual(traj, geodesic_system(model), n_samples, seed);
}

double energy_drift(const Trajectory& traj, const MetricModel& model) {
  const int n = model.dim();
  double e0 = 0.0, drift = 0.0;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const Vector& z = traj.states[i];
    const double e = quadratic_form(eval_metric(model, z.head(n)), z.tail(n));
    if (i == 0) e0 = e;
    drift = std::max(drift, std::abs(e - e0));
  }
  return drift;
}

double max_position_deviation(const Trajectory& a, const Trajectory& b, int grid) {
  if (a.dense.empty() || b.dense.empty()) fail(ErrorKind::precondition, "empty trajectory");
  if (grid < 2) fail(ErrorKind::invalid_argument, "grid needs two or more points");
  const double lo = std::max(a.dense.t_begin(), b.dense.t_begin());
  const double hi = std::min(a.dense.t_end(), b.dense.t_end());
  if (!(hi > lo)) fail(ErrorKind::precondition, "trajectories do not overlap in time");
  const int n = a.position_dim;
  double dev = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double t = i + 1 == grid ? hi : lo + (hi - lo) * i / (grid - 1);
    const Vector d = a.dense.eval(t).head(n) - b.dense.eval(t).head(n);
    dev = std::max(dev, d.lpNorm<Eigen::Infinity>());
  }
  return dev;
}

namespace {

Trajectory reference_run(const CatalogEntry& entry, const GeodesicState& z0, double t0, double t1,
                         const IntegratorConfig& cfg) {
  Trajectory ref = integrate_filippov(entry.model, z0, t0, t1, cfg);
  if (!ref.completed()) {
    fail(ErrorKind::precondition, "reference Filippov run ended early (" +
                                      std::string(to_string(ref.termination)) + "): " + ref.message);
  }
  return ref;
}

void finish(ConvergenceReport& r) {
  r.strictly_decreasing = true;
  for (std::size_t i = 1; i < r.errors.size(); ++i)
    if (!(r.errors[i] < r.errors[i - 1])) r.strictly_decreasing = false;
  const bool positive = std::all_of(r.errors.begin(), r.errors.end(), [](double e) { return e > 0.0; });
  r.order = r.errors.size() >= 2 && positive ? fit_loglog(r.parameters, r.errors).slope
                                             : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

ConvergenceReport regularization_convergence(const CatalogEntry& entry, const GeodesicState& z0,
                                             double t0, double t1,
                                             const std::vector<double>& eps_ladder,
                                             const IntegratorConfig& cfg) {
  for (std::size_t i = 1; i < eps_ladder.size(); ++i)
    if (!(eps_ladder[i] < eps_ladder[i - 1]))
      fail(ErrorKind::invalid_argument, "eps ladder must be strictly decreasing");
  const Trajectory ref = reference_run(entry, z0, t0, t1, cfg);
  ConvergenceReport r;
  for (double eps : eps_ladder) {
    const Trajectory reg = integrate_regularized(entry.model, eps, z0, t0, t1, cfg);
    if (!reg.completed())
      fail(ErrorKind::precondition, "regularized run ended early: " + reg.message);
    r.parameters.push_back(eps);
    r.errors.push_back(max_position_deviation(ref, reg));
  }
  finish(r);
  return r;
}

ConvergenceReport caratheodory_convergence(const CatalogEntry& entry, const GeodesicState& z0,
                                           double t0, double t1,
                                           const std::vector<double>& steps,
                                           const IntegratorConfig& cfg) {
  const Trajectory ref = reference_run(entry, z0, t0, t1, cfg);
  ConvergenceReport r;
  for (double step : steps) {
    const Trajectory car = integrate_caratheodory(entry.model, z0, t0, t1, step, cfg.tie_break);
    if (!car.completed())
      fail(ErrorKind::precondition, "Caratheodory run ended early: " + car.message);
    r.parameters.push_back(step);
    double dev = 0.0;
    const int n = car.position_dim;
    for (std::size_t i = 0; i < car.times.size(); ++i) {
      const Vector d = car.states[i].head(n) - ref.dense.eval(car.times[i]).head(n);
      dev = std::max(dev, d.lpNorm<Eigen::Infinity>());
    }
    r.errors.push_back(dev);
  }
  finish(r);
  return r;
}

HolderFit holder_fit(const Trajectory& traj, std::size_t event_index, double half_window,
                     double alpha_assumed) {
  if (event_index >= traj.events.size()) fail(ErrorKind::precondition, "no such event");
  if (!(half_window > 0.0)) fail(ErrorKind::invalid_argument, "window must be positive");
  const double ts = traj.events[event_index].time;
  for (std::size_t i = 0; i < traj.events.size(); ++i) {
    if (i != event_index && std::abs(traj.events[i].time - ts) < half_window)
      fail(ErrorKind::precondition, "fit window contains another event");
  }
  const Vector vs = velocity_part(traj, traj.events[event_index].state_after);
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + vs.norm());
  const double lo = traj.dense.t_begin(), hi = traj.dense.t_end();
  std::vector<double> dt, dv;
  double used_lo = ts, used_hi = ts;
  for (int j = 0;; ++j) {
    const double d = 1e-6 * std::pow(10.0, j / 10.0);
    if (d > half_window * (1.0 + 1e-12)) break;
    for (double side : {-1.0, 1.0}) {
      const double t = ts + side * d;
      if (t < lo || t > hi) continue;
      const double diff = (velocity_part(traj, traj.dense.eval(t)) - vs).norm();
      if (diff <= floor) continue;
      dt.push_back(d);
      dv.push_back(diff);
      used_lo = std::min(used_lo, t);
      used_hi = std::max(used_hi, t);
    }
  }
  if (dt.size() < 20)
    fail(ErrorKind::invalid_argument, "Holder window too small: " + std::to_string(dt.size()) +
                                          " usable points, need 20");
  const auto fit = fit_loglog(dt, dv);
  HolderFit h;
  h.alpha_assumed = alpha_assumed;
  h.beta_predicted = holder_beta(alpha_assumed);
  h.beta_fit = fit.slope;
  h.r_squared = fit.r_squared;
  h.window_lo = used_lo;
  h.window_hi = used_hi;
  h.points = static_cast<int>(dt.size());
  return h;
}

std::string_view to_string(UniquenessFlag flag) {
  switch (flag) {
    case UniquenessFlag::contracting: return "contracting";
    case UniquenessFlag::bounded: return "bounded";
    case UniquenessFlag::splitting: return "splitting";
  }
  return "unknown";
}

FunnelReport uniqueness_funnel(const PiecewiseSystem& sys, const Vector& z0, double radius,
                               int n_curves, double t0, double t1, std::uint64_t seed,
                               const IntegratorConfig& cfg) {
  if (!(radius > 0.0)) fail(ErrorKind::invalid_argument, "funnel radius must be positive");
  if (n_curves < 2) fail(ErrorKind::invalid_argument, "funnel needs two or more curves");
  std::mt19937_64 rng(seed);
  std::vector<Trajectory> runs;
  double t_common = t1;
  for (int i = 0; i < n_curves; ++i) {
    runs.push_back(integrate_filippov(sys, sample_ball(z0, radius, rng), t0, t1, cfg));
    t_common = std::min(t_common, runs.back().t_last());
  }
  FunnelReport report;
  report.initial_radius = radius;
  constexpr int kGrid = 101;
  double first = 0.0;
  for (int k = 0; k < kGrid; ++k) {
    const double t = k + 1 == kGrid ? t_common : t0 + (t_common - t0) * k / (kGrid - 1);
    std::vector<Vector> states;
    for (const auto& r : runs) states.push_back(r.dense.eval(t));
    double spread = 0.0;
    for (std::size_t a = 0; a < states.size(); ++a)
      for (std::size_t b = a + 1; b < states.size(); ++b)
        spread = std::max(spread, (states[a] - states[b]).norm());
    if (k == 0) first = spread;
    report.spread_over_time.emplace_back(t, spread);
    if (first > 0.0) report.max_ratio = std::max(report.max_ratio, spread / first);
  }
  const double last = report.spread_over_time.back().second;
  if (report.max_ratio > kSplittingRatio) report.flag = UniquenessFlag::splitting;
  else if (last < first) report.flag = UniquenessFlag::contracting;
  else report.flag = UniquenessFlag::bounded;
  return report;
}

FunnelReport uniqueness_funnel(const MetricModel& model, const GeodesicState& z0, double radius,
                               int n_curves, double t0, double t1, std::uint64_t seed,
                               const IntegratorConfig& cfg) {
  return uniqueness_funnel(geodesic_system(model), z0.stacked(), radius, n_curves, t0, t1, seed,
                           cfg);
}

// ---------------------------------------------------------------------------
// Discrete shortest curves

namespace {

// Split [0, 1] of the segment a + s (b - a) at surface crossings.
std::vector<double> split_points(const MetricModel& model, const Vector& a, const Vector& b) {
  std::vector<double> cuts{0.0, 1.0};
  for (const auto& s : model.surfaces) {
    const double sa = s.sigma(a), sb = s.sigma(b);
    if (!((sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0))) continue;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double sm = s.sigma(a + mid * (b - a));
      if ((sm < 0.0) == (sa < 0.0)) lo = mid;
      else hi = mid;
    }
    cuts.push_back(0.5 * (lo + hi));
  }
  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

constexpr std::array<double, 3> kGaussNodes{-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr std::array<double, 3> kGaussWeights{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

class DiscreteEnergy {
 public:
  DiscreteEnergy(const MetricModel& model, int segments) : model_(model), n_(segments) {}

  // E = N * sum_i int_0^1 g(x_i + s d_i)(d_i, d_i) ds, exact split at surfaces
  // keeps E continuously differentiable in the nodes.
  double value(const std::vector<Vector>& x) const {
    double e = 0.0;
    for (int i = 0; i < n_; ++i) {
      const Vector d = x[i + 1] - x[i];
      for_each_point(x[i], x[i + 1], [&](const Vector& y, double, double w, const Region& r) {
        e += w * quadratic_form(eval_piece(model_, y, r), d);
      });
    }
    return n_ * e;
  }

  std::vector<Vector> gradient(const std::vector<Vector>& x) const {
    const int dim = model_.dim();
    std::vector<Vector> g(x.size(), Vector::Zero(dim));
    for (int i = 0; i < n_; ++i) {
      const Vector d = x[i + 1] - x[i];
      for_each_point(x[i], x[i + 1], [&](const Vector& y, double s, double w, const Region& r) {
        const Matrix gm = eval_piece(model_, y, r);
        const auto dg = metric_derivative(model_, y, r);
        Vector dxg(dim);
        for (int k = 0; k < dim; ++k) dxg[k] = quadratic_form(dg[k], d);
        const Vector gd = 2.0 * gm * d;
        g[i] += w * n_ * ((1.0 - s) * dxg - gd);
        g[i + 1] += w * n_ * (s * dxg + gd);
      });
    }
    g.front().setZero();
    g.back().setZero();
    return g;
  }

 private:
  template <class F>
  void for_each_point(const Vector& a, const Vector& b, F&& f) const {
    const auto cuts = split_points(model_, a, b);
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double s0 = cuts[c], s1 = cuts[c + 1];
      if (!(s1 > s0)) continue;
      const Region r = model_.region_of(a + 0.5 * (s0 + s1) * (b - a), +1);
      for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
        const double s = 0.5 * (s0 + s1) + 0.5 * (s1 - s0) * kGaussNodes[q];
        f(Vector(a + s * (b - a)), s, 0.5 * (s1 - s0) * kGaussWeights[q], r);
      }
    }
  }

  const MetricModel& model_;
  int n_;
};

// Solve (2N * tridiag(-1, 2, -1)) y = rhs on interior nodes, per coordinate.
std::vector<Vector> precondition(const std::vector<Vector>& rhs, int segments) {
  const int m = segments - 1;
  const int dim = static_cast<int>(rhs.front().size());
  std::vector<Vector> y(rhs.size(), Vector::Zero(dim));
  const double scale = 2.0 * segments;
  std::vector<double> cp(m), dp(m);
  for (int k = 0; k < dim; ++k) {
    for (int j = 0; j < m; ++j) {
      const double b = 2.0 * scale, a = -scale, c = -scale;
      const double r = rhs[j + 1][k];
      if (j == 0) {
        cp[j] = c / b;
        dp[j] = r / b;
      } else {
        const double den = b - a * cp[j - 1];
        cp[j] = c / den;
        dp[j] = (r - a * dp[j - 1]) / den;
      }
    }
    for (int j = m - 1; j >= 0; --j) {
      const double next = j + 1 < m ? y[j + 2][k] : 0.0;
      y[j + 1][k] = dp[j] - cp[j] * next;
    }
  }
  return y;
}

}  // namespace

double polyline_length(const MetricModel& model, const std::vector<Vector>& polyline,
                       int subdivisions) {
  if (polyline.size() < 2) fail(ErrorKind::invalid_argument, "polyline needs two or more nodes");
  if (subdivisions < 1) fail(ErrorKind::invalid_argument, "subdivisions must be positive");
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const Vector& a = polyline[i];
    const Vector& b = polyline[i + 1];
    const Vector d = b - a;
    const auto cuts = split_points(model, a, b);
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double s0 = cuts[c], s1 = cuts[c + 1];
      if (!(s1 > s0)) continue;
      const Region r = model.region_of(a + 0.5 * (s0 + s1) * d, +1);
      auto speed = [&](double s) {
        return std::sqrt(std::max(0.0, quadratic_form(eval_piece(model, a + s * d, r), d)));
      };
      const double h = (s1 - s0) / subdivisions;
      double sum = 0.5 * (speed(s0) + speed(s1));
      for (int k = 1; k < subdivisions; ++k) sum += speed(s0 + k * h);
      len += sum * h;
    }
  }
  return len;
}

ShortestCurve shortest_curve_oracle(const MetricModel& model, const Vector& p, const Vector& q,
                                    int n_nodes, const ShortestCurveOptions& opts) {
  if (!model.is_riemannian())
    fail(ErrorKind::precondition, "shortest curves need a Riemannian metric, " + model.name + " is not");
  if (n_nodes < 3) fail(ErrorKind::invalid_argument, "n_nodes must be >= 3");
  if (!model.chart.contains(p) || !model.chart.contains(q))
    fail(ErrorKind::domain, "endpoints must lie in the chart");
  const int segs = n_nodes - 1;
  std::vector<Vector> x(n_nodes);
  for (int i = 0; i < n_nodes; ++i) x[i] = p + (static_cast<double>(i) / segs) * (q - p);

  using Nodes = std::vector<Vector>;
  auto dot = [](const Nodes& a, const Nodes& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i].dot(b[i]);
    return sum;
  };
  auto axpy = [](double alpha, const Nodes& a, Nodes& b) {
    for (std::size_t i = 0; i < a.size(); ++i) b[i] += alpha * a[i];
  };

  // L-BFGS with the tridiagonal preconditioner as the initial inverse Hessian.
  constexpr std::size_t kMemory = 12;
  std::deque<std::pair<Nodes, Nodes>> memory;  // (s, y)
  const DiscreteEnergy energy(model, segs);
  double e = energy.value(x);
  Nodes g = energy.gradient(x);
  ShortestCurve out;
  for (int it = 0;; ++it) {
    const Nodes pg = precondition(g, segs);
    double dmax = 0.0;
    for (const auto& v : pg) dmax = std::max(dmax, v.lpNorm<Eigen::Infinity>());
    out.gradient_norm = dmax;
    out.iterations = it;
    if (dmax <= opts.gradient_tol) break;
    if (it >= opts.max_iterations)
      fail(ErrorKind::stagnation, "shortest-curve descent did not converge in " +
                                      std::to_string(it) + " iterations (step norm " +
                                      num(dmax) + ")");

    Nodes d = g;
    std::vector<double> alphas(memory.size());
    for (std::size_t k = memory.size(); k-- > 0;) {
      const auto& [sk, yk] = memory[k];
      alphas[k] = dot(sk, d) / dot(yk, sk);
      axpy(-alphas[k], yk, d);
    }
    d = precondition(d, segs);
    for (std::size_t k = 0; k < memory.size(); ++k) {
      const auto& [sk, yk] = memory[k];
      const double beta = dot(yk, d) / dot(yk, sk);
      axpy(alphas[k] - beta, sk, d);
    }
    double slope = dot(g, d);
    if (!(slope > 0.0)) {
      memory.clear();
      d = pg;
      slope = dot(g, d);
    }

    double step = 1.0;
    bool accepted = false;
    Nodes trial(x.size());
    double e_trial = e;
    while (step > 1e-12) {
      for (int i = 0; i < n_nodes; ++i) trial[i] = x[i] - step * d[i];
      try {
        e_trial = energy.value(trial);
        if (e_trial < e && e_trial <= e - 1e-4 * step * slope) {
          accepted = true;
          break;
        }
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::domain && err.kind() != ErrorKind::degeneracy) throw;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!memory.empty()) {
        memory.clear();
        continue;
      }
      // Rounding floor of the energy: accept a small residual step.
      if (dmax <= 1e3 * opts.gradient_tol) break;
      fail(ErrorKind::stagnation, "shortest-curve line search failed (step norm " +
                                      num(dmax) + ")");
    }
    Nodes g_new = energy.gradient(trial);
    Nodes sk(x.size()), yk(x.size());
    for (int i = 0; i < n_nodes; ++i) {
      sk[i] = trial[i] - x[i];
      yk[i] = g_new[i] - g[i];
    }
    const double sy = dot(sk, yk);
    if (sy > 1e-14 * std::sqrt(dot(sk, sk) * dot(yk, yk))) {
      memory.emplace_back(std::move(sk), std::move(yk));
      if (memory.size() > kMemory) memory.pop_front();
    }
    x.swap(trial);
    g.swap(g_new);
    e = e_trial;
  }
  out.energy = e;
  out.length = polyline_length(model, x, opts.length_subdivisions);
  out.polyline = std::move(x);
  return out;
}

namespace {

struct Shot {
  bool hit = false;
  double miss = 0.0;
  double time = 0.0;
  Trajectory traj;
};

Shot fire(const MetricModel& model, const Vector& p, const Vector& q, double angle, double horizon,
          const IntegratorConfig& cfg) {
  const Vector u = (q - p).normalized();
  Vector nrm(2);
  nrm << -u[1], u[0];
  Vector dir = std::cos(angle) * u + std::sin(angle) * nrm;
  const double speed2 = quadratic_form(eval_metric(model, p), dir);
  const Vector v = dir / std::sqrt(speed2);
  Shot shot;
  shot.traj = integrate_filippov(model, GeodesicState{p, v}, 0.0, horizon, cfg);
  auto along = [&](double t) { return (shot.traj.dense.eval(t).head(2) - q).dot(u); };
  const auto& ts = shot.traj.times;
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if ((shot.traj.states[i].head(2) - q).dot(u) < 0.0) continue;
    const auto loc = locate_root(along, ts[i - 1], ts[i], 1e-14, 0.0);
    const double t = loc ? loc->time : ts[i];
    shot.hit = true;
    shot.time = t;
    shot.miss = (shot.traj.dense.eval(t).head(2) - q).dot(nrm);
    return shot;
  }
  return shot;
}

}  // namespace

ShotGeodesic shoot_geodesic(const MetricModel& model, const Vector& p, const Vector& q, double tol,
                            const IntegratorConfig& cfg) {
  if (model.dim() != 2) fail(ErrorKind::precondition, "shooting is implemented for 2D models");
  if (!model.is_riemannian()) fail(ErrorKind::precondition, "shooting needs a Riemannian metric");
  if (!((q - p).norm() > 0.0)) fail(ErrorKind::invalid_argument, "endpoints coincide");
  const double horizon = 4.0 * polyline_length(model, {p, q}, 64);

  // Bracket the root of the miss closest to the straight aim.
  constexpr int kScan = 48;
  constexpr double kMaxAngle = 1.4;
  std::optional<std::pair<double, double>> bracket;
  std::pair<double, double> miss_at;
  double best = std::numeric_limits<double>::infinity();
  double prev_a = 0.0, prev_m = 0.0;
  bool have_prev = false;
  for (int k = 0; k <= kScan; ++k) {
    const double a = -kMaxAngle + 2.0 * kMaxAngle * k / kScan;
    const Shot s = fire(model, p, q, a, horizon, cfg);
    if (!s.hit) {
      have_prev = false;
      continue;
    }
    if (have_prev && (prev_m <= 0.0) != (s.miss <= 0.0)) {
      const double centre = std::abs(0.5 * (prev_a + a));
      if (centre < best) {
        best = centre;
        bracket = {prev_a, a};
        miss_at = {prev_m, s.miss};
      }
    }
    prev_a = a;
    prev_m = s.miss;
    have_prev = true;
  }
  if (!bracket) fail(ErrorKind::stagnation, "shooting found no angle reaching the target");

  auto [lo, hi] = *bracket;
  double m_lo = miss_at.first;
  Shot s;
  double a = lo;
  for (int it = 0; it < 200; ++it) {
    a = 0.5 * (lo + hi);
    s = fire(model, p, q, a, horizon, cfg);
    if (!s.hit) fail(ErrorKind::stagnation, "shooting lost the target while bisecting");
    if (std::abs(s.miss) <= tol || hi - lo < 1e-15) break;
    if ((s.miss <= 0.0) == (m_lo <= 0.0)) {
      lo = a;
      m_lo = s.miss;
    } else {
      hi = a;
    }
  }
  if (!(std::abs(s.miss) <= std::max(tol, 1e-6)))
    fail(ErrorKind::stagnation, "shooting did not reach the target tolerance");
  ShotGeodesic out;
  out.angle = a;
  out.miss = std::abs(s.miss);
  out.length = s.time;
  out.trajectory = std::move(s.traj);
  return out;
}

double lipschitz_estimate(const MetricModel& model, int pairs, std::uint64_t seed) {
  if (pairs < 1) fail(ErrorKind::invalid_argument, "pairs must be positive");
  const int n = model.dim();
  const double r = model.lipschitz_radius;
  Vector lo = Vector::Constant(n, -r), hi = Vector::Constant(n, r);
  for (int i = 0; i < n; ++i) {
    lo[i] = std::max(lo[i], model.chart.lower[i]);
    hi[i] = std::min(hi[i], model.chart.upper[i]);
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&] {
    Vector x(n);
    for (int i = 0; i < n; ++i) x[i] = lo[i] + (hi[i] - lo[i]) * unit(rng);
    return x;
  };
  double best = 0.0;
  for (int k = 0; k < pairs; ++k) {
    const Vector x = draw(), y = draw();
    const double dist = (x - y).norm();
    if (!(dist > 0.0)) continue;
    const double diff = (eval_metric(model, x) - eval_metric(model, y)).lpNorm<Eigen::Infinity>();
    best = std::max(best, diff / dist);
  }
  return best;
}

double metric_sup_distance(const MetricModel& a, const MetricModel& b, const Vector& lower,
                           const Vector& upper, int points_per_axis) {
  const int n = a.dim();
  if (b.dim() != n || lower.size() != n || upper.size() != n)
    fail(ErrorKind::invalid_argument, "dimension mismatch");
  if (points_per_axis < 2) fail(ErrorKind::invalid_argument, "points_per_axis must be >= 2");
  long total = 1;
  for (int i = 0; i < n; ++i) total *= points_per_axis;
  double sup = 0.0;
  Vector x(n);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (int i = 0; i < n; ++i) {
      const long k = rem % points_per_axis;
      rem /= points_per_axis;
      x[i] = lower[i] + (upper[i] - lower[i]) * static_cast<double>(k) / (points_per_axis - 1);
    }
    sup = std::max(sup, (eval_metric(a, x) - eval_metric(b, x)).lpNorm<Eigen::Infinity>());
  }
  return sup;
}

}  // namespace lipgeo
