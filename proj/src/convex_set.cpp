#include "lipgeo/convex_set.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lipgeo/errors.hpp"

namespace lipgeo {
namespace {

bool lex_less(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

std::vector<Vector> unique_points(std::vector<Vector> pts) {
  std::sort(pts.begin(), pts.end(), lex_less);
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vector& a, const Vector& b) { return a == b; }),
            pts.end());
  return pts;
}

double cross(const Vector& o, const Vector& a, const Vector& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew's monotone chain on lexicographically sorted, unique points.
std::vector<Vector> planar_hull(const std::vector<Vector>& pts) {
  const std::size_t n = pts.size();
  std::vector<Vector> h(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

std::vector<Vector> support_hull(const std::vector<Vector>& pts) {
  const int d = static_cast<int>(pts.front().size());
  std::vector<Vector> dirs;
  for (int i = 0; i < d; ++i) {
    dirs.push_back(Vector::Unit(d, i));
    dirs.push_back(-Vector::Unit(d, i));
  }
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  for (int i = 0; i < 64 * d; ++i) {
    Vector u(d);
    for (int j = 0; j < d; ++j) u[j] = normal(rng);
    dirs.push_back(u.normalized());
  }
  std::vector<std::size_t> picked;
  for (const auto& u : dirs) {
    std::size_t best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double val = u.dot(pts[i]);
      if (val > best_val) {
        best_val = val;
        best = i;
      }
    }
    picked.push_back(best);
  }
  std::sort(picked.begin(), picked.end());
  picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
  std::vector<Vector> cand;
  for (auto i : picked) cand.push_back(pts[i]);

  // Drop candidates lying in the hull of the others.
  double scale = 0.0;
  for (const auto& c : cand) scale = std::max(scale, c.norm());
  const double tol = 1e-12 * std::max(1.0, scale);
  for (std::size_t i = 0; i < cand.size() && cand.size() > 2;) {
    std::vector<Vector> others;
    for (std::size_t j = 0; j < cand.size(); ++j) {
      if (j != i) others.push_back(cand[j] - cand[i]);
    }
    if (min_norm_point(others).norm() <= tol) {
      cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  return cand;
}

}  // namespace

ConvexSet ConvexSet::point(Vector p) { return ConvexSet(SetKind::singleton, {std::move(p)}); }

ConvexSet ConvexSet::segment(Vector a, Vector b) {
  if (a.size() != b.size()) fail(ErrorKind::invalid_argument, "segment endpoints differ in dimension");
  if (a == b) return point(std::move(a));
  return ConvexSet(SetKind::segment, {std::move(a), std::move(b)});
}

ConvexSet ConvexSet::hull(const std::vector<Vector>& points) {
  if (points.empty()) fail(ErrorKind::invalid_argument, "convex hull of an empty set");
  auto pts = unique_points(points);
  if (pts.size() == 1) return point(pts.front());
  const auto d = pts.front().size();
  std::vector<Vector> verts;
  if (d == 1) {
    verts = {pts.front(), pts.back()};
  } else if (d == 2) {
    verts = planar_hull(pts);
  } else {
    verts = support_hull(pts);
  }
  if (verts.size() == 1) return point(verts.front());
  if (verts.size() == 2) return segment(verts[0], verts[1]);
  return ConvexSet(SetKind::polytope, std::move(verts));
}

Vector min_norm_point(const std::vector<Vector>& points) {
  const std::size_t m = points.size();
  if (m == 0) fail(ErrorKind::invalid_argument, "min-norm point of an empty set");
  double scale2 = 0.0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double n2 = points[i].squaredNorm();
    scale2 = std::max(scale2, n2);
    if (n2 < points[start].squaredNorm()) start = i;
  }
  if (m == 1) return points.front();

  std::vector<std::size_t> active{start};
  std::vector<double> weight{1.0};
  Vector x = points[start];
  const double tol = 1e-15 * std::max(scale2, 1e-300);

  auto combine = [&](const std::vector<double>& w) {
    Vector y = Vector::Zero(x.size());
    for (std::size_t i = 0; i < active.size(); ++i) y += w[i] * points[active[i]];
    return y;
  };

  for (int major = 0; major < 10000; ++major) {
    std::size_t j = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double val = x.dot(points[i]);
      if (val < best) {
        best = val;
        j = i;
      }
    }
    if (x.squaredNorm() - best <= tol) break;
    if (std::find(active.begin(), active.end(), j) != active.end()) break;
    active.push_back(j);
    weight.push_back(0.0);

    for (int minor = 0; minor < 10000; ++minor) {
      const auto k = static_cast<Eigen::Index>(active.size());
      Matrix a = Matrix::Zero(k + 1, k + 1);
      for (Eigen::Index r = 0; r < k; ++r) {
        for (Eigen::Index c = 0; c < k; ++c) a(r, c) = points[active[r]].dot(points[active[c]]);
        a(r, k) = 1.0;
        a(k, r) = 1.0;
      }
      Vector rhs = Vector::Zero(k + 1);
      rhs[k] = 1.0;
      const Vector sol = a.colPivHouseholderQr().solve(rhs);
      std::vector<double> mu(sol.data(), sol.data() + k);

      if (std::all_of(mu.begin(), mu.end(), [](double u) { return u > 1e-14; })) {
        weight = mu;
        x = combine(weight);
        break;
      }
      double theta = 1.0;
      for (std::size_t i = 0; i < mu.size(); ++i) {
        if (mu[i] <= 1e-14) theta = std::min(theta, weight[i] / (weight[i] - mu[i]));
      }
      for (std::size_t i = 0; i < mu.size(); ++i) weight[i] += theta * (mu[i] - weight[i]);
      std::size_t keep = 0;
      for (std::size_t i = 0; i < active.size(); ++i) {
        if (weight[i] > 1e-14) {
          active[keep] = active[i];
          weight[keep] = weight[i];
          ++keep;
        }
      }
      if (keep == 0) {
        // Numerical breakdown; restart from the best single vertex.
        active.assign(1, j);
        weight.assign(1, 1.0);
        keep = 1;
      }
      active.resize(keep);
      weight.resize(keep);
      const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
      for (auto& w : weight) w /= total;
      x = combine(weight);
      if (keep == 1) break;
    }
  }
  return x;
}

Vector ConvexSet::project(const Vector& p) const {
  if (p.size() != vertices_.front().size())
    fail(ErrorKind::invalid_argument, "point dimension does not match convex set");
  switch (kind_) {
    case SetKind::singleton:
      return vertices_.front();
    case SetKind::segment: {
      const Vector& a = vertices_[0];
      const Vector d = vertices_[1] - a;
      const double t = std::clamp((p - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
      return a + t * d;
    }
    case SetKind::polytope: {
      std::vector<Vector> shifted;
      shifted.reserve(vertices_.size());
      for (const auto& v : vertices_) shifted.push_back(v - p);
      return p + min_norm_point(shifted);
    }
  }
  return p;
}

double ConvexSet::distance(const Vector& p) const { return (project(p) - p).norm(); }

double ConvexSet::diameter() const {
  double d = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    for (std::size_t j = i + 1; j < vertices_.size(); ++j) {
      d = std::max(d, (vertices_[i] - vertices_[j]).norm());
    }
  }
  return d;
}

double hausdorff(const ConvexSet& a, const ConvexSet& b) {
  double h = 0.0;
  for (const auto& v : a.vertices()) h = std::max(h, b.distance(v));
  for (const auto& v : b.vertices()) h = std::max(h, a.distance(v));
  return h;
}

}  // namespace lipgeo
