#include "lipgeo/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "lipgeo/errors.hpp"
#include "lipgeo/filippov.hpp"

namespace lipgeo {

Region PiecewiseSystem::region_at(const Vector& z, double surface_tol, int tie_break) const {
  Region r(surfaces.size(), tie_break);
  for (std::size_t k = 0; k < surfaces.size(); ++k) {
    const double s = surfaces[k].sigma(z);
    if (s > surface_tol) r[k] = 1;
    else if (s < -surface_tol) r[k] = -1;
  }
  return r;
}

PiecewiseSystem geodesic_system(const MetricModel& model) {
  PiecewiseSystem sys;
  sys.name = model.name;
  sys.position_dim = model.dim();
  sys.dim = 2 * model.dim();
  for (const auto& s : model.surfaces) sys.surfaces.push_back(s.lifted(model.dim()));
  sys.field = [model](const Vector& z, const Region& region) {
    return geodesic_rhs(model, z, region);
  };
  return sys;
}

ConvexSet filippov_set(const PiecewiseSystem& sys, const Vector& z, double surface_tol) {
  Region region = sys.region_at(z, surface_tol, +1);
  for (std::size_t k = 0; k < sys.surfaces.size(); ++k) {
    if (std::abs(sys.surfaces[k].sigma(z)) <= surface_tol) {
      Region minus = region, plus = region;
      minus[k] = -1;
      plus[k] = +1;
      return ConvexSet::segment(sys.field(z, minus), sys.field(z, plus));
    }
  }
  return ConvexSet::point(sys.field(z, region));
}

namespace {

bool is_boundary(ErrorKind k) {
  return k == ErrorKind::domain || k == ErrorKind::chart_exit || k == ErrorKind::degeneracy;
}

Termination termination_for(ErrorKind k) {
  return k == ErrorKind::degeneracy ? Termination::degeneracy : Termination::chart_exit;
}

constexpr double kSafety = 0.9;
constexpr double kMaxShrink = 1.0 / 3.0;
// Step cap near an approaching surface, as a multiple of the linear
// time-to-contact estimate.
constexpr double kContactCapFactor = 1.125;

class FilippovRun {
 public:
  FilippovRun(const PiecewiseSystem& sys, const IntegratorConfig& cfg) : sys_(sys), cfg_(cfg) {}

  Trajectory run(const Vector& z0, double t0, double t1) {
    cfg_.validate();
    if (!(t1 > t0)) fail(ErrorKind::invalid_argument, "integration interval must satisfy t1 > t0");
    if (z0.size() != sys_.dim) fail(ErrorKind::invalid_argument, "initial state has wrong dimension");
    t1_ = t1;
    traj_.t0 = t0;
    traj_.t1 = t1;
    traj_.tag = SolverTag::filippov;
    traj_.position_dim = sys_.position_dim;
    traj_.times.push_back(t0);
    traj_.states.push_back(z0);
    t_ = t0;
    z_ = z0;

    try {
      start_mode();
    } catch (const Error& e) {
      if (!is_boundary(e.kind())) throw;
      terminate(termination_for(e.kind()), e.what());
    }
    while (t_ < t1_ && traj_.completed()) {
      if (sliding_) sliding_phase();
      else smooth_phase();
    }
    traj_.rhs_evaluations = evaluations_;
    return std::move(traj_);
  }

 private:
  void terminate(Termination why, std::string message) {
    traj_.termination = why;
    traj_.message = std::move(message);
  }

  Region with_side(std::size_t k, int side) const {
    Region r = region_;
    r[k] = side;
    return r;
  }

  Vector field(const Vector& z, const Region& r) {
    ++evaluations_;
    return sys_.field(z, r);
  }

  bool record(Event ev) {
    traj_.events.push_back(std::move(ev));
    if (static_cast<int>(traj_.events.size()) > cfg_.max_events) {
      terminate(Termination::zeno, "more than " + std::to_string(cfg_.max_events) +
                                       " events before t = " + num(t1_));
      return false;
    }
    return true;
  }

  Event make_event(ContactKind kind, std::size_t k, bool flagged, std::string note) const {
    Event ev;
    ev.time = t_;
    ev.kind = kind;
    ev.surface = sys_.surfaces[k].label;
    ev.state_before = z_;
    ev.state_after = z_;
    ev.flagged = flagged;
    ev.note = std::move(note);
    return ev;
  }

  // Initial region (or sliding mode) for a start point, possibly on surfaces.
  void start_mode() {
    region_ = sys_.region_at(z_, cfg_.surface_tol, cfg_.tie_break);
    for (std::size_t k = 0; k < sys_.surfaces.size(); ++k) {
      if (std::abs(sys_.surfaces[k].sigma(z_)) > cfg_.surface_tol) continue;
      const Vector fm = field(z_, with_side(k, -1));
      const Vector fp = field(z_, with_side(k, +1));
      const Vector grad = sys_.surfaces[k].gradient(z_);
      const auto kind = classify_contact(fm, fp, grad, cfg_.tangency_tol);
      switch (kind) {
        case ContactKind::crossing_up: region_[k] = +1; break;
        case ContactKind::crossing_down: region_[k] = -1; break;
        case ContactKind::sliding:
          sliding_ = true;
          slide_surface_ = k;
          record(make_event(kind, k, false, "start in sliding mode"));
          return;
        case ContactKind::repulsive:
          region_[k] = cfg_.tie_break;
          record(make_event(kind, k, true, "repulsive start; tie-break side chosen"));
          break;
        case ContactKind::tangential: {
          const double drift = grad.dot(fm + fp);
          region_[k] = drift > 0.0 ? 1 : drift < 0.0 ? -1 : cfg_.tie_break;
          record(make_event(kind, k, true, "tangential start"));
          break;
        }
      }
    }
  }

  void accept(DenseSegment seg, double t_new, const Vector& z_new) {
    seg.t_end = t_new;
    seg.end = z_new;
    traj_.dense.push(std::move(seg));
    traj_.times.push_back(t_new);
    traj_.states.push_back(z_new);
    ++traj_.steps_taken;
    t_ = t_new;
    z_ = z_new;
  }

  // Handles a sign change of sigma_k at the current (t_, z_).
  void on_crossing(std::size_t k) {
    const Vector fm = field(z_, with_side(k, -1));
    const Vector fp = field(z_, with_side(k, +1));
    const Vector grad = sys_.surfaces[k].gradient(z_);
    const auto kind = classify_contact(fm, fp, grad, cfg_.tangency_tol);
    const int arriving = -region_[k];
    switch (kind) {
      case ContactKind::crossing_up:
      case ContactKind::crossing_down: {
        const int side = kind == ContactKind::crossing_up ? 1 : -1;
        const bool consistent = side == arriving;
        region_[k] = arriving;
        record(make_event(kind, k, !consistent, consistent ? "" : "contact against the crossing"));
        return;
      }
      case ContactKind::sliding:
        sliding_ = true;
        slide_surface_ = k;
        record(make_event(kind, k, false, "sliding entry"));
        return;
      case ContactKind::repulsive:
        region_[k] = cfg_.tie_break;
        record(make_event(kind, k, true, "repulsive contact; tie-break side chosen"));
        return;
      case ContactKind::tangential:
        // Sign change observed: treat as a crossing.
        region_[k] = arriving;
        record(make_event(kind, k, true, "tangential crossing"));
        return;
    }
  }

  double h_min() const { return 1e-14 * std::max(1.0, std::abs(t_)); }

  void smooth_phase() {
    const Region region = region_;
    const Rhs rhs = [this, &region](const Vector& z) { return sys_.field(z, region); };
    detail::Dop853 rk(rhs, cfg_);
    Vector f0;
    try {
      f0 = rhs(z_);
    } catch (const Error& e) {
      if (!is_boundary(e.kind())) throw;
      terminate(termination_for(e.kind()), e.what());
      return;
    }
    const std::size_t m = sys_.surfaces.size();
    // Start slack: after a sliding exit the state may sit a hair on the far
    // side of the surface it leaves.
    std::vector<double> slack(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      const double d = region[k] * sys_.surfaces[k].sigma(z_);
      if (d <= 0.0) slack[k] = -d + 1e-3 * cfg_.surface_tol;
    }

    double h = rk.initial_step(z_, f0, std::min(cfg_.max_step, t1_ - t_));
    bool rejected = false;
    while (t_ < t1_) {
      if (traj_.steps_taken >= cfg_.max_steps) {
        terminate(Termination::step_underflow, "step limit reached");
        break;
      }
      for (std::size_t k = 0; k < m; ++k) {
        const double d = region[k] * sys_.surfaces[k].sigma(z_) + slack[k];
        const double rate = region[k] * sys_.surfaces[k].gradient(z_).dot(f0);
        if (rate < 0.0 && d > 0.0) {
          h = std::min(h, std::max(kContactCapFactor * d / -rate, 4.0 * h_min()));
        }
      }
      bool last = false;
      if (t_ + 1.01 * h >= t1_) {
        h = t1_ - t_;
        last = true;
      }
      detail::StepResult res;
      try {
        res = rk.step(t_, z_, f0, h);
      } catch (const Error& e) {
        if (!is_boundary(e.kind())) throw;
        h *= 0.25;
        if (h < h_min()) {
          terminate(termination_for(e.kind()), e.what());
          break;
        }
        continue;
      }
      if (res.error > 1.0) {
        h *= std::max(kMaxShrink, kSafety / std::pow(res.error, 0.125));
        rejected = true;
        if (h < h_min()) {
          terminate(Termination::step_underflow, "step size underflow at t = " + num(t_));
          break;
        }
        continue;
      }

      const double t_new = last ? t1_ : t_ + h;
      DenseSegment& seg = res.dense;
      seg.t_end = t_new;
      std::optional<double> crossing;
      std::size_t crossing_surface = 0;
      std::optional<double> graze;
      std::size_t graze_surface = 0;
      for (std::size_t k = 0; k < m; ++k) {
        const auto& s = sys_.surfaces[k];
        const int side = region[k];
        const double sl = slack[k];
        auto g = [&](double tau) { return side * s.sigma(seg.eval(tau)) + sl; };
        const auto loc = locate_root(g, t_, t_new, cfg_.event_tol, cfg_.surface_tol);
        if (!loc) continue;
        if (!loc->tangential) {
          if (!crossing || loc->time < *crossing) {
            crossing = loc->time;
            crossing_surface = k;
          }
        } else if (loc->time > t_ + 10.0 * cfg_.event_tol && loc->time < t_new) {
          if (!graze || loc->time < *graze) {
            graze = loc->time;
            graze_surface = k;
          }
        }
      }

      if (crossing) {
        const double t_e = *crossing;
        const Vector z_e = seg.eval(t_e);
        accept(std::move(seg), t_e, z_e);
        try {
          on_crossing(crossing_surface);
        } catch (const Error& e) {
          if (!is_boundary(e.kind())) throw;
          terminate(termination_for(e.kind()), e.what());
        }
        return;
      }

      const Vector z_new = last ? seg.eval(t1_) : res.z1;
      if (graze) {
        // Grazing without a sign change: stay in the region, flag the contact.
        Event ev;
        ev.time = *graze;
        ev.kind = ContactKind::tangential;
        ev.surface = sys_.surfaces[graze_surface].label;
        ev.state_before = seg.eval(*graze);
        ev.state_after = ev.state_before;
        ev.flagged = true;
        ev.note = "grazing contact; region kept";
        accept(std::move(seg), t_new, z_new);
        if (!record(std::move(ev))) return;
      } else {
        accept(std::move(seg), t_new, z_new);
      }
      f0 = std::move(res.f1);
      double h_new = h * detail::Dop853::step_factor(res.error);
      if (rejected) h_new = std::min(h_new, h);
      rejected = false;
      h = std::min(h_new, cfg_.max_step);
    }
  }

  void sliding_phase() {
    const std::size_t k = slide_surface_;
    const auto& surf = sys_.surfaces[k];
    const Region minus = with_side(k, -1);
    const Region plus = with_side(k, +1);
    auto weight = [&](const Vector& z) {
      return sliding_weight(sys_.field(z, minus), sys_.field(z, plus), surf.gradient(z));
    };
    const Rhs rhs = [&](const Vector& z) {
      const Vector fm = sys_.field(z, minus);
      const Vector fp = sys_.field(z, plus);
      const double alpha = sliding_weight(fm, fp, surf.gradient(z));
      return Vector(alpha * fp + (1.0 - alpha) * fm);
    };
    detail::Dop853 rk(rhs, cfg_);
    Vector f0;
    try {
      f0 = rhs(z_);
    } catch (const Error& e) {
      if (!is_boundary(e.kind())) throw;
      terminate(termination_for(e.kind()), e.what());
      return;
    }
    const double tol = cfg_.sliding_exit_tol;
    double h = rk.initial_step(z_, f0, std::min(cfg_.max_step, t1_ - t_));
    bool rejected = false;
    while (t_ < t1_) {
      if (traj_.steps_taken >= cfg_.max_steps) {
        terminate(Termination::step_underflow, "step limit reached");
        return;
      }
      bool last = false;
      if (t_ + 1.01 * h >= t1_) {
        h = t1_ - t_;
        last = true;
      }
      detail::StepResult res;
      try {
        res = rk.step(t_, z_, f0, h);
      } catch (const Error& e) {
        if (!is_boundary(e.kind()) && e.kind() != ErrorKind::precondition) throw;
        h *= 0.25;
        if (h < h_min()) {
          if (e.kind() == ErrorKind::precondition) {
            exit_sliding(k, cfg_.tie_break);
            return;
          }
          terminate(termination_for(e.kind()), e.what());
          return;
        }
        continue;
      }
      if (res.error > 1.0) {
        h *= std::max(kMaxShrink, kSafety / std::pow(res.error, 0.125));
        rejected = true;
        if (h < h_min()) {
          terminate(Termination::step_underflow, "step size underflow at t = " + num(t_));
          return;
        }
        continue;
      }
      const double t_new = last ? t1_ : t_ + h;
      DenseSegment& seg = res.dense;
      seg.t_end = t_new;

      auto alpha_at = [&](double tau) { return weight(seg.eval(tau)); };
      std::optional<double> exit_time;
      int exit_side = 0;
      const auto lo = locate_root([&](double tau) { return alpha_at(tau) + tol; }, t_, t_new,
                                  cfg_.event_tol, 0.0);
      if (lo && !lo->tangential) {
        exit_time = lo->time;
        exit_side = -1;
      }
      const auto hi = locate_root([&](double tau) { return 1.0 + tol - alpha_at(tau); }, t_,
                                  t_new, cfg_.event_tol, 0.0);
      if (hi && !hi->tangential && (!exit_time || hi->time < *exit_time)) {
        exit_time = hi->time;
        exit_side = +1;
      }
      if (exit_time) {
        const Vector z_x = seg.eval(*exit_time);
        accept(std::move(seg), *exit_time, z_x);
        exit_sliding(k, exit_side);
        return;
      }
      accept(std::move(seg), t_new, last ? seg.eval(t1_) : res.z1);
      f0 = std::move(res.f1);
      double h_new = h * detail::Dop853::step_factor(res.error);
      if (rejected) h_new = std::min(h_new, h);
      rejected = false;
      h = std::min(h_new, cfg_.max_step);
    }
  }

  void exit_sliding(std::size_t k, int side) {
    sliding_ = false;
    region_[k] = side;
    record(make_event(ContactKind::tangential, k, true,
                      side > 0 ? "sliding exit to sigma > 0" : "sliding exit to sigma < 0"));
  }

  const PiecewiseSystem& sys_;
  const IntegratorConfig& cfg_;
  Trajectory traj_;
  double t_ = 0.0;
  double t1_ = 0.0;
  Vector z_;
  Region region_;
  bool sliding_ = false;
  std::size_t slide_surface_ = 0;
  long evaluations_ = 0;
};

}  // namespace

Trajectory integrate_filippov(const PiecewiseSystem& sys, const Vector& z0, double t0, double t1,
                              const IntegratorConfig& cfg) {
  return FilippovRun(sys, cfg).run(z0, t0, t1);
}

Trajectory integrate_filippov(const MetricModel& model, const GeodesicState& z0, double t0,
                              double t1, const IntegratorConfig& cfg) {
  if (!model.chart.contains(z0.x)) fail(ErrorKind::domain, "initial point outside the chart");
  return integrate_filippov(geodesic_system(model), z0.stacked(), t0, t1, cfg);
}

Trajectory integrate_caratheodory(const PiecewiseSystem& sys, const Vector& z0, double t0,
                                  double t1, double step, int tie_break) {
  if (!(step > 0.0)) fail(ErrorKind::invalid_argument, "Caratheodory step must be positive");
  if (!(t1 > t0)) fail(ErrorKind::invalid_argument, "integration interval must satisfy t1 > t0");
  Trajectory traj;
  traj.t0 = t0;
  traj.t1 = t1;
  traj.tag = SolverTag::caratheodory;
  traj.position_dim = sys.position_dim;
  traj.step = step;
  traj.times.push_back(t0);
  traj.states.push_back(z0);

  const auto n_steps = static_cast<long>(std::ceil((t1 - t0) / step - 1e-9));
  Vector z = z0;
  double t = t0;
  for (long i = 0; i < n_steps; ++i) {
    const double t_next = i + 1 == n_steps ? t1 : t0 + static_cast<double>(i + 1) * step;
    Region region(sys.surfaces.size(), tie_break);
    for (std::size_t k = 0; k < sys.surfaces.size(); ++k) {
      const double s = sys.surfaces[k].sigma(z);
      if (s > 0.0) region[k] = 1;
      else if (s < 0.0) region[k] = -1;
    }
    Vector f;
    try {
      f = sys.field(z, region);
    } catch (const Error& e) {
      if (!is_boundary(e.kind())) throw;
      traj.termination = termination_for(e.kind());
      traj.message = e.what();
      break;
    }
    ++traj.rhs_evaluations;
    const Vector z_next = z + (t_next - t) * f;
    traj.dense.push(DenseSegment::linear(t, t_next, z, z_next));
    traj.times.push_back(t_next);
    traj.states.push_back(z_next);
    ++traj.steps_taken;
    z = z_next;
    t = t_next;
  }
  return traj;
}

Trajectory integrate_caratheodory(const MetricModel& model, const GeodesicState& z0, double t0,
                                  double t1, double step, int tie_break) {
  if (!model.chart.contains(z0.x)) fail(ErrorKind::domain, "initial point outside the chart");
  return integrate_caratheodory(geodesic_system(model), z0.stacked(), t0, t1, step, tie_break);
}

Trajectory integrate_regularized(const MetricModel& model, double epsilon,
                                 const GeodesicState& z0, double t0, double t1,
                                 const IntegratorConfig& cfg) {
  if (!model.mollified) fail(ErrorKind::precondition, model.name + " has no mollified variant");
  const MetricModel smooth = model.mollified(epsilon);
  if (!smooth.chart.contains(z0.x)) fail(ErrorKind::domain, "initial point outside the chart");
  const Region none;
  Trajectory traj = integrate_smooth(
      [&smooth, &none](const Vector& z) { return geodesic_rhs(smooth, z, none); }, z0.stacked(),
      t0, t1, cfg);
  traj.tag = SolverTag::regularized;
  traj.epsilon = epsilon;
  traj.position_dim = model.dim();
  return traj;
}

}  // namespace lipgeo
