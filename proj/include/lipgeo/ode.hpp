#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lipgeo/filippov.hpp"
#include "lipgeo/surface.hpp"

namespace lipgeo {

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  double event_tol = 1e-12;
  int max_events = 10000;
  double sliding_exit_tol = 1e-10;
  double surface_tol = kDefaultSurfaceTol;
  double tangency_tol = kDefaultTangencyTol;
  /// Side chosen where the Filippov continuation is not unique.
  int tie_break = +1;
  long max_steps = 2'000'000;

  void validate() const;
  bool operator==(const IntegratorConfig&) const = default;
};

/// One step of a piecewise-polynomial interpolant, in the nested form used by
/// the Dormand-Prince dense output:
///   y(s) = c0 + s(c1 + (1-s)(c2 + s(c3 + (1-s)(c4 + s(c5 + (1-s)(c6 + s c7))))))
/// with s = (t - t0) / h, valid for t in [t0, t_end], t_end <= t0 + h.
struct DenseSegment {
  double t0 = 0.0;
  double h = 0.0;
  double t_end = 0.0;
  std::array<Vector, 8> c;
  Vector end;  // exact node value at t_end, when recorded

  Vector eval(double t) const;
  /// Straight line from y0 at t0 to y1 at t1.
  static DenseSegment linear(double t0, double t1, const Vector& y0, const Vector& y1);
};

class DenseOutput {
 public:
  void push(DenseSegment seg) { segments_.push_back(std::move(seg)); }
  bool empty() const { return segments_.empty(); }
  double t_begin() const { return segments_.front().t0; }
  double t_end() const { return segments_.back().t_end; }
  const std::vector<DenseSegment>& segments() const { return segments_; }

  /// Right-continuous evaluation; at a breakpoint the later segment wins.
  Vector eval(double t) const;
  /// Limits from the left / right at t (differ only at breakpoints).
  Vector eval_left(double t) const;
  Vector eval_right(double t) const;

 private:
  std::vector<DenseSegment> segments_;
};

enum class SolverTag { filippov, caratheodory, regularized, smooth };
enum class Termination { completed, chart_exit, degeneracy, zeno, step_underflow };

std::string_view to_string(SolverTag tag);
std::string_view to_string(Termination t);

struct Event {
  double time = 0.0;
  ContactKind kind = ContactKind::crossing_up;
  std::string surface;
  Vector state_before;
  Vector state_after;
  /// Set where the continuation involved a choice (repulsive contact,
  /// grazing, sliding exit).
  bool flagged = false;
  std::string note;

  bool operator==(const Event&) const = default;
};

struct Trajectory {
  double t0 = 0.0;
  double t1 = 0.0;               // requested end
  std::vector<double> times;     // strictly increasing
  std::vector<Vector> states;
  DenseOutput dense;
  std::vector<Event> events;
  SolverTag tag = SolverTag::smooth;
  Termination termination = Termination::completed;
  std::string message;
  /// n for z = (x, v) layouts; equals the state dimension for plain
  /// first-order systems.
  int position_dim = 0;
  double epsilon = 0.0;          // regularized runs
  double step = 0.0;             // Caratheodory runs
  long steps_taken = 0;
  long rhs_evaluations = 0;

  bool completed() const { return termination == Termination::completed; }
  bool geodesic_layout() const {
    return !states.empty() && states.front().size() == 2 * position_dim;
  }
  double t_last() const { return times.back(); }
  const Vector& final_state() const { return states.back(); }
};

using Rhs = std::function<Vector(const Vector&)>;

/// Adaptive Dormand-Prince 8(5,3) with 7th-order dense output.
///
/// `rhs` may throw lipgeo::Error with ErrorKind::domain / chart_exit /
/// degeneracy at points the trajectory cannot reach; steps whose stages hit
/// such points are retried with a smaller step, and the run terminates with
/// the corresponding reason once the step underflows.
Trajectory integrate_smooth(const Rhs& rhs, const Vector& z0, double t0, double t1,
                            const IntegratorConfig& cfg);

struct LocatedEvent {
  double time = 0.0;
  bool tangential = false;  // grazing candidate without a sign change
};

/// First sign change of g on [t_lo, t_hi], to within event_tol, by scanning
/// and bisection; if none but min |g| <= surface_tol, a grazing candidate at
/// the minimiser (golden-section refinement).
std::optional<LocatedEvent> locate_root(const std::function<double(double)>& g, double t_lo,
                                        double t_hi, double event_tol,
                                        double surface_tol = kDefaultSurfaceTol);

/// locate_root applied to sigma along a dense interpolant.
std::optional<LocatedEvent> locate_event(const DenseOutput& dense,
                                         const SwitchingSurface& surface, double t_lo,
                                         double t_hi, double event_tol,
                                         double surface_tol = kDefaultSurfaceTol);

namespace detail {

/// Outcome of one trial step.
struct StepResult {
  Vector z1;
  Vector f1;       // rhs at z1 (first stage of the next step)
  double error = 0.0;  // scaled error norm, accept when <= 1
  DenseSegment dense;
};

class Dop853 {
 public:
  Dop853(const Rhs& rhs, const IntegratorConfig& cfg) : rhs_(rhs), cfg_(cfg) {}

  StepResult step(double t, const Vector& z, const Vector& f0, double h);
  double initial_step(const Vector& z, const Vector& f0, double h_max);
  /// Step-size factor from an error norm (classical controller, exponent 1/8).
  static double step_factor(double error);

  long evaluations() const { return evaluations_; }

 private:
  Vector f(const Vector& z) {
    ++evaluations_;
    return rhs_(z);
  }
  const Rhs& rhs_;
  const IntegratorConfig& cfg_;
  long evaluations_ = 0;
};

}  // namespace detail
}  // namespace lipgeo
