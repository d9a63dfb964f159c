#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lipgeo/catalog.hpp"
#include "lipgeo/cli.hpp"
#include "lipgeo/config.hpp"
#include "lipgeo/diagnostics.hpp"
#include "lipgeo/errors.hpp"
#include "lipgeo/filippov.hpp"
#include "lipgeo/geometry.hpp"
#include "lipgeo/integrator.hpp"

namespace py = pybind11;
using namespace lipgeo;

namespace {

py::array_t<double> stack_rows(const std::vector<Vector>& rows) {
  const py::ssize_t n = static_cast<py::ssize_t>(rows.size());
  const py::ssize_t m = rows.empty() ? 0 : rows.front().size();
  py::array_t<double> out({n, m});
  auto a = out.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < n; ++i)
    for (py::ssize_t j = 0; j < m; ++j) a(i, j) = rows[i][j];
  return out;
}

py::array_t<double> christoffel_array(const ChristoffelSymbols& gamma) {
  const py::ssize_t n = gamma.dim();
  py::array_t<double> out({n, n, n});
  auto a = out.mutable_unchecked<3>();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) a(i, j, k) = gamma(i, j, k);
  return out;
}

ChristoffelMode mode_from(const std::string& s) {
  if (s == "analytic") return ChristoffelMode::analytic;
  if (s == "finite_difference" || s == "fd") return ChristoffelMode::finite_difference;
  fail(ErrorKind::invalid_argument, "mode: expected 'analytic' or 'finite_difference', got '" + s + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Filippov geodesics of Lipschitz semi-Riemannian metrics";

  static py::exception<Error> error_type(m, "LipgeoError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::handle(error_type.ptr())(py::str(e.what()));
      inst.attr("kind") = py::str(std::string(to_string(e.kind())));
      PyErr_SetObject(error_type.ptr(), inst.ptr());
    }
  });

  py::class_<GeodesicState>(m, "GeodesicState")
      .def(py::init([](const Vector& x, const Vector& v) { return GeodesicState{x, v}; }),
           py::arg("x"), py::arg("v"))
      .def_readwrite("x", &GeodesicState::x)
      .def_readwrite("v", &GeodesicState::v)
      .def("stacked", &GeodesicState::stacked)
      .def("__repr__", [](const GeodesicState& s) {
        std::ostringstream os;
        os << "GeodesicState(x=" << s.x.transpose() << ", v=" << s.v.transpose() << ")";
        return os.str();
      });

  py::class_<MetricModel>(m, "MetricModel")
      .def_readonly("name", &MetricModel::name)
      .def_property_readonly("dim", &MetricModel::dim)
      .def_property_readonly("is_riemannian", &MetricModel::is_riemannian)
      .def_property_readonly("signature", [](const MetricModel& mm) { return mm.chart.signature; })
      .def_property_readonly("surfaces", [](const MetricModel& mm) {
        std::vector<std::string> labels;
        for (const auto& s : mm.surfaces) labels.push_back(s.label);
        return labels;
      })
      .def_readonly("lipschitz_bound", &MetricModel::lipschitz_bound);

  py::class_<CatalogEntry>(m, "CatalogEntry")
      .def_readonly("name", &CatalogEntry::name)
      .def_readonly("params", &CatalogEntry::params)
      .def_readonly("model", &CatalogEntry::model)
      .def_property_readonly("has_oracle", &CatalogEntry::has_oracle)
      .def_readonly("oracle_domain", &CatalogEntry::oracle_domain);

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("name", &Scenario::name)
      .def_readonly("z0", &Scenario::z0)
      .def_readonly("t0", &Scenario::t0)
      .def_readonly("t1", &Scenario::t1);

  py::class_<PiecewiseSystem>(m, "PiecewiseSystem")
      .def_readonly("name", &PiecewiseSystem::name)
      .def_readonly("dim", &PiecewiseSystem::dim)
      .def_readonly("position_dim", &PiecewiseSystem::position_dim);

  py::class_<IntegratorConfig>(m, "IntegratorConfig")
      .def(py::init<>())
      .def_readwrite("rel_tol", &IntegratorConfig::rel_tol)
      .def_readwrite("abs_tol", &IntegratorConfig::abs_tol)
      .def_readwrite("max_step", &IntegratorConfig::max_step)
      .def_readwrite("event_tol", &IntegratorConfig::event_tol)
      .def_readwrite("max_events", &IntegratorConfig::max_events)
      .def_readwrite("sliding_exit_tol", &IntegratorConfig::sliding_exit_tol)
      .def_readwrite("surface_tol", &IntegratorConfig::surface_tol)
      .def_readwrite("tangency_tol", &IntegratorConfig::tangency_tol)
      .def_readwrite("tie_break", &IntegratorConfig::tie_break)
      .def_readwrite("max_steps", &IntegratorConfig::max_steps)
      .def("validate", &IntegratorConfig::validate);

  py::class_<Event>(m, "Event")
      .def_readonly("time", &Event::time)
      .def_property_readonly("kind", [](const Event& e) { return std::string(to_string(e.kind)); })
      .def_readonly("surface", &Event::surface)
      .def_readonly("state_before", &Event::state_before)
      .def_readonly("state_after", &Event::state_after)
      .def_readonly("flagged", &Event::flagged)
      .def_readonly("note", &Event::note);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("t0", &Trajectory::t0)
      .def_readonly("t1", &Trajectory::t1)
      .def_property_readonly("times", [](const Trajectory& t) {
        return py::array_t<double>(static_cast<py::ssize_t>(t.times.size()), t.times.data());
      })
      .def_property_readonly("states", [](const Trajectory& t) { return stack_rows(t.states); })
      .def_readonly("events", &Trajectory::events)
      .def_property_readonly("solver", [](const Trajectory& t) { return std::string(to_string(t.tag)); })
      .def_property_readonly("termination",
                             [](const Trajectory& t) { return std::string(to_string(t.termination)); })
      .def_readonly("message", &Trajectory::message)
      .def_readonly("position_dim", &Trajectory::position_dim)
      .def_readonly("steps_taken", &Trajectory::steps_taken)
      .def_property_readonly("completed", &Trajectory::completed)
      .def_property_readonly("t_last", &Trajectory::t_last)
      .def_property_readonly("final_state", [](const Trajectory& t) { return t.final_state(); })
      .def("eval", [](const Trajectory& t, double time) { return t.dense.eval(time); }, py::arg("t"))
      .def("eval_left", [](const Trajectory& t, double time) { return t.dense.eval_left(time); })
      .def("eval_right", [](const Trajectory& t, double time) { return t.dense.eval_right(time); });

  py::class_<ConvexSet>(m, "ConvexSet")
      .def_static("point", &ConvexSet::point)
      .def_static("segment", &ConvexSet::segment)
      .def_static("hull", &ConvexSet::hull)
      .def_property_readonly("kind", [](const ConvexSet& s) {
        switch (s.kind()) {
          case SetKind::singleton: return "singleton";
          case SetKind::segment: return "segment";
          default: return "polytope";
        }
      })
      .def_property_readonly("vertices", [](const ConvexSet& s) { return stack_rows(s.vertices()); })
      .def("project", &ConvexSet::project)
      .def("distance", &ConvexSet::distance)
      .def("contains", &ConvexSet::contains, py::arg("p"), py::arg("tol") = 1e-12)
      .def("diameter", &ConvexSet::diameter);
  m.def("hausdorff", &hausdorff);

  // geometry
  m.def("catalog_names", &catalog_names);
  m.def("catalog_model", &catalog_model, py::arg("name"), py::arg("params") = Params{});
  m.def("exact_geodesic", &exact_geodesic, py::arg("entry"), py::arg("z0"), py::arg("t"));
  m.def("mollify", &mollify, py::arg("entry"), py::arg("epsilon"));
  m.def("catalog_scenario", &catalog_scenario, py::arg("entry"), py::arg("name") = "crossing");
  m.def("crossing_fan", &crossing_fan, py::arg("entry"), py::arg("count"));
  m.def("demo_system", &demo_system, py::arg("name"));
  m.def("geodesic_system", &geodesic_system, py::arg("model"));

  m.def("eval_metric", &eval_metric, py::arg("model"), py::arg("x"), py::arg("check_signature") = false);
  m.def(
      "christoffel",
      [](const MetricModel& model, const Vector& x, const std::string& mode, std::optional<double> step) {
        return christoffel_array(christoffel(model, x, mode_from(mode), step));
      },
      py::arg("model"), py::arg("x"), py::arg("mode") = "analytic", py::arg("step") = py::none(),
      "Array G with G[i, j, k] = Gamma^i_{jk}.");
  m.def(
      "geodesic_rhs",
      [](const MetricModel& model, const Vector& x, const Vector& v) {
        return geodesic_rhs(model, GeodesicState{x, v});
      },
      py::arg("model"), py::arg("x"), py::arg("v"));

  // Filippov map
  m.def(
      "classify_contact",
      [](const Vector& fm, const Vector& fp, const Vector& grad, double tol) {
        return std::string(to_string(classify_contact(fm, fp, grad, tol)));
      },
      py::arg("f_minus"), py::arg("f_plus"), py::arg("grad_sigma"),
      py::arg("tangency_tol") = kDefaultTangencyTol);
  m.def(
      "sliding_field",
      [](const Vector& fm, const Vector& fp, const Vector& grad, double tol) {
        const auto s = sliding_field(fm, fp, grad, tol);
        return py::make_tuple(s.alpha, s.field);
      },
      py::arg("f_minus"), py::arg("f_plus"), py::arg("grad_sigma"),
      py::arg("tangency_tol") = kDefaultTangencyTol, "Returns (alpha, field).");
  m.def("filippov_set", &filippov_set, py::arg("system"), py::arg("z"),
        py::arg("surface_tol") = kDefaultSurfaceTol);

  // integrators
  m.def(
      "integrate_filippov",
      [](const MetricModel& model, const GeodesicState& z0, double t0, double t1,
         const IntegratorConfig& cfg) { return integrate_filippov(model, z0, t0, t1, cfg); },
      py::arg("model"), py::arg("z0"), py::arg("t0"), py::arg("t1"), py::arg("config") = IntegratorConfig{},
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "integrate_filippov",
      [](const PiecewiseSystem& sys, const Vector& z0, double t0, double t1, const IntegratorConfig& cfg) {
        return integrate_filippov(sys, z0, t0, t1, cfg);
      },
      py::arg("system"), py::arg("z0"), py::arg("t0"), py::arg("t1"), py::arg("config") = IntegratorConfig{},
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "integrate_caratheodory",
      [](const MetricModel& model, const GeodesicState& z0, double t0, double t1, double step, int tie) {
        return integrate_caratheodory(model, z0, t0, t1, step, tie);
      },
      py::arg("model"), py::arg("z0"), py::arg("t0"), py::arg("t1"), py::arg("step"),
      py::arg("tie_break") = 1, py::call_guard<py::gil_scoped_release>());
  m.def("integrate_regularized", &integrate_regularized, py::arg("model"), py::arg("epsilon"),
        py::arg("z0"), py::arg("t0"), py::arg("t1"), py::arg("config") = IntegratorConfig{},
        py::call_guard<py::gil_scoped_release>());

  // diagnostics
  py::class_<HolderFit>(m, "HolderFit")
      .def_readonly("alpha_assumed", &HolderFit::alpha_assumed)
      .def_readonly("beta_fit", &HolderFit::beta_fit)
      .def_readonly("beta_predicted", &HolderFit::beta_predicted)
      .def_readonly("r_squared", &HolderFit::r_squared)
      .def_readonly("points", &HolderFit::points);
  py::class_<C1Report>(m, "C1Report")
      .def_readonly("max_velocity_jump", &C1Report::max_velocity_jump)
      .def_readonly("per_event_jumps", &C1Report::per_event_jumps);
  py::class_<ResidualReport>(m, "ResidualReport")
      .def_readonly("max", &ResidualReport::max)
      .def_readonly("mean", &ResidualReport::mean)
      .def_readonly("samples", &ResidualReport::samples);
  py::class_<ConvergenceReport>(m, "ConvergenceReport")
      .def_readonly("parameters", &ConvergenceReport::parameters)
      .def_readonly("errors", &ConvergenceReport::errors)
      .def_readonly("order", &ConvergenceReport::order)
      .def_readonly("strictly_decreasing", &ConvergenceReport::strictly_decreasing);
  py::class_<ShortestCurve>(m, "ShortestCurve")
      .def_property_readonly("polyline", [](const ShortestCurve& c) { return stack_rows(c.polyline); })
      .def_readonly("length", &ShortestCurve::length)
      .def_readonly("energy", &ShortestCurve::energy)
      .def_readonly("iterations", &ShortestCurve::iterations);

  m.def("velocity_jump", &velocity_jump, py::arg("trajectory"));
  m.def(
      "inclusion_residual",
      [](const Trajectory& t, const MetricModel& model, int n, std::uint64_t seed) {
        return inclusion_residual(t, model, n, seed);
      },
      py::arg("trajectory"), py::arg("model"), py::arg("n_samples") = 1000, py::arg("seed") = 0);
  m.def(
      "inclusion_residual",
      [](const Trajectory& t, const PiecewiseSystem& sys, int n, std::uint64_t seed) {
        return inclusion_residual(t, sys, n, seed);
      },
      py::arg("trajectory"), py::arg("system"), py::arg("n_samples") = 1000, py::arg("seed") = 0);
  m.def("energy_drift", &energy_drift, py::arg("trajectory"), py::arg("model"));
  m.def("max_position_deviation", &max_position_deviation, py::arg("a"), py::arg("b"),
        py::arg("grid") = 2001);
  m.def("regularization_convergence", &regularization_convergence, py::arg("entry"), py::arg("z0"),
        py::arg("t0"), py::arg("t1"), py::arg("eps_ladder"), py::arg("config") = IntegratorConfig{});
  m.def("caratheodory_convergence", &caratheodory_convergence, py::arg("entry"), py::arg("z0"),
        py::arg("t0"), py::arg("t1"), py::arg("steps"), py::arg("config") = IntegratorConfig{});
  m.def("holder_beta", &holder_beta, py::arg("alpha"));
  m.def("holder_fit", &holder_fit, py::arg("trajectory"), py::arg("event_index"),
        py::arg("half_window"), py::arg("alpha_assumed") = 1.0);
  m.def("shortest_curve_oracle",
        [](const MetricModel& model, const Vector& p, const Vector& q, int n) {
          return shortest_curve_oracle(model, p, q, n);
        },
        py::arg("model"), py::arg("p"), py::arg("q"), py::arg("n_nodes") = 64,
        py::call_guard<py::gil_scoped_release>());
  m.def("lipschitz_estimate", &lipschitz_estimate, py::arg("model"), py::arg("pairs") = 1000,
        py::arg("seed") = 0);

  // configuration and command line
  m.def("normalize_config", [](const std::string& text) { return write_run_config(parse_run_config(text)); },
        py::arg("json_text"), "Parse, validate and re-emit a run configuration as canonical JSON.");
  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the lipgeo tool in-process; returns (exit_code, stdout, stderr).");
}
