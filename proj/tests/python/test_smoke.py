import math

import numpy as np
import pytest

import lipgeo


def test_catalog_lists_entries():
    assert set(lipgeo.catalog_names()) >= {"flat", "kink1d", "conformal2d", "rosen"}


def test_metric_and_christoffel_flat():
    e = lipgeo.catalog_model("flat", {"n": 3})
    g = lipgeo.eval_metric(e.model, np.zeros(3))
    np.testing.assert_array_equal(g, np.eye(3))
    gamma = lipgeo.christoffel(e.model, np.array([0.1, 0.2, 0.3]))
    assert gamma.shape == (3, 3, 3)
    assert np.abs(gamma).max() == 0.0


def test_geodesic_rhs_kink():
    # g = exp(2c|x|): Gamma = c sgn x, so xdd = -c sgn(x) v^2
    e = lipgeo.catalog_model("kink1d", {"c": 2.0})
    f = lipgeo.geodesic_rhs(e.model, np.array([0.5]), np.array([3.0]))
    np.testing.assert_allclose(f, [3.0, -18.0])


def test_contact_and_sliding():
    n = np.array([1.0, 0.0])
    assert lipgeo.classify_contact(np.array([1.0, 0.0]), np.array([-1.0, 0.0]), n) == "sliding"
    assert lipgeo.classify_contact(np.array([1.0, 0.0]), np.array([2.0, 0.0]), n) == "crossing_up"
    alpha, f = lipgeo.sliding_field(np.array([1.0, 1.0]), np.array([-3.0, 1.0]), n)
    assert alpha == pytest.approx(0.25)
    np.testing.assert_allclose(f, [0.0, 1.0], atol=1e-15)


def test_kink_crossing_matches_closed_form():
    e = lipgeo.catalog_model("kink1d", {"c": 1.0})
    t = lipgeo.integrate_filippov(e.model, lipgeo.GeodesicState([-1.0], [1.0]), 0.0, 2.0)
    assert t.completed and t.termination == "completed"
    assert len(t.events) == 1
    ev = t.events[0]
    assert ev.time == pytest.approx(1.0 - math.exp(-1.0), abs=1e-9)
    assert ev.state_after[1] == pytest.approx(math.e, abs=1e-9)
    assert lipgeo.velocity_jump(t).max_velocity_jump < 1e-6
    assert t.states.shape[1] == 2


def test_solvers_agree_on_rosen():
    e = lipgeo.catalog_model("rosen")
    sc = lipgeo.catalog_scenario(e, "impulse-crossing")
    fil = lipgeo.integrate_filippov(e.model, sc.z0, sc.t0, sc.t1)
    reg = lipgeo.integrate_regularized(e.model, 1e-4, sc.z0, sc.t0, sc.t1)
    car = lipgeo.integrate_caratheodory(e.model, sc.z0, sc.t0, sc.t1, 1e-3)
    assert lipgeo.max_position_deviation(fil, reg) < 1e-3
    assert lipgeo.max_position_deviation(fil, car) < 1e-2
    exact = lipgeo.exact_geodesic(e, sc.z0, sc.t1)
    np.testing.assert_allclose(fil.final_state[:4], exact.x, atol=1e-8)


def test_sliding_demo():
    sys = lipgeo.demo_system("sliding")
    t = lipgeo.integrate_filippov(sys, np.array([1.0, -1.0]), 0.0, 3.0)
    assert t.completed
    assert t.events[0].kind == "sliding"
    np.testing.assert_allclose(t.eval(2.5), [0.0, 1.5], atol=1e-8)
    assert lipgeo.inclusion_residual(t, sys, 200, 1).max < 1e-6


def test_holder_beta():
    assert lipgeo.holder_beta(1.0) == 1.0
    assert lipgeo.holder_beta(0.5) == pytest.approx(1.0 / 3.0)


def test_errors_carry_kind():
    with pytest.raises(lipgeo.LipgeoError) as info:
        lipgeo.catalog_model("no-such-metric")
    assert info.value.kind == "invalid_argument"
    e = lipgeo.catalog_model("kink1d")
    with pytest.raises(lipgeo.LipgeoError) as info:
        lipgeo.geodesic_rhs(e.model, np.array([0.0]), np.array([1.0]))
    assert info.value.kind == "proximity"


def test_cli_in_process(tmp_path):
    out = tmp_path / "k.csv"
    code, stdout, stderr = lipgeo.cli(
        ["integrate", "--metric", "kink1d", "--x0", "-1", "--v0", "1", "--tspan", "0", "2", "--out", str(out)]
    )
    assert code == 0, stderr
    lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert lines[0] == "t,x1,v1"
    code, _, stderr = lipgeo.cli(["integrate", "--metric", "nope"])
    assert code == 1 and "error[" in stderr
