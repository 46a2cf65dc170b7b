import csv
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from lagrange_forge import chekanov as ch
from lagrange_forge.divisors import split_pencil
from lagrange_forge.errors import InfeasibleError, MarginError, NumericError
from lagrange_forge.polytope import fixture
from lagrange_forge.toric_space import flow_many, moment_many, pencil_chart_many, reduction_setup

import oracles

A = 2 * math.pi
CP2 = fixture("cp2")
R = reduction_setup(CP2)
D = split_pencil(CP2, (1, 1))
CLIFFORD = ch.LoopSpec()
CHEKANOV = ch.LoopSpec(center=1, radius=0.25)


@pytest.fixture(scope="module")
def clifford():
    return ch.build_torus(R, D, CLIFFORD, [0.0], (32, 32))


@pytest.fixture(scope="module")
def chekanov_torus():
    return ch.build_torus(R, D, CHEKANOV, [0.0], (64, 64))


@pytest.mark.parametrize(
    "name,a,plus,minus",
    [("cp2", (1, 1), (0, 1), (2,)), ("cp2", (1, 0), (0,), (2,)), ("p1xp1", (0, 1), (2,), (3,))],
)
def test_singular_values(name, a, plus, minus):
    P = fixture(name)
    Rp = reduction_setup(P)
    sing = ch.singular_values(split_pencil(P, a), Rp)
    assert len(sing) == 2
    zero = [s for s in sing if not s.is_infinite]
    inf = [s for s in sing if s.is_infinite]
    assert zero[0].value == 0 and zero[0].facets == plus
    assert inf[0].facets == minus


def test_fiber_circle_over_one():
    F = ch.solve_fiber_circle(R, D, 1.0, [0.0], 4)
    assert np.allclose(F.moment, [1 / 3, 1 / 3])
    X, _ = moment_many(R, F.points)
    assert np.allclose(X[:, 0], X[:, 1], atol=1e-12)
    phases = np.unwrap(np.angle(F.points[:, 0]))
    assert np.allclose(np.diff(phases), np.pi / 2, atol=1e-12)
    assert np.allclose(pencil_chart_many(D, F.points), 1.0, atol=1e-12)


def test_fiber_circle_margin():
    with pytest.raises(MarginError):
        ch.solve_fiber_circle(R, D, 0.01, [0.0], 4)
    with pytest.raises(MarginError):
        ch.solve_fiber_circle(R, D, 1e3, [0.0], 4)


def test_level_outside_polytope():
    with pytest.raises(InfeasibleError):
        ch.solve_fiber_circle(R, D, 1.0, [2.0], 4)


def test_loop_through_singular_value():
    with pytest.raises(MarginError):
        ch.build_torus(R, D, ch.LoopSpec(center=0.5, radius=0.5), [0.0], (16, 16))


def test_clifford_build(clifford):
    rep = ch.verify_lagrangian(clifford)
    assert rep.passed and rep.rank_ok
    assert rep.max_residual < 1e-10
    assert clifford.loop_class.name == "Clifford"
    assert clifford.loop_class.windings["0+0j"] == 1


def test_chekanov_build(chekanov_torus):
    rep = ch.verify_lagrangian(chekanov_torus)
    assert rep.passed and rep.rank_ok
    assert rep.max_residual < 1e-6
    assert chekanov_torus.loop_class.name == "Chekanov"
    assert chekanov_torus.loop_class.windings["0+0j"] == 0


def test_corrupted_sample_localized(clifford):
    T = ch.TorusSample(**{**clifford.__dict__, "points": clifford.points.copy()})
    T.points[5, 7] = T.points[5, 7] * (1 + 1e-3) + 1e-3j
    rep = ch.verify_lagrangian(T)
    assert not rep.passed
    assert (5, 7) in rep.failing_nodes
    # the damage stays within the finite-difference stencil of the bad node
    assert all(abs(i - 5) <= 4 or abs(j - 7) <= 4 for i, j in rep.failing_nodes)


def test_classify_polyline_winding_twice():
    star = tuple(np.exp(2j * np.pi * 2 * k / 5) for k in range(5))
    loop = ch.LoopSpec(kind="polyline", vertices=star, samples=200)
    cls = ch.classify_loop(loop, ch.singular_values(D, R, scan=False))
    assert cls.kind == "other" and cls.windings["0+0j"] == 2


def test_classify_coarse_loop_refused():
    loop = ch.LoopSpec(samples=3)
    with pytest.raises(NumericError):
        ch.classify_loop(loop, ch.singular_values(D, R, scan=False))


@settings(max_examples=100)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.05, 3), st.sampled_from([1, -1]))
def test_classification_refinement_invariant(re, im, radius, orient):
    center = complex(re, im)
    assume(abs(abs(center) - radius) > 0.05)
    sing = ch.singular_values(D, R, scan=False)
    # chord length must stay below twice the distance to 0 for the winding to be certified
    base = 32 + math.ceil(4 * radius / abs(abs(center) - radius))
    kinds = {ch.classify_loop(ch.LoopSpec(center=center, radius=radius, samples=s, orientation=orient), sing).kind
             for s in (base, 4 * base, 16 * base)}
    assert kinds == {"standard" if abs(center) < radius else "exotic"}


def test_periods_barycenter():
    T = ch.moment_fiber_torus(R, [1 / 3, 1 / 3], 64)
    per = ch.action_periods(T)
    assert abs(per.periods[0] - per.periods[1]) < 1e-10
    assert ch.verify_lagrangian(T).passed


def test_periods_match_oracle():
    x = [0.5, 0.25]
    T = ch.moment_fiber_torus(R, x, 64)
    per = ch.action_periods(T)
    expect = oracles.fiber_periods(R.section, R.offsets, x, R.area_scale)
    assert np.allclose(per.periods, expect, atol=1e-9)


def test_build_commutes_with_reduced_flow(clifford):
    m = clifford.grid_shape[1]
    b = D.reduced_basis[0]
    for k in (1, 5):
        flowed = flow_many(R, clifford.points, b, 2 * np.pi * k / m)
        assert np.allclose(flowed, np.roll(clifford.points, -k, axis=1), atol=1e-12)


def test_fd_orders_converge():
    res = [ch.verify_lagrangian(ch.build_torus(R, D, CHEKANOV, [0.0], (32, 32), fd_order=o)).max_residual
           for o in (2, 4, 8)]
    assert res[0] > res[1] > res[2]


def test_export_cloud(tmp_path, clifford):
    path = tmp_path / "cloud.csv"
    ch.export_cloud(clifford, path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["s", "theta_1", "re_z1", "im_z1", "re_z2", "im_z2", "re_z3", "im_z3", "omega_residual"]
    assert len(rows) == 1 + 32 * 32


def test_report_fields(clifford):
    rep = ch.torus_report(clifford)
    assert rep["classification"]["type"] == "Clifford"
    assert rep["verification"]["passed"]
    assert len(rep["singular_values"]) == 2
