import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lagrange_forge.divisors import split_pencil
from lagrange_forge.errors import BaseLocusError, GeometryError, InfeasibleError
from lagrange_forge.polytope import DelzantPolytope, fixture, vertices
from lagrange_forge.toric_space import (
    ToricPoint,
    TangentRep,
    check_point,
    gauge_act,
    lift_from_moment,
    lift_many,
    moment_map,
    omega_eval,
    pencil_chart,
    pencil_map,
    project_horizontal,
    reduction_setup,
    subtorus_flow,
)

import oracles
from strategies import delzant_polytopes, random_interior_points

A = 2 * math.pi
CP2 = fixture("cp2")
R_CP2 = reduction_setup(CP2)
D_CONIC = split_pencil(CP2, (1, 1))


def rows(M):
    return [[int(v) for v in r] for r in np.asarray(M)]


def test_reduction_cp2():
    Q = rows(R_CP2.weights)
    assert Q in ([[1, 1, 1]], [[-1, -1, -1]])
    assert np.allclose(np.abs(R_CP2.level), [A])
    assert np.allclose(R_CP2.level, A * np.array(Q) @ [0, 0, 1])


def test_reduction_square():
    R = reduction_setup(fixture("p1xp1"))
    Q = np.array(rows(R.weights))
    # the row lattice is spanned by (1,1,0,0) and (0,0,1,1)
    assert oracles.rank(np.vstack([Q, [[1, 1, 0, 0], [0, 0, 1, 1]]])) == 2
    assert all(oracles.in_integer_span(Q.T, v) for v in [(1, 1, 0, 0), (0, 0, 1, 1)])
    assert np.allclose(np.linalg.solve(Q[:, [0, 2]].astype(float), R.level), [A, A])


def test_reduction_without_gauge():
    P = DelzantPolytope(((1, 0), (0, 1)), (0, 0))
    R = reduction_setup(P, validate=False)
    assert R.weights.shape[0] == 0 and R.level.shape == (0,)


def test_lift_barycenter():
    z = lift_from_moment(R_CP2, [1 / 3, 1 / 3]).z
    assert np.allclose(np.abs(z) ** 2, 2 * A / 3)


def test_lift_half_quarter():
    z = lift_from_moment(R_CP2, [0.5, 0.25]).z
    assert np.allclose(np.abs(z) ** 2, [A, A / 2, A / 2])


def test_lift_on_facet_rejected():
    with pytest.raises(InfeasibleError):
        lift_from_moment(R_CP2, [0.0, 0.5])


def test_moment_roundtrip():
    x = np.array([0.2, 0.3])
    p = lift_from_moment(R_CP2, x, [0.7, -1.1])
    assert np.linalg.norm(moment_map(R_CP2, p) - x) < 1e-12


def test_moment_symmetric_point():
    z = np.ones(3) * math.sqrt(2 * A / 3)
    assert np.allclose(moment_map(R_CP2, ToricPoint(z)), [1 / 3, 1 / 3], atol=1e-12)


def test_moment_square_pattern():
    R = reduction_setup(fixture("p1xp1"))
    a2, c2 = 2 * A * 0.3, 2 * A * 0.5
    z = np.sqrt([a2, 2 * A - a2, c2, 2 * A - c2])
    x = moment_map(R, ToricPoint(z))
    assert abs(x[1] - 0.5) < 1e-12


def test_inconsistent_point_rejected():
    with pytest.raises(GeometryError):
        moment_map(R_CP2, ToricPoint([1.0, 5.0, 0.2]))
    with pytest.raises(GeometryError):
        check_point(R_CP2, ToricPoint([1.0, 1.0, 1.0]))


def gauge_dirs(R, z):
    Q = R.gauge
    return [q * z for q in Q] + [1j * q * z for q in Q]


def test_horizontal_projection_examples():
    rng = np.random.default_rng(0)
    p = lift_from_moment(R_CP2, [1 / 3, 1 / 3])
    v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    h = project_horizontal(R_CP2, p, v)
    assert h.horizontal
    for d in gauge_dirs(R_CP2, p.z):
        assert abs(np.real(np.vdot(d, h.v))) < 1e-12
    again = project_horizontal(R_CP2, p, h.v).v
    assert np.linalg.norm(again - h.v) < 1e-12
    pure = project_horizontal(R_CP2, p, 1j * R_CP2.gauge[0] * p.z).v
    assert np.linalg.norm(pure) < 1e-12


def test_omega_requires_horizontal():
    p = lift_from_moment(R_CP2, [1 / 3, 1 / 3])
    with pytest.raises(GeometryError):
        omega_eval(R_CP2, p, TangentRep(np.ones(3)), TangentRep(np.ones(3)))


def test_omega_examples():
    p = lift_from_moment(R_CP2, [1 / 3, 1 / 3])
    w1 = R_CP2.section_weights([1, 0])
    w2 = R_CP2.section_weights([0, 1])
    u = project_horizontal(R_CP2, p, 1j * w1 * p.z)
    v = project_horizontal(R_CP2, p, 1j * w2 * p.z)
    assert omega_eval(R_CP2, p, u, u) == 0.0
    assert abs(omega_eval(R_CP2, p, u, v)) < 1e-10
    # phase direction against its radial partner: -|c|^2 (4/9 + 1/9 + 1/9) with |c|^2 = 2A/3
    rad = project_horizontal(R_CP2, p, w1 * p.z)
    assert abs(omega_eval(R_CP2, p, u, rad) - (-4 * A / 9)) < 1e-12
    assert abs(omega_eval(R_CP2, p, u, rad) - oracles.omega_real(u.v, rad.v)) < 1e-12


def test_flow_identities():
    p = lift_from_moment(R_CP2, [0.2, 0.5], [0.3, 0.1])
    assert np.array_equal(subtorus_flow(R_CP2, p, (1, -1), 0.0).z, p.z)
    assert np.allclose(subtorus_flow(R_CP2, p, (2, 3), 2 * math.pi).z, p.z, atol=1e-12)
    q = subtorus_flow(R_CP2, p, (1, -1), 1.3)
    assert np.linalg.norm(moment_map(R_CP2, q) - moment_map(R_CP2, p)) < 1e-12
    assert abs(pencil_chart(pencil_map(R_CP2, D_CONIC, q)) - pencil_chart(pencil_map(R_CP2, D_CONIC, p))) < 1e-10


def test_pencil_map_examples():
    p = lift_from_moment(R_CP2, [1 / 3, 1 / 3])
    sp, sm = pencil_map(R_CP2, D_CONIC, p)
    assert abs(abs(sp) ** 2 + abs(sm) ** 2 - 1) < 1e-12
    assert abs(pencil_chart((sp, sm)) - 1) < 1e-12
    on_d3 = lift_many(R_CP2, np.array([0.5, 0.5]), np.zeros(2))      # z3 = 0
    assert pencil_chart(pencil_map(R_CP2, D_CONIC, on_d3)) == np.inf
    on_d1 = lift_many(R_CP2, np.array([0.0, 0.4]), np.zeros(2))      # z1 = 0
    assert pencil_chart(pencil_map(R_CP2, D_CONIC, on_d1)) == 0
    base = lift_many(R_CP2, np.array([0.0, 1.0]), np.zeros(2))       # z1 = z3 = 0
    with pytest.raises(BaseLocusError):
        pencil_map(R_CP2, D_CONIC, base)


def test_vertices_attained():
    for P in (CP2, fixture("hirzebruch1"), fixture("cp3")):
        R = reduction_setup(P)
        for v in vertices(P):
            x = np.array([float(c) for c in v.coordinates])
            z = lift_many(R, x, np.zeros(P.dimension))
            assert all(abs(z[i]) == 0 for i in v.active_facets)
            assert np.allclose(moment_map(R, z), x, atol=1e-12)


# -- properties -----------------------------------------------------------------

def random_state(P, seed):
    R = reduction_setup(P)
    rng = np.random.default_rng(seed)
    x = random_interior_points(P, rng, 1)[0]
    theta = rng.uniform(0, 2 * np.pi, P.dimension)
    return R, rng, lift_from_moment(R, x, theta), x


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=100)
@given(delzant_polytopes(), seeds)
def test_moment_image_in_polytope(P, seed):
    R, rng, p, x = random_state(P, seed)
    y = moment_map(R, p)
    assert np.linalg.norm(y - x) < 1e-10
    assert min(float(s) for s in np.array(P.slack(y), dtype=float)) > -1e-10


@settings(max_examples=100)
@given(delzant_polytopes(), seeds)
def test_gauge_invariance(P, seed):
    R, rng, p, _ = random_state(P, seed)
    phi = rng.uniform(0, 2 * np.pi, R.weights.shape[0])
    q = gauge_act(R, p, phi)
    assert np.linalg.norm(moment_map(R, q) - moment_map(R, p)) < 1e-10
    u0, v0 = (rng.standard_normal(R.r) + 1j * rng.standard_normal(R.r) for _ in range(2))
    u, v = project_horizontal(R, p, u0), project_horizontal(R, p, v0)
    phase = np.exp(1j * (phi @ R.gauge))
    uq, vq = project_horizontal(R, q, phase * u0), project_horizontal(R, q, phase * v0)
    assert abs(omega_eval(R, q, uq, vq) - omega_eval(R, p, u, v)) < 1e-10
    a = rng.integers(-3, 4, P.dimension)
    if not a.any():
        a[0] = 1
    D = split_pencil(P, a)
    assert abs(pencil_chart(pencil_map(R, D, q)) - pencil_chart(pencil_map(R, D, p))) < 1e-10 * max(
        1.0, abs(pencil_chart(pencil_map(R, D, p)))
    )


@settings(max_examples=100)
@given(delzant_polytopes(), seeds)
def test_omega_bilinear_antisymmetric(P, seed):
    R, rng, p, _ = random_state(P, seed)
    vecs = [project_horizontal(R, p, rng.standard_normal(R.r) + 1j * rng.standard_normal(R.r)) for _ in range(3)]
    u, v, w = vecs
    a, b = rng.standard_normal(2)
    assert abs(omega_eval(R, p, u, v) + omega_eval(R, p, v, u)) < 1e-10
    comb = TangentRep(a * u.v + b * w.v, horizontal=True)
    lhs = omega_eval(R, p, comb, v)
    rhs = a * omega_eval(R, p, u, v) + b * omega_eval(R, p, w, v)
    assert abs(lhs - rhs) < 1e-10
    assert abs(omega_eval(R, p, u, v) - oracles.omega_real(u.v, v.v)) < 1e-10


@settings(max_examples=100)
@given(delzant_polytopes(), seeds)
def test_horizontal_projection_properties(P, seed):
    R, rng, p, _ = random_state(P, seed)
    v = rng.standard_normal(R.r) + 1j * rng.standard_normal(R.r)
    h = project_horizontal(R, p, v).v
    scale = np.linalg.norm(v) * np.linalg.norm(p.z)
    for d in gauge_dirs(R, p.z):
        assert abs(np.real(np.vdot(d, h))) < 1e-12 * scale
    assert np.linalg.norm(project_horizontal(R, p, h).v - h) < 1e-12 * np.linalg.norm(v)


@settings(max_examples=100)
@given(delzant_polytopes(), seeds, st.floats(-10, 10))
def test_flow_invariance(P, seed, t):
    R, rng, p, _ = random_state(P, seed)
    b = rng.integers(-3, 4, P.dimension)
    if not b.any():
        b[0] = 1
    q = subtorus_flow(R, p, b, t)
    assert np.max(np.abs(np.abs(q.z) - np.abs(p.z))) < 1e-14 * np.max(np.abs(p.z))
    assert np.linalg.norm(moment_map(R, q) - moment_map(R, p)) < 1e-12
    a = rng.integers(-3, 4, P.dimension)
    if not a.any():
        a[-1] = 1
    D = split_pencil(P, a)
    psi = pencil_chart(pencil_map(R, D, p))
    for bj in D.reduced_basis:
        psi_t = pencil_chart(pencil_map(R, D, subtorus_flow(R, p, bj, t)))
        assert abs(psi_t - psi) < 1e-10 * max(1.0, abs(psi))
