import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from lagrange_forge import lattice
from lagrange_forge.divisors import (
    complement_vector,
    direction_relation,
    picard,
    primitive,
    split_pencil,
)
from lagrange_forge.errors import PencilError
from lagrange_forge.polytope import fixture

import oracles
from strategies import delzant_polytopes

CP2 = fixture("cp2")
SQUARE = fixture("p1xp1")
F1 = fixture("hirzebruch1")


def test_picard_cp2():
    pic = picard(CP2)
    assert pic.rank == 1 and pic.torsion == ()
    # every facet class is the same generator (the hyperplane class)
    assert len(set(pic.class_of)) == 1 and abs(pic.class_of[0][0]) == 1


def test_picard_square():
    pic = picard(SQUARE)
    assert pic.rank == 2 and pic.torsion == ()
    assert pic.class_of[0] == pic.class_of[1]
    assert pic.class_of[2] == pic.class_of[3]
    assert pic.class_of[0] != pic.class_of[2]


def test_picard_f1():
    pic = picard(F1)
    assert pic.rank == 2 and pic.torsion == ()
    assert oracles.snf_invariants(F1.normals) == (1, 1)


@pytest.mark.parametrize("name", ["cp2", "p1xp1", "hirzebruch1", "cp3"])
def test_composite_map_vanishes(name):
    P = fixture(name)
    pic = picard(P)
    for m in np.eye(P.dimension, dtype=int):
        coeffs = [int(np.dot(m, nu)) for nu in P.normals]
        assert pic.group.is_zero(pic.class_sum(coeffs))
    assert pic.rank == P.n_facets - P.dimension


def test_direction_relation_examples():
    assert direction_relation(CP2, (1, 1)) == (1, 1, -2)
    assert direction_relation(CP2, (1, 0)) == (1, 0, -1)
    assert direction_relation(SQUARE, (0, 1)) == (0, 0, 1, -1)


def test_zero_direction():
    with pytest.raises(PencilError):
        direction_relation(CP2, (0, 0))


def test_primitive_reduction():
    assert primitive((4, -6)) == (2, -3)
    assert split_pencil(CP2, (2, 2)).direction == (1, 1)


def test_conic_pencil():
    D = split_pencil(CP2, (1, 1))
    assert D.plus_exponents == {0: 1, 1: 1}
    assert D.minus_exponents == {2: 2}
    assert D.degree == 2
    assert D.base_locus == ((0, 2), (1, 2))
    assert D.base_points == D.base_locus
    assert D.reduced_basis in (((1, -1),), ((-1, 1),))


def test_line_pencil():
    D = split_pencil(CP2, (1, 0))
    assert D.plus_exponents == {0: 1} and D.minus_exponents == {2: 1}
    assert D.degree == 1
    assert D.base_locus == ((0, 2),)
    assert D.reduced_basis in (((0, 1),), ((0, -1),))


def test_square_ruling_is_base_point_free():
    D = split_pencil(SQUARE, (0, 1))
    assert D.plus_exponents == {2: 1} and D.minus_exponents == {3: 1}
    assert D.base_locus == ()
    assert D.reduced_basis in (((1, 0),), ((-1, 0),))


def test_complement_vector():
    for a in [(1, 1), (1, 0), (2, -3), (1, 1, 1)]:
        w = complement_vector(a)
        assert sum(x * y for x, y in zip(a, w)) == 1


def directions(n):
    return st.lists(st.integers(-4, 4), min_size=n, max_size=n).filter(any)


@settings(max_examples=80)
@given(delzant_polytopes(), directions(2))
def test_pencil_invariants(P, a):
    pic = picard(P)
    D = split_pencil(P, a, pic)
    plus = pic.class_sum([D.plus_exponents.get(i, 0) for i in range(P.n_facets)])
    minus = pic.class_sum([D.minus_exponents.get(i, 0) for i in range(P.n_facets)])
    assert plus == minus == D.pencil_class
    B = np.array(D.reduced_basis)
    assert np.all(B @ np.array(D.direction) == 0)
    K = np.array(D.reduced_basis, dtype=object).T
    assert oracles.maximal_minors_gcd(K) == 1
    assert oracles.rank(np.vstack([B, D.direction])) == P.dimension


@settings(max_examples=60)
@given(delzant_polytopes(), directions(2))
def test_sign_equivariance(P, a):
    D = split_pencil(P, a)
    E = split_pencil(P, [-x for x in a])
    assert E.plus_exponents == D.minus_exponents
    assert E.minus_exponents == D.plus_exponents
    assert {frozenset(p) for p in E.base_locus} == {frozenset(p) for p in D.base_locus}


@settings(max_examples=60)
@given(delzant_polytopes(), directions(2))
def test_base_locus_matches_vertex_incidence(P, a):
    from lagrange_forge.polytope import vertices

    D = split_pencil(P, a)
    verts = [v.active_facets for v in vertices(P)]
    expected = {
        (i, j)
        for i in D.plus_exponents
        for j in D.minus_exponents
        if any({i, j} <= f for f in verts)
    }
    assert set(D.base_locus) == expected
