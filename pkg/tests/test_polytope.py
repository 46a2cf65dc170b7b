import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lagrange_forge.errors import GeometryError, StructureError
from lagrange_forge.polytope import (
    DelzantPolytope,
    facet_incidence,
    fixture,
    load_polytope,
    validate_delzant,
    vertices,
)

import oracles
from strategies import delzant_polytopes

CP2 = DelzantPolytope(((1, 0), (0, 1), (-1, -1)), (0, 0, 1))
SQUARE = DelzantPolytope(((1, 0), (-1, 0), (0, 1), (0, -1)), (0, 1, 0, 1))
WEIGHTED = DelzantPolytope(((1, 0), (0, 1), (-1, -2)), (0, 0, 1))


def coords(P):
    return {tuple(v.coordinates) for v in vertices(P)}


def test_cp2_passes():
    rep = validate_delzant(CP2)
    assert rep.passed
    assert rep.to_dict()["delzant"] is True


def test_weighted_triangle_fails_at_vertex():
    rep = validate_delzant(WEIGHTED)
    assert not rep.passed
    assert rep.checks["smooth"] is False
    bad = rep.details["singular_vertices"]
    assert len(bad) == 1 and bad[0]["determinant"] == 2
    assert bad[0]["facets"] == [0, 2]
    assert oracles.det([WEIGHTED.normals[0], WEIGHTED.normals[2]]) == -2


def test_square_passes():
    assert validate_delzant(SQUARE).passed


def test_cp2_vertices():
    assert coords(CP2) == {(0, 0), (1, 0), (0, 1)}


def test_square_vertices():
    assert coords(SQUARE) == {(0, 0), (1, 0), (0, 1), (1, 1)}


def test_slab_is_unbounded():
    with pytest.raises(GeometryError, match="unbounded"):
        vertices(DelzantPolytope(((1, 0), (-1, 0)), (0, 1)))


def test_empty_region():
    with pytest.raises(GeometryError):
        vertices(DelzantPolytope(((1, 0), (0, 1), (-1, -1)), (0, 0, -1)))


def test_too_few_facets_is_structural():
    with pytest.raises(StructureError):
        validate_delzant(DelzantPolytope(((1, 0), (0, 1)), (0, 0)))


def test_redundant_facet_detected():
    P = DelzantPolytope(((1, 0), (0, 1), (-1, -1), (-1, 0)), (0, 0, 1, 5))
    rep = validate_delzant(P)
    assert rep.checks["irredundant"] is False and not rep.passed


def test_non_primitive_normal_detected():
    P = DelzantPolytope(((2, 0), (0, 1), (-1, -1)), (0, 0, 1))
    assert validate_delzant(P).checks["primitive_normals"] is False


def test_float_offsets_rejected():
    with pytest.raises(StructureError):
        DelzantPolytope(((1, 0), (0, 1), (-1, -1)), (0, 0, 1.0))


def test_incidence_cp2():
    inc = facet_incidence(CP2)
    for pair in [(0, 1), (0, 2), (1, 2)]:
        assert inc.dimension(*pair) == 0
    for i in range(3):
        assert inc.dimension(i) == 1
    assert not inc.meets(0, 1, 2)


def test_incidence_square():
    inc = facet_incidence(SQUARE)
    assert not inc.meets(0, 1) and not inc.meets(2, 3)
    for pair in [(0, 2), (0, 3), (1, 2), (1, 3)]:
        assert inc.dimension(*pair) == 0


def test_json_roundtrip(tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps(fixture("hirzebruch1").to_dict()))
    P = load_polytope(path)
    assert P.normals == fixture("hirzebruch1").normals
    assert P.offsets == fixture("hirzebruch1").offsets


def test_json_schema_errors(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"dimension": 2, "normals": [[1, 0], [0, 1], [-1]], "offsets": ["0", "0", "1"]}))
    with pytest.raises(StructureError):
        load_polytope(path)


@pytest.mark.parametrize("name", ["cp2", "p1xp1", "hirzebruch1", "cp3"])
def test_fixtures_validate_and_match_brute_force(name):
    P = fixture(name)
    assert validate_delzant(P).passed
    brute = oracles.brute_vertices(P.normals, P.offsets)
    got = {tuple(v.coordinates): v.active_facets for v in vertices(P)}
    assert got == brute


def test_weighted_fixture_fails():
    assert not validate_delzant(fixture("weighted_p112")).passed


@settings(max_examples=60)
@given(delzant_polytopes())
def test_vertices_agree_with_brute_force(P):
    assert validate_delzant(P).passed
    got = {tuple(v.coordinates): v.active_facets for v in vertices(P)}
    assert got == oracles.brute_vertices(P.normals, P.offsets)
    # simple: every vertex lies on exactly n facets
    assert all(len(f) == P.dimension for f in got.values())


@settings(max_examples=40)
@given(delzant_polytopes(), st.integers(1, 7), st.integers(1, 5))
def test_scaling_scales_vertices(P, p, q):
    t = Fraction(p, q)
    # scaling about the origin is exact only for offsets; vertices scale by t
    assert coords(P.scaled(t)) == {tuple(t * c for c in v) for v in coords(P)}
