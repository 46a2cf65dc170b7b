"""Delzant polytopes in exact rational arithmetic.

A polytope is given by inward primitive facet normals ``nu_i`` and rational
offsets ``lambda_i``; it is ``{x : <x, nu_i> + lambda_i >= 0 for all i}``.
Facets are labelled by their row index, and that index names the divisor
``D_i`` in every downstream module.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import gcd
from pathlib import Path

from . import lattice
from .errors import GeometryError, StructureError


def _fraction(v):
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        raise StructureError(f"offset {v!r} must be an exact rational (int or 'p/q' string)")
    try:
        return Fraction(v)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise StructureError(f"cannot parse offset {v!r} as a rational") from exc


@dataclass(frozen=True)
class DelzantPolytope:
    normals: tuple
    offsets: tuple
    name: str = ""

    def __post_init__(self):
        normals = tuple(tuple(int(a) for a in row) for row in self.normals)
        offsets = tuple(_fraction(v) for v in self.offsets)
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "offsets", offsets)
        if not normals:
            raise StructureError("polytope needs at least one facet")
        n = len(normals[0])
        if n == 0 or any(len(row) != n for row in normals):
            raise StructureError("all normals must have the same positive length")
        if len(offsets) != len(normals):
            raise StructureError(f"{len(normals)} normals but {len(offsets)} offsets")

    @property
    def dimension(self):
        return len(self.normals[0])

    @property
    def n_facets(self):
        return len(self.normals)

    def normal_matrix(self):
        return lattice.as_int_matrix(self.normals)

    def slack(self, x):
        """Facet slacks ``<x, nu_i> + lambda_i`` (exact for rational ``x``)."""
        return [sum(a * b for a, b in zip(x, nu)) + lam for nu, lam in zip(self.normals, self.offsets)]

    def contains(self, x, strict=False):
        s = self.slack(x)
        return all(v > 0 for v in s) if strict else all(v >= 0 for v in s)

    def scaled(self, t):
        t = _fraction(t)
        return DelzantPolytope(self.normals, tuple(t * lam for lam in self.offsets), self.name)

    def to_dict(self):
        return {
            "dimension": self.dimension,
            "normals": [list(row) for row in self.normals],
            "offsets": [str(v) for v in self.offsets],
        }

    @classmethod
    def from_dict(cls, data, name=""):
        try:
            n = int(data["dimension"])
            normals = data["normals"]
            offsets = data["offsets"]
        except (KeyError, TypeError, ValueError) as exc:
            raise StructureError(f"polytope JSON needs dimension/normals/offsets: {exc}") from exc
        if any(not isinstance(row, list) or len(row) != n for row in normals):
            raise StructureError(f"every normal must be a list of {n} integers")
        for row in normals:
            for a in row:
                if not isinstance(a, int) or isinstance(a, bool):
                    raise StructureError(f"normal entry {a!r} is not an integer")
        return cls(tuple(tuple(row) for row in normals), tuple(offsets), name)


def load_polytope(path):
    path = Path(path)
    with open(path) as fh:
        data = json.load(fh)
    return DelzantPolytope.from_dict(data, name=path.stem)


def fixture(name):
    """Load one of the bundled polytopes (``cp2``, ``p1xp1``, ``hirzebruch1``, ...)."""
    return load_polytope(Path(__file__).parent / "data" / f"{name}.json")


@dataclass(frozen=True)
class VertexData:
    coordinates: tuple
    active_facets: frozenset


@dataclass
class ValidationReport:
    checks: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(self.checks.values())

    def to_dict(self):
        return {"delzant": self.passed, "checks": dict(self.checks), "details": self.details}


def _solve_exact(rows, rhs):
    """Solve a square rational system; ``None`` if singular."""
    n = len(rows)
    A = [[Fraction(v) for v in row] + [Fraction(b)] for row, b in zip(rows, rhs)]
    for c in range(n):
        piv = next((i for i in range(c, n) if A[i][c] != 0), None)
        if piv is None:
            return None
        A[c], A[piv] = A[piv], A[c]
        for i in range(n):
            if i != c and A[i][c] != 0:
                f = A[i][c] / A[c][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    return tuple(A[i][n] / A[i][i] for i in range(n))


def _affine_rank(points):
    if not points:
        return -1
    base = points[0]
    diffs = [[Fraction(a) - b for a, b in zip(p, base)] for p in points[1:]]
    if not diffs:
        return 0
    # rank of rational matrix: scale to integers row by row
    rows = []
    for d in diffs:
        den = 1
        for v in d:
            den = den * v.denominator // gcd(den, v.denominator)
        rows.append([int(v * den) for v in d])
    return lattice.rank(rows)


def _check_structure(P):
    n, r = P.dimension, P.n_facets
    if r < n + 1:
        raise StructureError(f"{r} facets cannot bound a {n}-dimensional polytope (need at least {n + 1})")


def _recession_direction(P):
    """A nonzero ``d`` with ``<d, nu_i> >= 0`` for all i, or ``None``.

    The recession cone is pointed when the normals span, so it is nonzero iff
    one of its extreme rays exists; each ray is cut out by ``n - 1``
    independent tight normals.
    """
    n = P.dimension
    N = P.normals
    if lattice.rank(N) < n:
        K = lattice.integer_kernel(N)
        return tuple(int(v) for v in K[:, 0])
    for sub in combinations(range(P.n_facets), n - 1):
        rows = [N[i] for i in sub]
        if n == 1:
            cands = [(1,), (-1,)]
        else:
            if lattice.rank(rows) < n - 1:
                continue
            K = lattice.integer_kernel(rows)
            d = tuple(int(v) for v in K[:, 0])
            cands = [d, tuple(-v for v in d)]
        for d in cands:
            if all(sum(a * b for a, b in zip(d, nu)) >= 0 for nu in N):
                return d
    return None


def _enumerate(P):
    n = P.dimension
    found = {}
    for sub in combinations(range(P.n_facets), n):
        rows = [P.normals[i] for i in sub]
        x = _solve_exact(rows, [-P.offsets[i] for i in sub])
        if x is None or not P.contains(x):
            continue
        if x not in found:
            slack = P.slack(x)
            found[x] = VertexData(x, frozenset(i for i, s in enumerate(slack) if s == 0))
    return sorted(found.values(), key=lambda v: v.coordinates)


def vertices(P):
    """Exact vertex list of ``P``; raises for empty or unbounded regions."""
    d = _recession_direction(P)
    if d is not None:
        raise GeometryError(f"polytope is unbounded along direction {d}")
    verts = _enumerate(P)
    if not verts:
        raise GeometryError("feasible region is empty")
    return verts


def validate_delzant(P):
    """Check boundedness, full dimension, primitivity, irredundancy,
    simplicity and smoothness. Structural problems raise ``StructureError``;
    geometric failures are reported in the returned ``ValidationReport``."""
    _check_structure(P)
    n = P.dimension
    rep = ValidationReport()
    bad_normals = [i for i, nu in enumerate(P.normals) if _gcd_all(nu) != 1]
    rep.checks["primitive_normals"] = not bad_normals
    if bad_normals:
        rep.details["non_primitive_normals"] = bad_normals

    d = _recession_direction(P)
    rep.checks["bounded"] = d is None
    if d is not None:
        rep.details["recession_direction"] = list(d)
        for key in ("full_dimensional", "irredundant", "simple", "smooth"):
            rep.checks[key] = False
        return rep

    verts = _enumerate(P)
    if not verts:
        rep.checks["nonempty"] = False
        for key in ("full_dimensional", "irredundant", "simple", "smooth"):
            rep.checks[key] = False
        return rep
    pts = [v.coordinates for v in verts]
    rep.checks["full_dimensional"] = _affine_rank(pts) == n

    redundant = []
    for i in range(P.n_facets):
        on = [v.coordinates for v in verts if i in v.active_facets]
        if _affine_rank(on) != n - 1:
            redundant.append(i)
    rep.checks["irredundant"] = not redundant
    if redundant:
        rep.details["redundant_facets"] = redundant

    nonsimple = [list(map(str, v.coordinates)) for v in verts if len(v.active_facets) != n]
    rep.checks["simple"] = not nonsimple
    if nonsimple:
        rep.details["non_simple_vertices"] = nonsimple

    singular = []
    for v in verts:
        if len(v.active_facets) != n:
            continue
        dt = lattice.det([P.normals[i] for i in sorted(v.active_facets)])
        if abs(dt) != 1:
            singular.append({
                "vertex": [str(c) for c in v.coordinates],
                "facets": sorted(v.active_facets),
                "determinant": abs(dt),
            })
    rep.checks["smooth"] = not singular and not nonsimple
    if singular:
        rep.details["singular_vertices"] = singular
    return rep


def _gcd_all(values):
    g = 0
    for v in values:
        g = gcd(g, int(v))
    return g


@dataclass(frozen=True)
class FaceIncidence:
    """Faces indexed by facet subsets: ``dims[S]`` is the face dimension, or
    -1 when the facets in ``S`` have empty common intersection."""

    dims: dict

    def meets(self, *facets):
        return self.dimension(*facets) >= 0

    def dimension(self, *facets):
        key = tuple(sorted(set(facets)))
        if key in self.dims:
            return self.dims[key]
        if len(key) > max(len(k) for k in self.dims):
            return -1     # more than n facets never meet on a simple polytope
        raise KeyError(key)


def facet_incidence(P, verts=None):
    """Dimension of the face ``F_S`` for every facet subset ``S`` of size <= n."""
    verts = verts if verts is not None else vertices(P)
    dims = {}
    for k in range(1, P.dimension + 1):
        for sub in combinations(range(P.n_facets), k):
            on = [v.coordinates for v in verts if set(sub) <= v.active_facets]
            dims[sub] = _affine_rank(on)
    return FaceIncidence(dims)
