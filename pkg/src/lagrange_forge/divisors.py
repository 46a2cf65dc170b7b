"""Picard group of a toric variety and pencils of boundary divisors.

A primitive lattice direction ``a`` gives the linear relation
``sum_i <a, nu_i> [D_i] = 0``; splitting it by sign of the coefficients
produces two linearly equivalent effective divisors ``D+`` and ``D-`` and the
pencil they span.
"""

from dataclasses import dataclass
from math import gcd

import numpy as np

from . import lattice
from .errors import GeometryError, PencilError, StructureError
from .polytope import facet_incidence, validate_delzant, vertices


@dataclass(frozen=True)
class PicardData:
    group: lattice.AbelianGroupStructure
    class_of: tuple

    @property
    def rank(self):
        return self.group.free_rank

    @property
    def torsion(self):
        return self.group.torsion

    def class_sum(self, coefficients):
        """Class of ``sum_i c_i D_i`` in the group coordinates."""
        return self.group.project([int(c) for c in coefficients])

    def to_dict(self):
        return {
            "rank": self.rank,
            "torsion": list(self.torsion),
            "class_of": [list(c) for c in self.class_of],
            "projection": [[int(x) for x in row] for row in self.group.projection],
        }


def picard(P):
    """Pic X as the cokernel of ``m -> (<m, nu_i>)_i``."""
    rep = validate_delzant(P)
    if not rep.passed:
        raise GeometryError(f"polytope is not Delzant: {rep.to_dict()['checks']}")
    grp = lattice.cokernel_structure(P.normal_matrix())
    r = P.n_facets
    classes = []
    for i in range(r):
        e = [0] * r
        e[i] = 1
        classes.append(grp.project(e))
    return PicardData(grp, tuple(classes))


def primitive(a):
    a = [int(x) for x in a]
    g = 0
    for x in a:
        g = gcd(g, x)
    if g == 0:
        raise PencilError("zero direction defines no pencil")
    return tuple(x // g for x in a)


def direction_relation(P, a, pic=None):
    """Coefficients ``a_i = <a, nu_i>`` of the divisor relation cut by ``a``.

    ``a`` is reduced to its primitive representative first. The relation is
    checked to vanish in Pic X.
    """
    a = primitive(a)
    if len(a) != P.dimension:
        raise StructureError(f"direction has {len(a)} entries, polytope dimension is {P.dimension}")
    coeffs = tuple(sum(x * y for x, y in zip(a, nu)) for nu in P.normals)
    pic = pic if pic is not None else picard(P)
    if not pic.group.is_zero(pic.group.project(list(coeffs))):
        raise AssertionError("relation does not vanish in Pic X")
    return coeffs


@dataclass(frozen=True)
class PencilData:
    direction: tuple
    coefficients: tuple
    plus_exponents: dict
    minus_exponents: dict
    zero_facets: tuple
    pencil_class: tuple
    base_locus: tuple
    base_locus_dims: dict
    reduced_basis: tuple

    @property
    def degree(self):
        """Total degree of ``D+`` (equals that of ``D-``)."""
        return sum(self.plus_exponents.values())

    @property
    def base_points(self):
        return tuple(p for p in self.base_locus if self.base_locus_dims[p] == 0)

    def to_dict(self):
        return {
            "direction": list(self.direction),
            "coefficients": list(self.coefficients),
            "plus_exponents": {str(k): v for k, v in sorted(self.plus_exponents.items())},
            "minus_exponents": {str(k): v for k, v in sorted(self.minus_exponents.items())},
            "zero_facets": list(self.zero_facets),
            "pencil_class": list(self.pencil_class),
            "degree": self.degree,
            "base_locus": [
                {"facets": list(p), "face_dimension": self.base_locus_dims[p]} for p in self.base_locus
            ],
            "reduced_basis": [list(b) for b in self.reduced_basis],
        }


def split_pencil(P, a, pic=None):
    """Full pencil data for direction ``a``."""
    pic = pic if pic is not None else picard(P)
    a = primitive(a)
    coeffs = direction_relation(P, a, pic)
    plus = {i: c for i, c in enumerate(coeffs) if c > 0}
    minus = {i: -c for i, c in enumerate(coeffs) if c < 0}
    zero = tuple(i for i, c in enumerate(coeffs) if c == 0)
    if not plus or not minus:
        raise PencilError(f"direction {a} yields no pencil: coefficients {coeffs} have one sign")

    def combo(exps):
        return pic.class_sum([exps.get(i, 0) for i in range(P.n_facets)])

    cls_plus, cls_minus = combo(plus), combo(minus)
    if cls_plus != cls_minus:
        raise AssertionError(f"[D+] = {cls_plus} differs from [D-] = {cls_minus}")

    inc = facet_incidence(P, vertices(P))
    base, dims = [], {}
    for i in sorted(plus):
        for j in sorted(minus):
            d = inc.dimension(i, j) if P.dimension >= 2 else -1
            if d >= 0:
                base.append((i, j))
                dims[(i, j)] = d

    K = lattice.integer_kernel([list(a)])
    basis = tuple(tuple(int(v) for v in K[:, j]) for j in range(K.shape[1]))
    return PencilData(
        direction=a,
        coefficients=coeffs,
        plus_exponents=plus,
        minus_exponents=minus,
        zero_facets=zero,
        pencil_class=cls_plus,
        base_locus=tuple(base),
        base_locus_dims=dims,
        reduced_basis=basis,
    )


def complement_vector(a):
    """Integer ``w`` with ``<a, w> = 1`` (``a`` primitive)."""
    L = lattice.solve_unimodular_section([list(a)])
    return tuple(int(v) for v in np.asarray(L).ravel())
