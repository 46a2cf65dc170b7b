"""Toric variety as a symplectic quotient of C^r.

Conventions (fixed for the whole package):

* flat form ``omega0(u, v) = sum_i Im(conj(u_i) v_i)``;
* the circle acting on one coordinate has moment ``|z|^2 / 2``;
* ``|z_i|^2 / 2 = area_scale * (<x, nu_i> + lambda_i)`` on the level set, so
  the symplectic area over a lattice-length-1 edge is ``2 pi`` when
  ``area_scale = 2 pi`` (the default);
* the n-torus acts through an integer section ``L`` of ``N^T`` (``N^T L = I``):
  the element ``b`` of ``Z^n`` rotates ``z_i`` with weight ``(L b)_i``, and
  the lift of a moment point ``x`` with angles ``theta`` has phases
  ``L theta``. Two sections differ by a gauge transformation.

Arrays of points have shape ``(..., r)``; the single-point functions below
wrap the vectorized helpers.
"""

from dataclasses import dataclass, field

import numpy as np

from . import lattice
from .config import DEFAULT_AREA_SCALE, DEFAULT_TOLERANCES
from .errors import BaseLocusError, GeometryError, InfeasibleError, NumericError, StructureError
from .polytope import validate_delzant, vertices


@dataclass(frozen=True, eq=False)
class ReductionData:
    polytope: object
    weights: np.ndarray        # (r - n) x r integer, rows span the gauge lattice
    level: np.ndarray          # kappa = area_scale * Q lambda
    normals: np.ndarray        # r x n float
    offsets: np.ndarray        # r float
    area_scale: float
    section: np.ndarray        # r x n integer, N^T section = I
    vertex_facets: tuple
    tol: object = field(default=DEFAULT_TOLERANCES)

    @property
    def r(self):
        return self.normals.shape[0]

    @property
    def n(self):
        return self.normals.shape[1]

    @property
    def gauge(self):
        return np.array(self.weights, dtype=float).reshape(-1, self.r)

    def section_weights(self, b):
        """Integer weights on C^r of the n-torus element ``b``."""
        b = np.asarray(b, dtype=object).reshape(-1, 1)
        return np.array([int(v) for v in lattice.matmul(self.section, b).ravel()], dtype=float)

    def to_dict(self):
        return {
            "gauge_weights": [[int(v) for v in row] for row in self.weights],
            "level": [float(v) for v in self.level],
            "area_scale": self.area_scale,
            "phase_section": [[int(v) for v in row] for row in self.section],
        }


@dataclass(frozen=True, eq=False)
class ToricPoint:
    z: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z", np.asarray(self.z, dtype=complex))


@dataclass(frozen=True, eq=False)
class TangentRep:
    v: np.ndarray
    horizontal: bool = False


def reduction_setup(P, area_scale=DEFAULT_AREA_SCALE, tol=DEFAULT_TOLERANCES, validate=True):
    """Gauge weights, level and phase section for the quotient realizing ``P``."""
    if not area_scale > 0:
        raise ValueError("area_scale must be positive")
    if validate:
        rep = validate_delzant(P)
        if not rep.passed:
            raise GeometryError(f"polytope is not Delzant: {rep.checks}")
    N = P.normal_matrix()
    r, n = N.shape
    Q = lattice.integer_kernel(N.T).T
    if Q.shape[0]:
        assert all(v == 0 for v in lattice.matmul(Q, N).ravel())
    lam = np.array([float(v) for v in P.offsets])
    Qf = np.array(Q, dtype=float).reshape(-1, r)
    kappa = area_scale * (Qf @ lam) if Q.shape[0] else np.zeros(0)
    L = lattice.solve_unimodular_section(N.T)
    vf = tuple(v.active_facets for v in vertices(P)) if validate else ()
    return ReductionData(
        polytope=P,
        weights=Q,
        level=kappa,
        normals=np.array(N, dtype=float),
        offsets=lam,
        area_scale=float(area_scale),
        section=L,
        vertex_facets=vf,
        tol=tol,
    )


# -- vectorized helpers -----------------------------------------------------

def slacks(R, X):
    """Facet slacks ``<x, nu_i> + lambda_i`` for moment points ``X`` (..., n)."""
    return np.asarray(X, dtype=float) @ R.normals.T + R.offsets


def lift_many(R, X, Theta):
    """Points over moment values ``X`` with torus angles ``Theta`` (both (..., n))."""
    ell = slacks(R, X)
    if np.any(ell < 0):
        raise InfeasibleError("moment point lies outside the polytope", constraint="polytope")
    modulus = np.sqrt(2.0 * R.area_scale * ell)
    L = np.array(R.section, dtype=float)
    phases = np.asarray(Theta, dtype=float) @ L.T
    return modulus * np.exp(1j * phases)


def level_residual_many(R, Z):
    if R.weights.shape[0] == 0:
        return np.zeros(np.shape(Z)[:-1])
    half = 0.5 * np.abs(Z) ** 2
    res = half @ R.gauge.T - R.level
    return np.max(np.abs(res), axis=-1) / max(1.0, float(np.max(np.abs(R.level))))


def moment_many(R, Z):
    """Least-squares moment values and residuals for points ``Z`` (..., r)."""
    rhs = 0.5 * np.abs(Z) ** 2 / R.area_scale - R.offsets
    pinv = np.linalg.pinv(R.normals)
    X = rhs @ pinv.T
    resid = np.max(np.abs(X @ R.normals.T - rhs), axis=-1)
    return X, resid


def horizontal_many(R, Z, V):
    """Remove gauge-orbit and level-normal components from ``V`` at ``Z``.

    The real inner product on C^r is ``Re <a, b>``. Gauge directions
    ``i Q_j * z`` and normals ``Q_j * z`` are mutually orthogonal, so the two
    families are projected out separately.
    """
    Z = np.asarray(Z, dtype=complex)
    V = np.asarray(V, dtype=complex)
    Q = R.gauge
    if Q.shape[0] == 0:
        return V.copy()
    dirs = Z[..., None, :] * Q              # (..., k, r): normal directions
    gram = np.real(np.einsum("...ir,...jr->...ij", np.conj(dirs), dirs))
    # gauge directions have the same Gram matrix (multiply by i)
    out = V
    for D in (dirs, 1j * dirs):
        coeff_rhs = np.real(np.einsum("...ir,...r->...i", np.conj(D), out))
        coeff = np.linalg.solve(gram, coeff_rhs[..., None])[..., 0]
        out = out - np.einsum("...i,...ir->...r", coeff, D)
    return out


def omega_many(U, V):
    return np.sum(np.imag(np.conj(U) * V), axis=-1)


def flow_many(R, Z, b, t):
    w = R.section_weights(b)
    return np.asarray(Z) * np.exp(1j * np.multiply.outer(np.asarray(t, dtype=float), w))


def pencil_monomials(D, Z):
    Z = np.asarray(Z, dtype=complex)
    s_plus = np.ones(Z.shape[:-1], dtype=complex)
    s_minus = np.ones(Z.shape[:-1], dtype=complex)
    for i, e in D.plus_exponents.items():
        s_plus = s_plus * Z[..., i] ** e
    for i, e in D.minus_exponents.items():
        s_minus = s_minus * Z[..., i] ** e
    return s_plus, s_minus


def pencil_chart_many(D, Z):
    """``psi = s+ / s-`` in the affine chart (``inf`` on ``D-``)."""
    sp, sm = pencil_monomials(D, Z)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = sp / sm
    return np.where(sm == 0, np.inf, t)


# -- single-point operations ------------------------------------------------

def check_point(R, p, tol=None):
    """Validate level residual and stability of ``p``; returns the residual."""
    tol = tol if tol is not None else R.tol.level
    z = p.z if isinstance(p, ToricPoint) else np.asarray(p, dtype=complex)
    if z.shape != (R.r,):
        raise StructureError(f"point has shape {z.shape}, expected ({R.r},)")
    res = float(level_residual_many(R, z))
    if res > tol:
        raise GeometryError(f"point violates the reduction level (residual {res:.3e})")
    if R.vertex_facets:
        scale = max(1.0, float(np.max(np.abs(z))))
        zero = {i for i in range(R.r) if abs(z[i]) <= 1e-12 * scale}
        if zero and not any(zero <= vf for vf in R.vertex_facets):
            raise GeometryError(f"coordinates {sorted(zero)} vanish together: unstable point")
    return res


def lift_from_moment(R, x, theta=None):
    """Point of X over an interior moment value ``x`` with angles ``theta``."""
    x = np.asarray(x, dtype=float)
    theta = np.zeros(R.n) if theta is None else np.asarray(theta, dtype=float)
    ell = slacks(R, x)
    if np.any(ell <= 0):
        raise InfeasibleError(
            f"moment point {x.tolist()} is not interior (facet slacks {ell.tolist()})",
            constraint="interior",
        )
    return ToricPoint(lift_many(R, x, theta))


def moment_map(R, p, return_residual=False):
    z = p.z if isinstance(p, ToricPoint) else np.asarray(p, dtype=complex)
    x, res = moment_many(R, z)
    scale = max(1.0, float(np.max(np.abs(R.offsets))))
    if res > R.tol.level * scale * 100:
        raise GeometryError(f"point is inconsistent with the moment map (residual {res:.3e})")
    return (x, float(res)) if return_residual else x


def project_horizontal(R, p, v):
    z = p.z if isinstance(p, ToricPoint) else np.asarray(p, dtype=complex)
    v = v.v if isinstance(v, TangentRep) else np.asarray(v, dtype=complex)
    return TangentRep(horizontal_many(R, z, v), horizontal=True)


def omega_eval(R, p, u, v):
    """Reduced symplectic form on horizontal representatives."""
    for w in (u, v):
        if not isinstance(w, TangentRep) or not w.horizontal:
            raise GeometryError("omega_eval needs horizontal tangent representatives")
    return float(omega_many(u.v, v.v))


def subtorus_flow(R, p, b, t):
    """Flow of the Hamiltonian circle action of ``b`` in Z^n for angle ``t``."""
    if not any(int(v) for v in b):
        raise ValueError("flow direction must be nonzero")
    z = p.z if isinstance(p, ToricPoint) else np.asarray(p, dtype=complex)
    return ToricPoint(flow_many(R, z, b, t))


def gauge_act(R, p, angles):
    """Act by the reduction torus (gauge) with angles (one per gauge weight)."""
    z = p.z if isinstance(p, ToricPoint) else np.asarray(p, dtype=complex)
    phase = np.asarray(angles, dtype=float) @ R.gauge if R.gauge.shape[0] else 0.0
    return ToricPoint(z * np.exp(1j * phase))


def pencil_weights_balanced(R, D):
    """Both pencil monomials carry the same gauge weight."""
    a = np.zeros(R.r)
    for i, e in D.plus_exponents.items():
        a[i] += e
    for i, e in D.minus_exponents.items():
        a[i] -= e
    return bool(np.all(R.gauge @ a == 0))


def pencil_map(R, D, p):
    """``psi(p)`` as a unit-norm projective pair ``(s+, s-)``."""
    if not pencil_weights_balanced(R, D):
        raise StructureError("pencil monomials have different gauge weights")
    z = p.z if isinstance(p, ToricPoint) else np.asarray(p, dtype=complex)
    # on B = D+ cap D- some coordinate of each side vanishes; testing the
    # coordinates rather than the monomials keeps high-degree pencils usable
    cut = R.tol.base_locus * max(1.0, float(np.max(np.abs(z))))
    if any(abs(z[i]) <= cut for i in D.plus_exponents) and any(abs(z[i]) <= cut for i in D.minus_exponents):
        raise BaseLocusError("point lies on the base locus D+ and D- of the pencil")
    sp, sm = pencil_monomials(D, z)
    sp, sm = complex(sp), complex(sm)
    norm = np.hypot(abs(sp), abs(sm))
    if not norm > 0:
        raise NumericError("both pencil monomials underflow at this point")
    return sp / norm, sm / norm


def pencil_chart(pair):
    sp, sm = pair
    return np.inf if sm == 0 else sp / sm
