"""Pencil tori: the union over a loop in the pencil base of fiber pieces cut
out by fixed values of the reduced integrals.

Fix a primitive direction ``a``, its pencil ``psi = prod z_i^{<a, nu_i>}``
and reduced integrals ``f~_j = <b_j, mu>`` with ``b_j`` spanning the
annihilator of ``a``. On the level set ``{f~ = c}`` the moment image is the
segment ``x0 + tau a``, ``log|psi|`` is strictly increasing in ``tau``, and
``arg psi = <a, theta>``. So over each base value ``t`` the fiber piece is
one orbit of the reduced torus ``T^{n-1}``: ``tau`` comes from a scalar root
solve and the phases are fixed by ``<a, theta> = arg t``.

The loop parameter ``s`` runs over ``[0, 2 pi)``; fiber angles ``beta_j``
multiply ``b_j``. Grids are periodic in every axis, with the ``s`` axis
closed up by the recorded holonomy.
"""

import re
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOLERANCES
from .divisors import complement_vector
from .errors import (
    IncompleteSampleError,
    InfeasibleError,
    MarginError,
    NumericError,
    StructureError,
)
from .report import VerificationReport, residual_histogram
from .toric_space import (
    horizontal_many,
    level_residual_many,
    lift_many,
    moment_many,
    omega_many,
    pencil_chart_many,
    pencil_weights_balanced,
    slacks,
)

FD_COEFFS = {
    2: (1 / 2,),
    4: (2 / 3, -1 / 12),
    6: (3 / 4, -3 / 20, 1 / 60),
    8: (4 / 5, -1 / 5, 4 / 105, -1 / 280),
}
DEFAULT_FD_ORDER = 8


# -- loops in the pencil base ------------------------------------------------

@dataclass(frozen=True)
class LoopSpec:
    kind: str = "circle"
    center: complex = 0j
    radius: float = 1.0
    samples: int = 64
    orientation: int = 1
    vertices: tuple = ()

    def __post_init__(self):
        if self.kind not in ("circle", "polyline"):
            raise StructureError(f"unknown loop kind {self.kind!r}")
        if self.kind == "circle" and not self.radius > 0:
            raise StructureError("loop radius must be positive")
        if self.kind == "polyline" and len(self.vertices) < 3:
            raise StructureError("a polyline loop needs at least three vertices")
        if self.orientation not in (1, -1):
            raise StructureError("orientation must be +1 or -1")
        if self.samples < 3:
            raise StructureError("a loop needs at least three samples")

    def sample(self, count=None):
        """Parameters ``s`` in ``[0, 2 pi)`` and loop values ``gamma(s)``."""
        count = count or self.samples
        s = 2 * np.pi * np.arange(count) / count
        if self.kind == "circle":
            return s, complex(self.center) + self.radius * np.exp(1j * self.orientation * s)
        verts = np.asarray(self.vertices, dtype=complex)
        if self.orientation < 0:
            verts = verts[::-1]
        closed = np.append(verts, verts[:1])
        seg = np.abs(np.diff(closed))
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        u = cum[-1] * np.arange(count) / count
        idx = np.searchsorted(cum, u, side="right") - 1
        frac = (u - cum[idx]) / seg[idx]
        return s, closed[idx] + frac * (closed[idx + 1] - closed[idx])

    def to_dict(self):
        d = {"kind": self.kind, "samples": self.samples, "orientation": self.orientation}
        if self.kind == "circle":
            d.update(center=[complex(self.center).real, complex(self.center).imag], radius=self.radius)
        else:
            d["vertices"] = [[complex(v).real, complex(v).imag] for v in self.vertices]
        return d

    @classmethod
    def parse(cls, text, samples=64):
        """Parse ``"circle:center=1,radius=0.25"`` style loop descriptions."""
        kind, _, rest = text.partition(":")
        kind = kind.strip()
        kw = {"samples": samples}
        if kind == "polyline":
            pts = [complex(p.replace(" ", "")) for p in re.split(r"[;]", rest) if p.strip()]
            return cls(kind="polyline", vertices=tuple(pts), samples=samples)
        for item in filter(None, (x.strip() for x in rest.split(","))):
            key, _, val = item.partition("=")
            key = key.strip()
            if key == "center":
                kw["center"] = complex(val.replace(" ", ""))
            elif key == "radius":
                kw["radius"] = float(val)
            elif key == "samples":
                kw["samples"] = int(val)
            elif key == "orientation":
                kw["orientation"] = int(val)
            else:
                raise StructureError(f"unknown loop field {key!r}")
        return cls(kind=kind, **kw)


@dataclass(frozen=True)
class SingularValue:
    value: complex
    kind: str            # "plus", "minus" or "unexpected"
    facets: tuple = ()

    @property
    def is_infinite(self):
        return np.isinf(abs(self.value))

    def to_dict(self):
        v = "inf" if self.is_infinite else [complex(self.value).real, complex(self.value).imag]
        return {"value": v, "kind": self.kind, "facets": list(self.facets)}


@dataclass(frozen=True)
class LoopClass:
    kind: str            # "standard", "exotic" or "other"
    windings: dict

    @property
    def name(self):
        return {"standard": "Clifford", "exotic": "Chekanov"}.get(self.kind, "other")

    def to_dict(self):
        return {"class": self.kind, "type": self.name, "windings": dict(self.windings)}


def _sv_label(sv):
    return "inf" if sv.is_infinite else f"{complex(sv.value).real:.12g}{complex(sv.value).imag:+.12g}j"


def winding_number(values, around):
    """Discrete argument sum of ``values - around`` over a closed sample."""
    w = np.asarray(values, dtype=complex) - around
    step = np.angle(np.roll(w, -1) / w)
    if np.max(np.abs(step)) > np.pi / 2:
        raise NumericError(
            "loop samples too coarse to certify the winding number; refine the loop",
            {"max_argument_jump": float(np.max(np.abs(step)))},
        )
    return int(round(np.sum(step) / (2 * np.pi)))


def classify_loop(loop, singular):
    """Winding of ``loop`` around each singular value and the resulting class."""
    _, gamma = loop.sample()
    finite = [sv for sv in singular if not sv.is_infinite]
    windings = {}
    for sv in finite:
        if np.min(np.abs(gamma - sv.value)) == 0:
            raise MarginError("loop passes through a singular value", constraint="margin")
        windings[_sv_label(sv)] = winding_number(gamma, sv.value)
    if any(sv.is_infinite for sv in singular):
        windings["inf"] = -sum(windings.values())
    labels = sorted(_sv_label(sv) for sv in singular)
    if labels == sorted(["0+0j", "inf"]):
        w0 = windings["0+0j"]
        kind = "standard" if abs(w0) == 1 else "exotic" if w0 == 0 else "other"
    else:
        kind = "other"
    return LoopClass(kind, windings)


# -- fiber geometry ----------------------------------------------------------

@dataclass(frozen=True)
class ReducedIntegralValues:
    c: tuple

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(float(v) for v in self.c))


def reduced_integrals(R, D, Z):
    """Values of ``f~_j = <b_j, mu>`` at points ``Z`` (..., r)."""
    X, _ = moment_many(R, Z)
    B = np.asarray(D.reduced_basis, dtype=float).reshape(-1, R.n)
    return X @ B.T


class _Segment:
    """The level set ``{f~ = c}`` in moment coordinates: ``x0 + tau a``."""

    def __init__(self, R, D, c):
        n = R.n
        self.a = np.asarray(D.direction, dtype=float)
        self.B = np.asarray(D.reduced_basis, dtype=float).reshape(-1, n)
        c = np.asarray(c.c if isinstance(c, ReducedIntegralValues) else c, dtype=float).reshape(-1)
        if c.shape[0] != self.B.shape[0]:
            raise StructureError(f"need {self.B.shape[0]} reduced-integral values, got {c.shape[0]}")
        self.c = c
        M = np.vstack([self.B, self.a])
        self.x0 = np.linalg.solve(M, np.concatenate([c, [0.0]]))
        self.ell0 = slacks(R, self.x0)
        self.coef = np.asarray(D.coefficients, dtype=float)
        self.area = R.area_scale
        for i in D.zero_facets:
            if self.ell0[i] <= 0:
                raise InfeasibleError(
                    f"reduced-integral values {c.tolist()} leave the polytope through facet {i}",
                    constraint=f"facet {i}",
                )
        lo = max(-self.ell0[i] / self.coef[i] for i in D.plus_exponents)
        hi = min(self.ell0[i] / -self.coef[i] for i in D.minus_exponents)
        if not lo < hi:
            raise InfeasibleError(
                f"reduced-integral values {c.tolist()} give an empty level set", constraint="level set"
            )
        self.lo, self.hi = lo, hi
        self.w = np.asarray(complement_vector(D.direction), dtype=float)

    def log_abs_psi(self, tau):
        ell = self.ell0 + tau * self.coef
        return 0.5 * np.sum(self.coef * np.log(2 * self.area * ell))

    def dlog_abs_psi(self, tau):
        ell = self.ell0 + tau * self.coef
        return 0.5 * np.sum(self.coef ** 2 / ell)

    def solve_tau(self, target, seed=None, maxiter=200):
        """Safeguarded Newton for ``log|psi|(tau) = target`` on ``(lo, hi)``."""
        lo, hi = self.lo, self.hi
        tau = seed if seed is not None and lo < seed < hi else 0.5 * (lo + hi)
        for it in range(maxiter):
            f = self.log_abs_psi(tau) - target
            if f > 0:
                hi = tau
            else:
                lo = tau
            if abs(f) < 4e-16 * max(1.0, abs(target)):
                return tau, it
            step = f / self.dlog_abs_psi(tau)
            new = tau - step
            if not lo < new < hi:
                new = 0.5 * (lo + hi)
            if abs(new - tau) <= 1e-16 * max(1.0, abs(tau)):
                return new, it
            tau = new
        raise NumericError(
            "radial solve did not converge",
            {"target_log_abs_psi": target, "bracket": [lo, hi], "tau": tau},
        )

    def moment(self, tau):
        return self.x0 + np.multiply.outer(tau, self.a)


def _check_margin(values, singular, margin):
    values = np.asarray(values, dtype=complex)
    for sv in singular:
        if sv.is_infinite:
            d = np.min(1.0 / np.abs(values))
        else:
            d = np.min(np.abs(values - sv.value))
        if d < margin:
            raise MarginError(
                f"base values come within {d:.3g} of singular value {_sv_label(sv)} (margin {margin})",
                constraint="margin",
            )


def _fiber_angles(seg, n_fiber, resolution):
    grids = [2 * np.pi * np.arange(resolution) / resolution] * n_fiber
    if n_fiber == 0:
        return np.zeros((0,)), np.zeros((1, 0))
    mesh = np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1)
    return grids[0], mesh


def singular_values(D, R, c=None, scan=True, scan_points=41, jac_tol=1e-8):
    """Base values over which the fiber degenerates.

    Always returns ``0`` (image of ``D+``) and ``inf`` (image of ``D-``).
    With ``scan`` the fiber solve is repeated on a grid of level sets near
    ``c`` and any base value where the numerically differentiated radial
    Jacobian ``d log|psi| / d tau`` collapses is appended as ``unexpected``.
    """
    out = [
        SingularValue(0j, "plus", tuple(sorted(D.plus_exponents))),
        SingularValue(complex(np.inf), "minus", tuple(sorted(D.minus_exponents))),
    ]
    if not scan:
        return out
    levels = _scan_levels(R, D, c)
    for cv in levels:
        try:
            seg = _Segment(R, D, cv)
        except InfeasibleError:
            continue
        span = seg.hi - seg.lo
        taus = seg.lo + span * (np.arange(1, scan_points + 1) / (scan_points + 1))
        h = 1e-6 * span
        zeros = np.zeros((len(taus), R.n))
        zp = lift_many(R, seg.moment(taus + h), zeros)
        zm = lift_many(R, seg.moment(taus - h), zeros)
        z0 = lift_many(R, seg.moment(taus), zeros)
        jac = (np.log(np.abs(pencil_chart_many(D, zp))) - np.log(np.abs(pencil_chart_many(D, zm)))) / (2 * h)
        for k in np.nonzero(np.abs(jac) < jac_tol)[0]:
            t = complex(pencil_chart_many(D, z0[k]))
            out.append(SingularValue(t, "unexpected", ()))
    return out


def _scan_levels(R, D, c):
    B = np.asarray(D.reduced_basis, dtype=float).reshape(-1, R.n)
    if c is None:
        verts = np.array([[float(v) for v in vd] for vd in _vertex_coords(R)])
        c = B @ verts.mean(axis=0)
    c = np.asarray(c.c if isinstance(c, ReducedIntegralValues) else c, dtype=float).reshape(-1)
    if B.shape[0] == 0:
        return [c]
    out = [c]
    for j in range(B.shape[0]):
        for d in (-0.05, 0.05):
            cc = c.copy()
            cc[j] += d
            out.append(cc)
    return out


def _vertex_coords(R):
    from .polytope import vertices

    return [v.coordinates for v in vertices(R.polytope)]


@dataclass(frozen=True, eq=False)
class FiberCircle:
    """Fiber piece ``psi^{-1}(t) cap {f~ = c}``: one orbit of the reduced torus."""

    points: np.ndarray      # (m, ..., m, r) over the fiber angle grid
    angles: np.ndarray      # (m, ..., m, n - 1)
    tau: float
    moment: np.ndarray
    base_value: complex
    iterations: int

    def toric_points(self):
        from .toric_space import ToricPoint

        return [ToricPoint(z) for z in self.points.reshape(-1, self.points.shape[-1])]


def solve_fiber_circle(R, D, t, c, resolution, singular=None, margin=None, alpha=None, seed=None):
    """Sample ``resolution`` points per fiber axis over the base value ``t``.

    ``alpha`` is the continuous argument of ``t`` to use (defaults to the
    principal value); ``seed`` is a starting radial parameter for the
    continuation.
    """
    margin = R.tol.margin if margin is None else margin
    singular = singular if singular is not None else singular_values(D, R, c, scan=False)
    _check_margin([t], singular, margin)
    seg = _Segment(R, D, c)
    tau, iters = seg.solve_tau(np.log(abs(t)), seed)
    alpha = np.angle(t) if alpha is None else alpha
    n_fiber = R.n - 1
    _, mesh = _fiber_angles(seg, n_fiber, resolution)
    theta = alpha * seg.w + mesh @ seg.B
    X = np.broadcast_to(seg.moment(tau), theta.shape)
    Z = lift_many(R, X, theta)
    if n_fiber:
        Z = Z.reshape((resolution,) * n_fiber + (R.r,))
        mesh = mesh.reshape((resolution,) * n_fiber + (n_fiber,))
    else:
        Z = Z.reshape(R.r)
    fib = np.max(np.abs(pencil_chart_many(D, Z) - t)) / abs(t)
    red = np.max(np.abs(reduced_integrals(R, D, Z) - seg.c)) if n_fiber else 0.0
    if fib > R.tol.fiber or red > R.tol.level_set:
        raise NumericError(
            "fiber solve missed its constraints",
            {"fiber_residual": float(fib), "level_set_residual": float(red)},
        )
    return FiberCircle(Z, mesh, float(tau), seg.moment(tau), complex(t), iters)


# -- torus samples -----------------------------------------------------------

@dataclass(eq=False)
class TorusSample:
    """A sampled lagrangian torus on a periodic parameter grid.

    ``points`` has shape ``(*grid, r)``. ``kind`` is ``"pencil"`` for the
    loop construction (axis 0 is the loop parameter ``s``, the rest are fiber
    angles) or ``"moment_fiber"`` for an orbit of the full torus over one
    moment value (all axes are coordinate angles).
    """

    kind: str
    reduction: object
    points: np.ndarray
    axes: list
    pencil: object = None
    loop: object = None
    levels: object = None
    base_values: np.ndarray = None
    tau: np.ndarray = None
    moment_value: np.ndarray = None
    holonomy: np.ndarray = None
    loop_class: object = None
    singular: list = field(default_factory=list)
    frames: np.ndarray = None
    residual_table: np.ndarray = None
    fd_order: int = DEFAULT_FD_ORDER

    @property
    def grid_shape(self):
        return self.points.shape[:-1]

    @property
    def dimension(self):
        return len(self.axes)

    def complete(self):
        return (
            self.points is not None
            and self.points.ndim == self.dimension + 1
            and np.all(np.isfinite(self.points))
        )

    def param_grid(self):
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack(mesh, axis=-1)


def _extend_axis(T, Z, axis, p):
    """Pad ``Z`` periodically by ``p`` slices along ``axis``.

    The loop axis of a pencil torus closes up only after shifting the fiber
    angles by the holonomy, so its ghost slices are flowed accordingly.
    """
    lo = np.take(Z, range(Z.shape[axis] - p, Z.shape[axis]), axis=axis)
    hi = np.take(Z, range(p), axis=axis)
    if T.kind == "pencil" and axis == 0 and T.holonomy is not None and np.any(T.holonomy != 0):
        R = T.reduction
        for j, b in enumerate(T.pencil.reduced_basis):
            w = R.section_weights(b)
            lo = lo * np.exp(-1j * T.holonomy[j] * w)
            hi = hi * np.exp(1j * T.holonomy[j] * w)
    return np.concatenate([lo, Z, hi], axis=axis)


def central_difference(T, Z, axis, order):
    coeffs = FD_COEFFS[order]
    p = len(coeffs)
    if Z.shape[axis] < 2 * p + 1:
        raise IncompleteSampleError(f"axis {axis} has too few samples for order-{order} differences")
    E = _extend_axis(T, Z, axis, p)
    L = Z.shape[axis]
    h = T.axes[axis][1] - T.axes[axis][0]
    out = np.zeros_like(Z)
    for k, ck in enumerate(coeffs, start=1):
        fwd = np.take(E, range(p + k, p + k + L), axis=axis)
        bwd = np.take(E, range(p - k, p - k + L), axis=axis)
        out = out + ck * (fwd - bwd)
    return out / h


def tangent_frames(T, order=None):
    """Horizontal finite-difference frames, shape ``(*grid, dim, r)``."""
    order = order or T.fd_order
    Z = T.points
    frames = [horizontal_many(T.reduction, Z, central_difference(T, Z, ax, order)) for ax in range(T.dimension)]
    return np.stack(frames, axis=-2)


def _omega_table(frames):
    d = frames.shape[-2]
    if d < 2:
        return np.zeros(frames.shape[:-2])
    vals = []
    for i in range(d):
        for j in range(i + 1, d):
            vals.append(np.abs(omega_many(frames[..., i, :], frames[..., j, :])))
    return np.max(np.stack(vals, axis=-1), axis=-1)


def _frame_singular_values(frames):
    real = np.concatenate([frames.real, frames.imag], axis=-1)  # (..., d, 2r)
    return np.linalg.svd(real, compute_uv=False)[..., -1]


def build_torus(R, D, loop, c, resolution=(64, 64), fd_order=DEFAULT_FD_ORDER, margin=None, scan=True):
    """Sample the torus over ``loop`` at reduced-integral values ``c``."""
    if not pencil_weights_balanced(R, D):
        raise StructureError("pencil is not gauge invariant")
    if isinstance(resolution, int):
        resolution = (resolution, resolution)
    S = int(resolution[0])
    m = int(resolution[1]) if len(resolution) > 1 else S
    n_fiber = R.n - 1
    margin = R.tol.margin if margin is None else margin
    c = c if isinstance(c, ReducedIntegralValues) else ReducedIntegralValues(np.atleast_1d(c))
    singular = singular_values(D, R, c, scan=scan)
    loop_s = LoopSpec(**{**loop.__dict__, "samples": S})
    s, gamma = loop_s.sample()
    _check_margin(gamma, singular, margin)
    seg = _Segment(R, D, c)
    alpha = np.unwrap(np.angle(gamma))

    taus = np.empty(S)
    seed = None
    for k in range(S):
        taus[k], _ = seg.solve_tau(np.log(abs(gamma[k])), seed)
        seed = taus[k]
    # continue once more around the loop to read off the holonomy
    tau_end, _ = seg.solve_tau(np.log(abs(gamma[0])), seed)
    alpha_end = alpha[-1] + np.angle(gamma[0] / gamma[-1])
    if abs(tau_end - taus[0]) > 1e-9 * max(1.0, abs(taus[0])):
        raise NumericError(
            "continuation does not close after one loop",
            {"slice": 0, "tau_start": float(taus[0]), "tau_end": float(tau_end)},
        )
    holonomy = _holonomy(seg, alpha[0], alpha_end, n_fiber)

    betas = 2 * np.pi * np.arange(m) / m
    if n_fiber:
        mesh = np.stack(np.meshgrid(*([betas] * n_fiber), indexing="ij"), axis=-1)
        theta = alpha[(slice(None),) + (None,) * n_fiber + (None,)] * seg.w + (mesh @ seg.B)[None]
        X = seg.moment(taus)[(slice(None),) + (None,) * n_fiber + (slice(None),)]
        X = np.broadcast_to(X, theta.shape)
    else:
        theta = alpha[:, None] * seg.w
        X = seg.moment(taus)
    Z = lift_many(R, X, theta)
    T = TorusSample(
        kind="pencil",
        reduction=R,
        points=Z,
        axes=[s] + [betas] * n_fiber,
        pencil=D,
        loop=loop_s,
        levels=c,
        base_values=gamma,
        tau=taus,
        holonomy=holonomy,
        singular=singular,
        fd_order=fd_order,
    )
    T.loop_class = classify_loop(loop_s, singular)
    T.frames = tangent_frames(T, fd_order)
    T.residual_table = _omega_table(T.frames)
    return T


def _holonomy(seg, alpha0, alpha_end, n_fiber):
    """Fiber-angle shift relating the continued slice at ``s = 2 pi`` to slice 0."""
    dtheta = (alpha_end - alpha0) * seg.w
    basis = np.vstack([seg.w, seg.B]).T if n_fiber else seg.w[:, None]
    coords = np.linalg.solve(basis, dtheta) if n_fiber else np.array([np.dot(seg.a, dtheta)])
    k = coords[0] / (2 * np.pi)
    if abs(k - round(k)) > 1e-9:
        raise NumericError("loop does not close in the pencil base", {"winding_estimate": float(k)})
    h = coords[1:]
    return (h + np.pi) % (2 * np.pi) - np.pi


def moment_fiber_torus(R, x, resolution=64, fd_order=DEFAULT_FD_ORDER):
    """Orbit of the full torus over an interior moment value ``x``."""
    x = np.asarray(x, dtype=float)
    if np.any(slacks(R, x) <= 0):
        raise InfeasibleError("moment value is not interior", constraint="interior")
    ang = 2 * np.pi * np.arange(resolution) / resolution
    mesh = np.stack(np.meshgrid(*([ang] * R.n), indexing="ij"), axis=-1)
    Z = lift_many(R, np.broadcast_to(x, mesh.shape), mesh)
    T = TorusSample(
        kind="moment_fiber",
        reduction=R,
        points=Z,
        axes=[ang] * R.n,
        moment_value=x,
        fd_order=fd_order,
    )
    T.frames = tangent_frames(T, fd_order)
    T.residual_table = _omega_table(T.frames)
    return T


def constraint_residuals(T):
    """Per-node constraint residuals keyed by constraint name."""
    R = T.reduction
    out = {"level": level_residual_many(R, T.points)}
    if T.kind == "pencil":
        target = T.base_values[(slice(None),) + (None,) * (T.dimension - 1)]
        psi = pencil_chart_many(T.pencil, T.points)
        out["fiber"] = np.abs(psi - target) / np.abs(target)
        if T.dimension > 1:
            red = reduced_integrals(R, T.pencil, T.points)
            out["level_set"] = np.max(np.abs(red - np.asarray(T.levels.c)), axis=-1)
    else:
        X, _ = moment_many(R, T.points)
        out["moment"] = np.max(np.abs(X - T.moment_value), axis=-1)
    return out


def verify_lagrangian(T, tol=None, rank_tol=None, fd_order=None):
    """Recompute frames from the sampled points and test ``omega = 0``."""
    if not T.complete():
        raise IncompleteSampleError("torus sample is incomplete")
    R = T.reduction
    tol = R.tol.lagrangian if tol is None else tol
    rank_tol = R.tol.rank if rank_tol is None else rank_tol
    frames = tangent_frames(T, fd_order)
    table = _omega_table(frames)
    sv = _frame_singular_values(frames)
    cons = constraint_residuals(T)
    limits = {"level": R.tol.level, "fiber": R.tol.fiber, "level_set": R.tol.level_set, "moment": R.tol.level_set}
    return VerificationReport.from_tables(
        omega=table,
        singular=sv,
        constraints=cons,
        tol=tol,
        rank_tol=rank_tol,
        constraint_limits={k: limits[k] for k in cons},
        dimension=T.dimension,
        expected_dimension=R.n,
    )


@dataclass(frozen=True)
class PeriodReport:
    periods: tuple
    discretization: tuple
    loops: tuple

    def to_dict(self):
        return {
            "periods": list(self.periods),
            "discretization_estimate": list(self.discretization),
            "loops": list(self.loops),
        }


def _loop_action(Z_loop):
    """Trapezoid integral of ``sum_i |z_i|^2 / 2 dphi_i`` around a closed sampled loop."""
    nxt = np.roll(Z_loop, -1, axis=0)
    dphi = np.angle(nxt / Z_loop)
    rho = 0.25 * (np.abs(Z_loop) ** 2 + np.abs(nxt) ** 2)
    return float(np.sum(rho * dphi))


def action_periods(T):
    """Action of the basis loops along each grid axis (through node 0)."""
    if not T.complete():
        raise IncompleteSampleError("torus sample is incomplete")
    if T.kind == "pencil" and T.loop.kind == "circle" and T.loop.radius == 0:
        raise StructureError("constant loop")
    periods, est, names = [], [], []
    for ax in range(T.dimension):
        idx = [0] * T.dimension
        idx[ax] = slice(None)
        Z = T.points[tuple(idx)]
        if T.kind == "pencil" and ax == 0 and T.holonomy is not None and np.any(T.holonomy != 0):
            raise StructureError("loop with nonzero holonomy is not closed in the sample")
        full = _loop_action(Z)
        half = _loop_action(Z[::2])
        periods.append(full)
        est.append(abs(full - half))
        names.append("s" if (T.kind == "pencil" and ax == 0) else f"axis_{ax}")
    return PeriodReport(tuple(periods), tuple(est), tuple(names))


def torus_report(T, report=None, periods=None):
    """JSON-ready summary of a torus build."""
    report = report or verify_lagrangian(T)
    out = {
        "kind": T.kind,
        "grid": list(T.grid_shape),
        "fd_order": T.fd_order,
        "reduction": T.reduction.to_dict(),
        "tolerances": T.reduction.tol.to_dict(),
        "verification": report.to_dict(),
    }
    if T.kind == "pencil":
        out.update(
            pencil=T.pencil.to_dict(),
            loop=T.loop.to_dict(),
            levels=list(T.levels.c),
            singular_values=[sv.to_dict() for sv in T.singular],
            classification=T.loop_class.to_dict(),
            holonomy=[float(h) for h in T.holonomy],
            radial_range=[float(np.min(T.tau)), float(np.max(T.tau))],
        )
    else:
        out["moment_value"] = [float(v) for v in T.moment_value]
    if periods is None:
        try:
            periods = action_periods(T)
        except StructureError:
            periods = None
    if periods is not None:
        out["action_periods"] = periods.to_dict()
    return out


def export_cloud(T, path, report_table=None):
    """Write the CSV point cloud ``s,theta_1..,re_z1,im_z1,..,omega_residual``."""
    table = T.residual_table if report_table is None else report_table
    params = T.param_grid().reshape(-1, T.dimension)
    Z = T.points.reshape(-1, T.points.shape[-1])
    res = np.asarray(table).reshape(-1)
    if T.kind == "pencil":
        head = ["s"] + [f"theta_{j + 1}" for j in range(T.dimension - 1)]
    else:
        head = [f"theta_{j + 1}" for j in range(T.dimension)]
    head += [f"{p}_z{i + 1}" for i in range(Z.shape[1]) for p in ("re", "im")]
    head.append("omega_residual")
    cols = [params] + [np.stack([Z.real, Z.imag], axis=-1).reshape(len(Z), -1), res[:, None]]
    data = np.hstack(cols)
    np.savetxt(path, data, delimiter=",", header=",".join(head), comments="", fmt="%.12g")
