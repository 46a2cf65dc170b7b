"""Mironov cycles: real part of a variety swept by a subtorus.

Three ambient models are instantiated in explicit coordinates:

* ``affine``: C^n with the flat form, moments ``sum_j w_j |z_j|^2 / 2``;
* ``projective``: CP^n as unit vectors of C^{n+1} modulo phase, moments
  ``sum_j w_j |z_j|^2 / |z|^2``;
* ``grassmann``: Gr(2, 4) as unit Pluecker vectors in C^6 (order
  ``p12, p13, p14, p23, p24, p34``) on the quadric
  ``p12 p34 - p13 p24 + p14 p23 = 0``; a weight ``w`` on C^4 acts on ``p_jk``
  with weight ``w_j + w_k``.

The real structure is coordinatewise conjugation in every model. A cycle is
``T^k(S_R)`` where ``S_R`` is the real locus cut by ``k`` moment levels.
"""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.spatial import cKDTree

from . import lattice
from .config import DEFAULT_TOLERANCES, worker_count
from .errors import IncompleteSampleError, InfeasibleError, ModelError, StructureError
from .report import VerificationReport

PLUCKER_PAIRS = tuple(combinations(range(4), 2))
PLUCKER_NAMES = tuple(f"p{j + 1}{k + 1}" for j, k in PLUCKER_PAIRS)

TOPOLOGY_NOTE = (
    "bundle topology of the cycle is not verified; checks cover dimension, "
    "frame rank, lagrangian residuals and the collision census"
)


def plucker_quadric(P):
    P = np.asarray(P)
    return P[..., 0] * P[..., 5] - P[..., 1] * P[..., 4] + P[..., 2] * P[..., 3]


def plucker_quadric_gradient(P):
    P = np.asarray(P)
    return np.stack([P[..., 5], -P[..., 4], P[..., 3], P[..., 2], -P[..., 1], P[..., 0]], axis=-1)


def plucker_embed(M, normalize=True):
    """Unit Pluecker vector of the row span of a 2x4 matrix (rank 2 required)."""
    M = np.asarray(M)
    if M.shape[-2:] != (2, 4):
        raise StructureError(f"expected a 2x4 matrix, got shape {M.shape}")
    if np.any(np.linalg.matrix_rank(M) < 2):
        raise ModelError("matrix has rank < 2; no Pluecker point")
    p = np.stack([M[..., 0, j] * M[..., 1, k] - M[..., 0, k] * M[..., 1, j] for j, k in PLUCKER_PAIRS], axis=-1)
    if normalize:
        p = p / np.linalg.norm(p, axis=-1, keepdims=True)
    return p


@dataclass(frozen=True)
class AmbientModel:
    kind: str   # affine | projective | grassmann
    n: int      # complex dimension of X

    def __post_init__(self):
        if self.kind not in ("affine", "projective", "grassmann"):
            raise StructureError(f"unknown ambient model {self.kind!r}")
        if self.kind == "grassmann" and self.n != 4:
            raise StructureError("only Gr(2, 4) is modelled")
        if self.n < 1:
            raise StructureError("dimension must be positive")

    @classmethod
    def parse(cls, text):
        """``cn:N``, ``cpN`` / ``cp:N`` or ``gr24``."""
        t = text.strip().lower()
        if t == "gr24":
            return cls("grassmann", 4)
        for prefix, kind in (("cn", "affine"), ("cp", "projective")):
            if t.startswith(prefix):
                rest = t[len(prefix):].lstrip(":")
                if rest.isdigit():
                    return cls(kind, int(rest))
        raise StructureError(f"cannot parse model {text!r}; use cn:N, cpN or gr24")

    @property
    def name(self):
        return {"affine": f"cn:{self.n}", "projective": f"cp{self.n}", "grassmann": "gr24"}[self.kind]

    @property
    def n_coords(self):
        return {"affine": self.n, "projective": self.n + 1, "grassmann": 6}[self.kind]

    @property
    def weight_length(self):
        return {"affine": self.n, "projective": self.n + 1, "grassmann": 4}[self.kind]

    @property
    def torus_rank(self):
        return {"affine": self.n, "projective": self.n, "grassmann": 3}[self.kind]

    @property
    def compact(self):
        return self.kind != "affine"

    @property
    def n_model_constraints(self):
        return {"affine": 0, "projective": 1, "grassmann": 2}[self.kind]

    def coordinate_names(self):
        if self.kind == "grassmann":
            return list(PLUCKER_NAMES)
        start = 0 if self.kind == "projective" else 1
        return [f"z{i + start}" for i in range(self.n_coords)]

    def coordinate_weights(self, w):
        """Weights on the model coordinates induced by ``w``."""
        w = [int(v) for v in w]
        if len(w) != self.weight_length:
            raise StructureError(f"weight vector {w} must have {self.weight_length} entries")
        if self.kind == "grassmann":
            return np.array([w[j] + w[k] for j, k in PLUCKER_PAIRS], dtype=float)
        return np.array(w, dtype=float)

    # -- torus action and real structure --------------------------------

    def act(self, Wm, theta, Z):
        """Apply ``exp(i sum_m theta_m Wm_m)`` coordinatewise."""
        Wm = np.asarray(Wm, dtype=float).reshape(-1, self.n_coords)
        theta = np.asarray(theta, dtype=float)
        phase = theta @ Wm if Wm.shape[0] else np.zeros(theta.shape[:-1] + (self.n_coords,))
        return np.asarray(Z) * np.exp(1j * phase)

    @staticmethod
    def conjugate(Z):
        return np.conj(Z)

    def commutation_residual(self, Wm, theta, Z):
        """``|conj(torus(theta) z) - torus(-theta) conj(z)|``."""
        theta = np.asarray(theta, dtype=float)
        lhs = self.conjugate(self.act(Wm, theta, Z))
        rhs = self.act(Wm, -theta, self.conjugate(Z))
        return np.max(np.abs(lhs - rhs), axis=-1)

    # -- moments, gauge and form ---------------------------------------

    def moment(self, Wm, Z):
        Wm = np.asarray(Wm, dtype=float).reshape(-1, self.n_coords)
        a = np.abs(np.asarray(Z)) ** 2
        if self.kind == "affine":
            return 0.5 * a @ Wm.T
        return (a @ Wm.T) / np.sum(a, axis=-1, keepdims=True)

    def model_residual(self, Z):
        Z = np.asarray(Z)
        if self.kind == "affine":
            return np.zeros(Z.shape[:-1])
        res = np.abs(np.linalg.norm(Z, axis=-1) - 1.0)
        if self.kind == "grassmann":
            res = np.maximum(res, np.abs(plucker_quadric(Z)))
        return res

    def gauge_fix(self, Z):
        """Unit representative whose largest coordinate is positive real."""
        Z = np.asarray(Z, dtype=complex)
        if self.kind == "affine":
            return Z.copy()
        Z = Z / np.linalg.norm(Z, axis=-1, keepdims=True)
        mod = np.abs(Z)
        # first coordinate within round-off of the maximum, so ties resolve stably
        lead = np.argmax(mod >= np.max(mod, axis=-1, keepdims=True) - 1e-9, axis=-1)
        ph = np.take_along_axis(Z, lead[..., None], axis=-1)
        return Z * (np.conj(ph) / np.abs(ph))

    def horizontal(self, Z, V):
        """Remove the radial and phase components (projective models).

        ``V`` is either a vector at ``Z`` or a stack of vectors (..., d, m).
        """
        V = np.asarray(V, dtype=complex)
        if self.kind == "affine":
            return V
        Z = np.asarray(Z, dtype=complex)
        if V.ndim == Z.ndim + 1:
            Z = Z[..., None, :]
        inner = np.sum(np.conj(Z) * V, axis=-1) / np.sum(np.abs(Z) ** 2, axis=-1)
        return V - inner[..., None] * Z

    def omega(self, Z, U, V):
        """Flat form (affine) or Fubini-Study form on horizontal representatives."""
        U = self.horizontal(Z, U)
        V = self.horizontal(Z, V)
        val = np.sum(np.imag(np.conj(U) * V), axis=-1)
        if self.kind == "affine":
            return val
        return val / np.sum(np.abs(np.asarray(Z)) ** 2, axis=-1)

    # -- real locus ---------------------------------------------------------

    def real_constraints(self, X, Wm, c):
        """Residuals and Jacobians of the equations of ``X_R ∩ {f = c}`` at real ``X``."""
        X = np.asarray(X, dtype=float)
        Wm = np.asarray(Wm, dtype=float).reshape(-1, self.n_coords)
        c = np.asarray(c, dtype=float).reshape(-1)
        g, J = [], []
        if self.kind != "affine":
            g.append(np.sum(X ** 2, axis=-1) - 1.0)
            J.append(2.0 * X)
        if self.kind == "grassmann":
            g.append(plucker_quadric(X))
            J.append(plucker_quadric_gradient(X))
        scale = 0.5 if self.kind == "affine" else 1.0
        for w, cm in zip(Wm, c):
            g.append(scale * np.sum(w * X ** 2, axis=-1) - cm)
            J.append(2.0 * scale * w * X)
        if not g:
            return np.zeros(X.shape[:-1] + (0,)), np.zeros(X.shape[:-1] + (0, self.n_coords))
        return np.stack(g, axis=-1), np.stack(J, axis=-2)

    def to_dict(self):
        return {"kind": self.kind, "n": self.n, "name": self.name}


@dataclass(frozen=True)
class SubtorusSpec:
    weights: tuple    # k integer vectors in the model's weight space
    levels: tuple     # k reals

    def __post_init__(self):
        ws = tuple(tuple(int(v) for v in w) for w in self.weights)
        cs = tuple(float(c) for c in self.levels)
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "levels", cs)
        if len(ws) != len(cs):
            raise StructureError(f"{len(ws)} weight vectors but {len(cs)} levels")
        if len({len(w) for w in ws}) > 1:
            raise StructureError("weight vectors have different lengths")

    @property
    def k(self):
        return len(self.weights)

    def check(self, A):
        """Validate the subtorus against model ``A``; returns coordinate weights (k x m)."""
        for w in self.weights:
            if len(w) != A.weight_length:
                raise StructureError(f"weight {list(w)} must have {A.weight_length} entries for {A.name}")
        if self.k > A.torus_rank:
            raise StructureError(f"rank {self.k} exceeds the torus rank {A.torus_rank} of {A.name}")
        rows = [list(w) for w in self.weights]
        if A.kind != "affine":
            # the diagonal circle acts trivially on the projective models
            rows = rows + [[1] * A.weight_length]
        if rows and lattice.rank(rows) != len(rows):
            raise StructureError("weight vectors are not independent modulo the trivial circle")
        if self.k == 0:
            return np.zeros((0, A.n_coords))
        return np.array([A.coordinate_weights(w) for w in self.weights])

    def to_dict(self):
        return {"weights": [list(w) for w in self.weights], "levels": list(self.levels), "rank": self.k}


@dataclass(eq=False)
class RealLevelSample:
    model: AmbientModel
    spec: SubtorusSpec
    points: np.ndarray        # (N, m) real
    labels: np.ndarray        # (N, d) chart labels used for parameter distances
    tangents: np.ndarray      # (N, n - k, m) real orthonormal tangents of S_R
    residuals: dict
    method: str
    seed: object = None

    @property
    def size(self):
        return self.points.shape[0]

    @property
    def dimension(self):
        return self.tangents.shape[1]


def real_tangents(A, Wm, c, X, rank_tol=None):
    """Orthonormal tangents of ``S_R`` at real points from the constraint Jacobian.

    Returns ``(tangents, smallest constraint singular value)``.
    """
    rank_tol = DEFAULT_TOLERANCES.rank if rank_tol is None else rank_tol
    X = np.asarray(X, dtype=float)
    _, J = A.real_constraints(X, Wm, c)
    n_con = J.shape[-2]
    m = A.n_coords
    if n_con == 0:
        T = np.broadcast_to(np.eye(m), X.shape[:-1] + (m, m)).copy()
        return T, np.full(X.shape[:-1], np.inf)
    _, s, Vt = np.linalg.svd(J)
    smin = s[..., -1]
    return Vt[..., n_con:, :], smin


def _gauss_newton(A, Wm, c, X, tol, maxiter=60):
    X = np.array(X, dtype=float)
    for _ in range(maxiter):
        g, J = A.real_constraints(X, Wm, c)
        if g.shape[-1] == 0 or np.max(np.abs(g)) < tol:
            break
        step = np.einsum("...ij,...j->...i", np.linalg.pinv(J), g)
        X = X - step
    g, _ = A.real_constraints(X, Wm, c)
    return X, (np.max(np.abs(g), axis=-1) if g.shape[-1] else np.zeros(X.shape[:-1]))


def _dedupe(X, tol=1e-8):
    """Drop points within ``tol`` of an earlier point; returns (points, kept indices)."""
    if len(X) == 0:
        return X, np.zeros(0, dtype=int)
    near = cKDTree(X).query_ball_point(X, tol, workers=worker_count())
    keep = [i for i, nb in enumerate(near) if min(nb) == i]
    keep = np.array(keep, dtype=int)
    return X[keep], keep


def _check_range(A, Wm, spec):
    if spec.k != 1:
        return
    c = spec.levels[0]
    w = Wm[0]
    if A.kind == "projective":
        lo, hi = float(np.min(w)), float(np.max(w))
    elif A.kind == "grassmann":
        # trace of a real projection onto a plane against diag(w) on C^4
        ws = np.sort(np.array(spec.weights[0], dtype=float))
        lo, hi = float(ws[0] + ws[1]), float(ws[2] + ws[3])
    else:
        lo = -np.inf if np.any(w < 0) else 0.0
        hi = np.inf if np.any(w > 0) else 0.0
    if not lo < c < hi:
        raise InfeasibleError(
            f"level {c} is not in the open range ({lo}, {hi}) of the moment on the real locus",
            constraint="level_range",
        )


def _finish_sample(A, spec, Wm, X, labels, method, seed, tol):
    X = np.asarray(X, dtype=float)
    if len(X) == 0:
        raise InfeasibleError(f"no real points on the level {list(spec.levels)}", constraint="level_range")
    g, _ = A.real_constraints(X, Wm, spec.levels)
    model_res = A.model_residual(X)
    if A.kind == "grassmann" and np.max(np.abs(plucker_quadric(X))) > tol.level:
        raise ModelError("samples violate the Pluecker quadric")
    T, smin = real_tangents(A, Wm, spec.levels, X, tol.rank)
    if np.any(smin <= tol.rank):
        raise InfeasibleError(
            f"level set is singular at {int(np.sum(smin <= tol.rank))} samples (critical level)",
            constraint="regular_level",
        )
    level_res = np.max(np.abs(g[..., A.n_model_constraints:]), axis=-1) if spec.k else np.zeros(len(X))
    return RealLevelSample(
        model=A,
        spec=spec,
        points=X,
        labels=np.asarray(labels, dtype=float),
        tangents=T,
        residuals={
            "level": float(np.max(level_res)),
            "model": float(np.max(model_res)),
            "min_constraint_singular_value": float(np.min(smin)) if np.all(np.isfinite(smin)) else None,
        },
        method=method,
        seed=seed,
    )


def real_level_set(A, S, resolution=64, seed=0, tol=DEFAULT_TOLERANCES):
    """Sample ``X_R ∩ {f_m = c_m}``; every output point is checked.

    Affine rank-1 levels use rays from the origin (a uniform angle grid when
    ``n = 2``); everything else starts from seeded random real points and is
    projected onto the level by Gauss-Newton along constraint gradients.
    """
    Wm = S.check(A)
    _check_range(A, Wm, S)
    rng = np.random.default_rng(seed)
    m = A.n_coords
    if A.kind == "affine" and S.k == 1:
        if A.n == 2:
            phi = 2 * np.pi * np.arange(resolution) / resolution
            U = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        else:
            U = rng.standard_normal((resolution, m))
            U /= np.linalg.norm(U, axis=-1, keepdims=True)
        q = 0.5 * U ** 2 @ Wm[0]
        ok = q * S.levels[0] > 0
        X = U[ok] * np.sqrt(S.levels[0] / q[ok])[:, None]
        method = "rays"
    elif A.kind == "affine" and S.k == 0:
        X = rng.standard_normal((resolution, m))
        method = "random"
    else:
        if A.kind == "grassmann":
            M = rng.standard_normal((4 * resolution, 2, 4))
            X0 = plucker_embed(M)
        else:
            X0 = rng.standard_normal((4 * resolution, m))
            if A.compact:
                X0 /= np.linalg.norm(X0, axis=-1, keepdims=True)
        X, res = _gauss_newton(A, Wm, S.levels, X0, tol=1e-14)
        X = X[res < tol.level_set * 1e-2]
        if A.compact:
            X = np.real(A.gauge_fix(X))
        X, _ = _dedupe(X)
        X = X[:resolution]
        method = "gauss_newton"
    if A.compact and len(X):
        X = np.real(A.gauge_fix(X))
    return _finish_sample(A, S, Wm, X, X, method, seed, tol)


def grassmann_level1_sample(c, resolution=200, seed=0, tol=DEFAULT_TOLERANCES):
    """``S_R`` for ``f1 = |proj e1|^2`` on Gr_R(2, 4), sampled from the real Stiefel manifold.

    Each random orthonormal pair spans a plane ``Pi``; its first row is rotated
    in the plane spanned by ``proj_Pi e1`` and the normal part of ``e1`` until
    ``f1 = c``. Along that path ``f1 = cos(beta - t)^2`` so the scalar level
    equation is solved exactly.
    """
    A = AmbientModel("grassmann", 4)
    S = SubtorusSpec(weights=((1, 0, 0, 0),), levels=(c,))
    Wm = S.check(A)
    _check_range(A, Wm, S)
    rng = np.random.default_rng(seed)
    rows = []
    while len(rows) < resolution:
        G = rng.standard_normal((4, 2))
        Q, _ = np.linalg.qr(G)
        u, v = Q[:, 0], Q[:, 1]
        s = u[0] * u + v[0] * v
        f0 = float(s @ s)
        if not 1e-6 < f0 < 1 - 1e-6:
            continue
        u1 = s / np.linalg.norm(s)
        v1 = u[0] * v - v[0] * u                    # in the plane, orthogonal to e1
        v1 /= np.linalg.norm(v1)
        nrm = np.eye(4)[0] - s
        nrm /= np.linalg.norm(nrm)
        beta = np.arccos(np.sqrt(f0))
        t = beta - np.arccos(np.sqrt(c))
        rows.append(np.stack([np.cos(t) * u1 + np.sin(t) * nrm, v1]))
    X = np.real(A.gauge_fix(plucker_embed(np.array(rows))))
    return _finish_sample(A, S, Wm, X, X, "stiefel_rotation", seed, tol)


@dataclass(eq=False)
class MironovCycleSample:
    model: AmbientModel
    spec: SubtorusSpec
    base: RealLevelSample
    thetas: np.ndarray        # (T, k) sweep angles
    points: np.ndarray        # (T, N, m) ambient representatives
    frames: np.ndarray        # (T, N, n, m) horizontal tangent frames
    angular_resolution: int
    tol: object = DEFAULT_TOLERANCES
    residual_table: object = None
    report: object = None
    collisions: list = field(default_factory=list)

    @property
    def node_count(self):
        return self.points.shape[0] * self.points.shape[1]

    @property
    def coordinate_weights(self):
        return self.spec.check(self.model)

    def complete(self):
        return (
            self.points.ndim == 3
            and self.points.shape[:2] == (len(self.thetas), self.base.size)
            and bool(np.all(np.isfinite(self.points)))
            and self.frames.shape[:2] == self.points.shape[:2]
        )

    def node_params(self):
        """Flattened ``(theta, label)`` for every node."""
        T, N = self.points.shape[:2]
        th = np.repeat(self.thetas, N, axis=0)
        lab = np.tile(self.base.labels, (T, 1))
        return th, lab


def _theta_grid(k, res):
    if k == 0:
        return np.zeros((1, 0))
    axes = [2 * np.pi * np.arange(res) / res] * k
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)


def _frames(A, Wm, Z, tangents_moved):
    """Sweep vectors ``i W_m * z`` followed by the transported real tangents."""
    sweep = 1j * Z[..., None, :] * Wm
    F = np.concatenate([sweep, tangents_moved], axis=-2)
    return A.horizontal(Z, F)


def torus_sweep(A, S, sr, angular_resolution=64, tol=DEFAULT_TOLERANCES):
    """Apply the rank-k torus on a grid of angles to every ``S_R`` point."""
    Wm = S.check(A)
    thetas = _theta_grid(S.k, angular_resolution)
    phase = np.exp(1j * (thetas @ Wm)) if S.k else np.ones((1, A.n_coords))
    Z = phase[:, None, :] * sr.points[None, :, :]
    Tm = phase[:, None, None, :] * sr.tangents[None, :, :, :]
    F = _frames(A, Wm, Z, Tm)
    return MironovCycleSample(
        model=A,
        spec=S,
        base=sr,
        thetas=thetas,
        points=Z,
        frames=F,
        angular_resolution=angular_resolution if S.k else 0,
        tol=tol,
    )


def _recover_base(A, Wm, thetas, Z):
    """Undo the sweep and the projective phase; returns complex base points."""
    back = np.exp(-1j * (thetas @ Wm)) if Wm.shape[0] else np.ones((len(thetas), A.n_coords))
    back = np.broadcast_to(back[:, None, :], Z.shape)
    X = back * Z
    if A.compact:
        X = X / np.linalg.norm(X, axis=-1, keepdims=True)
        lead = np.argmax(np.abs(X), axis=-1)
        ph = np.take_along_axis(X, lead[..., None], axis=-1)
        X = X * (np.conj(ph) / np.abs(ph))
    return X, back


def cycle_constraints(M):
    """Per-node reality, level and model residuals recomputed from the points."""
    A, Wm = M.model, M.coordinate_weights
    Z = M.points
    X, _ = _recover_base(A, Wm, M.thetas, Z)
    scale = np.maximum(1.0, np.linalg.norm(X, axis=-1))
    out = {"reality": np.max(np.abs(X.imag), axis=-1) / scale}
    if M.spec.k:
        f = A.moment(Wm, Z)
        out["level"] = np.max(np.abs(f - np.array(M.spec.levels)), axis=-1)
    out["model"] = A.model_residual(Z)
    return out


def lagrangian_table(M, rank_tol=None):
    """Per-node ``max |omega|`` and smallest frame singular value.

    Frames are rebuilt from the stored points: the sweep is undone, the real
    base point is recovered, its ``S_R`` tangents are recomputed and carried
    back. A node whose point was disturbed off the cycle therefore shows up
    with a nonzero pairing.
    """
    A, Wm = M.model, M.coordinate_weights
    rank_tol = M.tol.rank if rank_tol is None else rank_tol
    Z = M.points
    X, back = _recover_base(A, Wm, M.thetas, Z)
    # phase taking the recovered base point back to the stored representative
    rel = np.sum(np.conj(X) * back * Z, axis=-1)
    rel = rel / np.where(np.abs(rel) > 0, np.abs(rel), 1.0)
    Tb, _ = real_tangents(A, Wm, M.spec.levels, np.real(X), rank_tol)
    Tm = (rel[..., None] * np.conj(back))[..., None, :] * Tb
    F = _frames(A, Wm, Z, Tm)
    d = F.shape[-2]
    if d >= 2:
        iu, ju = np.triu_indices(d, 1)
        table = np.max(np.abs(A.omega(Z[..., None, :], F[..., iu, :], F[..., ju, :])), axis=-1)
    else:
        table = np.zeros(Z.shape[:-1])
    if d:
        smin = np.linalg.svd(np.concatenate([F.real, F.imag], axis=-1), compute_uv=False)[..., -1]
    else:
        smin = np.zeros(Z.shape[:-1])
    return table, smin, d


def verify_lagrangian_immersion(M, tol=None, rank_tol=None):
    """Check ``omega = 0`` on recomputed frames and frame rank ``dim_C X`` at every node."""
    if not M.complete():
        raise IncompleteSampleError("cycle sample is incomplete")
    tol = M.tol.lagrangian if tol is None else tol
    rank_tol = M.tol.rank if rank_tol is None else rank_tol
    table, smin, d = lagrangian_table(M, rank_tol)
    cons = cycle_constraints(M)
    limits = {"reality": M.tol.reality, "level": M.tol.level, "model": M.tol.level}
    return VerificationReport.from_tables(
        omega=table,
        singular=smin,
        constraints=cons,
        tol=tol,
        rank_tol=rank_tol,
        constraint_limits={k: limits[k] for k in cons},
        dimension=d,
        expected_dimension=M.model.n,
        notes=[TOPOLOGY_NOTE],
    )


def isotropy_residuals(sr):
    """``max |omega|`` over pairs of ``S_R`` tangents (real part isotropy)."""
    A = sr.model
    T = sr.tangents.astype(complex)
    d = T.shape[1]
    if d < 2:
        return np.zeros(sr.size)
    iu, ju = np.triu_indices(d, 1)
    Z = sr.points.astype(complex)
    return np.max(np.abs(A.omega(Z[:, None, :], T[:, iu, :], T[:, ju, :])), axis=-1)


@dataclass(frozen=True)
class CollisionRecord:
    nodes: tuple              # flat node indices in the cluster
    ambient_distance: float   # largest pairwise chart distance inside the cluster
    parameter_distance: float # smallest pairwise parameter distance inside the cluster
    kind: str                 # cover | transverse

    def to_dict(self):
        return {
            "nodes": list(self.nodes),
            "ambient_distance": self.ambient_distance,
            "parameter_distance": self.parameter_distance,
            "kind": self.kind,
        }


def _torus_distance(a, b):
    d = np.abs(np.asarray(a) - np.asarray(b)) % (2 * np.pi)
    d = np.minimum(d, 2 * np.pi - d)
    return np.sqrt(np.sum(d ** 2, axis=-1))


def parameter_distance(theta_a, label_a, theta_b, label_b):
    return np.hypot(_torus_distance(theta_a, theta_b), np.linalg.norm(np.asarray(label_a) - np.asarray(label_b), axis=-1))


def _same_tangent_space(A, Za, Fa, Zb, Fb, tangent_tol):
    if A.compact:
        ph = np.vdot(Zb, Za)
        Fb = Fb * (ph / abs(ph))
    Ra = np.concatenate([Fa.real, Fa.imag], axis=-1).T
    Rb = np.concatenate([Fb.real, Fb.imag], axis=-1).T
    Qa, _ = np.linalg.qr(Ra)
    Qb, _ = np.linalg.qr(Rb)
    cos = np.linalg.svd(Qa.T @ Qb, compute_uv=False)
    return float(np.sqrt(max(0.0, 1.0 - np.min(cos) ** 2))) < tangent_tol


def self_intersection_scan(M, eps_ambient=None, eps_param=None, tangent_tol=1e-3):
    """Clusters of nodes that meet in X but are far apart in parameters.

    Chart coordinates are gauge fixed for the projective models. A cluster is
    a ``cover`` when all members share one tangent plane (the sweep double
    counts a sheet) and ``transverse`` otherwise.
    """
    if not M.complete():
        raise IncompleteSampleError("cycle sample is incomplete")
    A = M.model
    eps_ambient = DEFAULT_TOLERANCES.eps_ambient if eps_ambient is None else eps_ambient
    eps_param = DEFAULT_TOLERANCES.eps_param if eps_param is None else eps_param
    Z = M.points.reshape(-1, A.n_coords)
    F = M.frames.reshape(len(Z), -1, A.n_coords)
    G = A.gauge_fix(Z)
    chart = np.concatenate([G.real, G.imag], axis=-1)
    th, lab = M.node_params()
    tree = cKDTree(chart)
    pairs = tree.query_pairs(eps_ambient, output_type="ndarray")
    if len(pairs):
        pd = parameter_distance(th[pairs[:, 0]], lab[pairs[:, 0]], th[pairs[:, 1]], lab[pairs[:, 1]])
        pairs = pairs[pd > eps_param]
    parent = np.arange(len(Z))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    clusters = {}
    for a, b in pairs:
        clusters.setdefault(find(a), []).append((int(a), int(b)))
    records = []
    for root in sorted(clusters):
        plist = clusters[root]
        nodes = sorted({i for p in plist for i in p})
        idx = np.array(nodes)
        amb = float(np.max(np.linalg.norm(chart[idx][:, None] - chart[idx][None], axis=-1)))
        pd = min(
            float(parameter_distance(th[a], lab[a], th[b], lab[b])) for a, b in plist
        )
        cover = all(_same_tangent_space(A, G[a], F[a], G[b], F[b], tangent_tol) for a, b in plist)
        records.append(CollisionRecord(tuple(nodes), amb, pd, "cover" if cover else "transverse"))
    return records


def collision_census(records, n_nodes):
    sizes = {}
    for r in records:
        sizes[len(r.nodes)] = sizes.get(len(r.nodes), 0) + 1
    involved = sum(len(r.nodes) for r in records)
    return {
        "n_clusters": len(records),
        "cluster_sizes": {str(k): v for k, v in sorted(sizes.items())},
        "n_cover": sum(r.kind == "cover" for r in records),
        "n_transverse": sum(r.kind == "transverse" for r in records),
        "nodes_involved": involved,
        "n_nodes": n_nodes,
    }


def build_cycle(A, S, resolution=64, angular_resolution=64, seed=0, tol=DEFAULT_TOLERANCES, scan=True):
    """``real_level_set`` + ``torus_sweep`` + verification (+ collision scan)."""
    sr = real_level_set(A, S, resolution, seed=seed, tol=tol)
    return _finish_cycle(A, S, sr, angular_resolution, tol, scan)


def _finish_cycle(A, S, sr, angular_resolution, tol, scan):
    M = torus_sweep(A, S, sr, angular_resolution, tol=tol)
    M.report = verify_lagrangian_immersion(M)
    M.residual_table = lagrangian_table(M)[0]
    if scan:
        M.collisions = self_intersection_scan(M, tol.eps_ambient, tol.eps_param)
    return M


def grassmann_cycle_level1(c, resolutions=(200, 64), seed=0, tol=DEFAULT_TOLERANCES, scan=False):
    """Mironov cycle of the weight-1 circle on the first C^4 coordinate of Gr(2, 4)."""
    A = AmbientModel("grassmann", 4)
    S = SubtorusSpec(weights=((1, 0, 0, 0),), levels=(c,))
    n_base, n_angle = resolutions
    sr = grassmann_level1_sample(c, n_base, seed=seed, tol=tol)
    return _finish_cycle(A, S, sr, n_angle, tol, scan)


def cycle_report(M):
    rep = M.report or verify_lagrangian_immersion(M)
    sr = M.base
    out = {
        "model": M.model.to_dict(),
        "subtorus": M.spec.to_dict(),
        "real_level_set": {
            "method": sr.method,
            "samples": sr.size,
            "dimension": sr.dimension,
            "seed": sr.seed,
            "residuals": sr.residuals,
        },
        "angular_resolution": M.angular_resolution,
        "nodes": M.node_count,
        "verification": rep.to_dict(),
        "collision_census": collision_census(M.collisions, M.node_count),
        "collisions": [r.to_dict() for r in M.collisions[:50]],
    }
    if M.spec.k == 0:
        out["real_part_isotropy"] = float(np.max(isotropy_residuals(sr))) if sr.size else 0.0
    return out


def export_cycle(M, path):
    """CSV: ``theta_1..theta_k,sample,<re/im of model coordinates>[,quadric_residual],omega_residual``."""
    A = M.model
    th, _ = M.node_params()
    N = M.base.size
    sample = np.tile(np.arange(N), len(M.thetas))[:, None]
    Z = A.gauge_fix(M.points.reshape(-1, A.n_coords))
    head = [f"theta_{j + 1}" for j in range(M.spec.k)] + ["sample"]
    head += [f"{p}_{name}" for name in A.coordinate_names() for p in ("re", "im")]
    cols = [th, sample, np.stack([Z.real, Z.imag], axis=-1).reshape(len(Z), -1)]
    if A.kind == "grassmann":
        head.append("quadric_residual")
        cols.append(np.abs(plucker_quadric(Z))[:, None])
    res = M.residual_table if M.residual_table is not None else lagrangian_table(M)[0]
    head.append("omega_residual")
    cols.append(np.asarray(res).reshape(-1, 1))
    np.savetxt(path, np.hstack(cols), delimiter=",", header=",".join(head), comments="", fmt="%.12g")
