"""Exact integer linear algebra: Hermite and Smith normal forms, saturated
kernels and cokernels of maps between free abelian groups.

Matrices are numpy arrays with ``dtype=object`` holding Python ints, so all
arithmetic is arbitrary precision. Nothing here touches floating point.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import gcd

import numpy as np

from .errors import StructureError


def as_int_matrix(M):
    """Return a 2-D object array of Python ints, copying the input."""
    A = np.array(M, dtype=object)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if A.ndim != 2 or A.shape[0] == 0 or A.shape[1] == 0:
        raise StructureError(f"expected a nonempty 2-D integer matrix, got shape {A.shape}")
    out = np.empty(A.shape, dtype=object)
    for idx, v in np.ndenumerate(A):
        if isinstance(v, Fraction):
            if v.denominator != 1:
                raise StructureError(f"non-integer entry {v}")
            v = v.numerator
        iv = int(v)
        if iv != v:
            raise StructureError(f"non-integer entry {v}")
        out[idx] = iv
    return out


def identity(n):
    I = np.zeros((n, n), dtype=object)
    for i in range(n):
        I[i, i] = 1
    return I


def matmul(A, B):
    """Exact product of two object matrices."""
    A = np.asarray(A, dtype=object)
    B = np.asarray(B, dtype=object)
    out = np.empty((A.shape[0], B.shape[1]), dtype=object)
    for i in range(A.shape[0]):
        for j in range(B.shape[1]):
            out[i, j] = sum((A[i, k] * B[k, j] for k in range(A.shape[1])), 0)
    return out


def det(M):
    """Exact determinant of a square integer matrix (Bareiss elimination)."""
    A = [list(map(int, row)) for row in np.asarray(M, dtype=object)]
    n = len(A)
    if n == 0:
        return 1
    if any(len(row) != n for row in A):
        raise StructureError("determinant of a non-square matrix")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def rank(M):
    """Rank over the rationals."""
    A = [[Fraction(int(v)) for v in row] for row in np.asarray(M, dtype=object)]
    rows, cols = len(A), len(A[0]) if A else 0
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        for i in range(rows):
            if i != r and A[i][c] != 0:
                f = A[i][c] / A[r][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        r += 1
        if r == rows:
            break
    return r


def hermite_normal_form(M):
    """Row-style Hermite normal form.

    Returns ``(H, U)`` with ``U`` unimodular and ``U @ M == H``. Pivots of
    ``H`` are positive and entries above a pivot lie in ``[0, pivot)``;
    zero rows sit at the bottom.
    """
    H = as_int_matrix(M)
    m, n = H.shape
    U = identity(m)
    p = 0
    for col in range(n):
        if p == m:
            break
        while True:
            nz = [i for i in range(p, m) if H[i, col] != 0]
            if not nz:
                break
            k = min(nz, key=lambda i: abs(H[i, col]))
            if k != p:
                H[[p, k]] = H[[k, p]]
                U[[p, k]] = U[[k, p]]
            clean = True
            for i in range(p + 1, m):
                q = H[i, col] // H[p, col]
                if q:
                    H[i] = H[i] - q * H[p]
                    U[i] = U[i] - q * U[p]
                if H[i, col] != 0:
                    clean = False
            if clean:
                break
        if H[p, col] == 0:
            continue
        if H[p, col] < 0:
            H[p] = -H[p]
            U[p] = -U[p]
        for i in range(p):
            q = H[i, col] // H[p, col]
            if q:
                H[i] = H[i] - q * H[p]
                U[i] = U[i] - q * U[p]
        p += 1
    return H, U


def smith_normal_form(M):
    """Smith normal form with explicit transforms.

    Returns ``(S, U, V)`` with ``U``, ``V`` unimodular and ``U @ M @ V == S``,
    where ``S`` is diagonal, nonnegative, and each diagonal entry divides the
    next.
    """
    S = as_int_matrix(M)
    m, n = S.shape
    U = identity(m)
    V = identity(n)

    def swap_rows(a, b):
        if a != b:
            S[[a, b]] = S[[b, a]]
            U[[a, b]] = U[[b, a]]

    def swap_cols(a, b):
        if a != b:
            S[:, [a, b]] = S[:, [b, a]]
            V[:, [a, b]] = V[:, [b, a]]

    for t in range(min(m, n)):
        while True:
            block = [(abs(S[i, j]), i, j) for i in range(t, m) for j in range(t, n) if S[i, j] != 0]
            if not block:
                return S, U, V
            _, i0, j0 = min(block)
            swap_rows(t, i0)
            swap_cols(t, j0)
            piv = S[t, t]
            for i in range(t + 1, m):
                q = S[i, t] // piv
                if q:
                    S[i] = S[i] - q * S[t]
                    U[i] = U[i] - q * U[t]
            for j in range(t + 1, n):
                q = S[t, j] // piv
                if q:
                    S[:, j] = S[:, j] - q * S[:, t]
                    V[:, j] = V[:, j] - q * V[:, t]
            if any(S[i, t] != 0 for i in range(t + 1, m)) or any(S[t, j] != 0 for j in range(t + 1, n)):
                continue
            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if S[i, j] % piv != 0),
                None,
            )
            if bad is None:
                break
            # pull a non-divisible row into the pivot row and reduce again
            S[t] = S[t] + S[bad]
            U[t] = U[t] + U[bad]
        if S[t, t] < 0:
            S[t] = -S[t]
            U[t] = -U[t]
    return S, U, V


def diagonal(S):
    return [S[i, i] for i in range(min(S.shape))]


def integer_kernel(M):
    """Saturated basis of ``{x in Z^cols : M x = 0}``, returned as columns.

    The basis comes from the unimodular transform of an HNF of ``M.T``, so it
    spans a saturated lattice; it is then put in row-HNF for a canonical
    choice. A trivial kernel gives a ``cols x 0`` matrix.
    """
    A = as_int_matrix(M)
    H, U = hermite_normal_form(A.T)
    zero_rows = [i for i in range(H.shape[0]) if all(v == 0 for v in H[i])]
    if not zero_rows:
        return np.empty((A.shape[1], 0), dtype=object)
    K = U[zero_rows]
    K, _ = hermite_normal_form(K)
    return K.T.copy()


def maximal_minors_gcd(K):
    """gcd of the maximal minors of a matrix with at least as many rows as columns."""
    K = np.asarray(K, dtype=object)
    rows, cols = K.shape
    if cols == 0:
        return 1
    g = 0
    for sel in combinations(range(rows), cols):
        g = gcd(g, abs(det(K[list(sel)])))
        if g == 1:
            return 1
    return g


def is_saturated(K):
    """True when the columns of ``K`` span a saturated sublattice of ``Z^rows``."""
    K = np.asarray(K, dtype=object)
    if K.shape[1] == 0:
        return True
    return rank(K) == K.shape[1] and maximal_minors_gcd(K) == 1


def saturate(K):
    """Columns spanning the saturation of the column lattice of ``K``."""
    K = as_int_matrix(K)
    # saturation = integer kernel of the integer kernel of K^T
    perp = integer_kernel(K.T)
    if perp.shape[1] == 0:
        return identity(K.shape[0])
    return integer_kernel(perp.T)


def solve_unimodular_section(A):
    """Integer ``L`` with ``A @ L == I`` for a surjective integer map ``A``.

    Raises ``StructureError`` if ``A`` is not surjective onto ``Z^rows``.
    """
    A = as_int_matrix(A)
    S, U, V = smith_normal_form(A)
    m = A.shape[0]
    if any(S[i, i] != 1 for i in range(m)):
        raise StructureError("map is not surjective over the integers")
    # A = U^-1 S V^-1, so A (V S^+ U) = I with S^+ the n x m pseudo-inverse
    Splus = np.zeros((A.shape[1], m), dtype=object)
    for i in range(m):
        Splus[i, i] = 1
    return matmul(matmul(V, Splus), U)


@dataclass(frozen=True)
class AbelianGroupStructure:
    """Finitely generated abelian group ``Z^free_rank + sum Z/d_i``.

    ``projection`` maps ``Z^r`` onto it: the first ``free_rank`` rows give
    free coordinates, the remaining rows give torsion coordinates read
    modulo the matching entry of ``torsion``.
    """

    free_rank: int
    torsion: tuple
    projection: np.ndarray

    def project(self, v):
        """Coordinates of the class of ``v`` (free part exact, torsion reduced)."""
        v = np.asarray(v, dtype=object).reshape(-1, 1)
        raw = matmul(self.projection, v).ravel()
        free = [int(x) for x in raw[: self.free_rank]]
        tors = [int(x) % d for x, d in zip(raw[self.free_rank:], self.torsion)]
        return tuple(free + tors)

    def is_zero(self, coords):
        return all(c == 0 for c in coords[: self.free_rank]) and all(
            c % d == 0 for c, d in zip(coords[self.free_rank:], self.torsion)
        )


def cokernel_structure(M):
    """Structure of ``Z^r / M Z^n`` for an ``r x n`` integer matrix ``M``."""
    A = as_int_matrix(M)
    r = A.shape[0]
    S, U, _ = smith_normal_form(A)
    d = diagonal(S)
    rk = sum(1 for x in d if x != 0)
    torsion_idx = [i for i, x in enumerate(d) if x > 1]
    free_rows = U[rk:r]
    if free_rows.shape[0]:
        free_rows, _ = hermite_normal_form(free_rows)
    tors_rows = U[torsion_idx] if torsion_idx else np.empty((0, r), dtype=object)
    for k, i in enumerate(torsion_idx):
        tors_rows[k] = np.array([int(x) % d[i] for x in tors_rows[k]], dtype=object)
    projection = np.vstack([free_rows, tors_rows]) if len(tors_rows) else free_rows
    if projection.shape[0] == 0:
        projection = np.empty((0, r), dtype=object)
    return AbelianGroupStructure(
        free_rank=r - rk,
        torsion=tuple(int(d[i]) for i in torsion_idx),
        projection=projection,
    )
