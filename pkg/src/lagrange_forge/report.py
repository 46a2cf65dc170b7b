"""Verification reports and JSON output helpers."""

import json
import math
from dataclasses import dataclass, field

import numpy as np


def round_sig(x, digits=12):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return str(x)
    if x == 0:
        return 0.0
    return float(f"{x:.{digits}g}")


def rounded(obj, digits=12):
    """Recursively round floats to ``digits`` significant digits."""
    if isinstance(obj, dict):
        return {str(k): rounded(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [rounded(v, digits) for v in obj]
    if isinstance(obj, np.ndarray):
        return rounded(obj.tolist(), digits)
    if isinstance(obj, (float, int, np.floating, np.integer, bool, np.bool_)):
        return round_sig(obj, digits)
    if isinstance(obj, complex):
        return [round_sig(obj.real, digits), round_sig(obj.imag, digits)]
    return obj


def dumps(obj):
    return json.dumps(rounded(obj), indent=2, sort_keys=True)


def residual_histogram(values, lo=-17, hi=1):
    """Counts of ``values`` per decade, keyed ``"1e-17".."1e0"``; zeros go in the first bin."""
    v = np.asarray(values, dtype=float).ravel()
    with np.errstate(divide="ignore"):
        exps = np.floor(np.log10(np.where(v > 0, v, 10.0 ** lo)))
    exps = np.clip(exps, lo, hi - 1).astype(int)
    counts = {}
    for e in range(lo, hi):
        k = int(np.sum(exps == e))
        if k:
            counts[f"1e{e}"] = k
    return counts


@dataclass
class VerificationReport:
    passed: bool
    tol: float
    max_residual: float
    mean_residual: float
    worst_node: tuple
    histogram: dict
    rank_tol: float
    min_singular_value: float
    rank_ok: bool
    dimension: int
    expected_dimension: int
    constraints: dict = field(default_factory=dict)
    failing_nodes: list = field(default_factory=list)
    n_failing: int = 0
    n_nodes: int = 0
    notes: list = field(default_factory=list)

    @classmethod
    def from_tables(cls, omega, singular, constraints, tol, rank_tol, constraint_limits,
                    dimension, expected_dimension, notes=()):
        omega = np.asarray(omega, dtype=float)
        singular = np.asarray(singular, dtype=float)
        bad = omega >= tol
        bad |= singular <= rank_tol
        cons = {}
        for name, table in constraints.items():
            table = np.broadcast_to(np.asarray(table, dtype=float), omega.shape)
            lim = constraint_limits[name]
            bad |= table >= lim
            cons[name] = {"max": float(np.max(table)) if table.size else 0.0, "limit": lim,
                          "passed": bool(np.all(table < lim))}
        worst = np.unravel_index(int(np.argmax(omega)), omega.shape) if omega.size else ()
        failing = [tuple(int(i) for i in idx) for idx in np.argwhere(bad)[:20]]
        dim_ok = dimension == expected_dimension
        rank_ok = bool(np.all(singular > rank_tol)) and dim_ok
        passed = bool(not bad.any()) and dim_ok
        return cls(
            passed=passed,
            tol=tol,
            max_residual=float(np.max(omega)) if omega.size else 0.0,
            mean_residual=float(np.mean(omega)) if omega.size else 0.0,
            worst_node=tuple(int(i) for i in worst),
            histogram=residual_histogram(omega),
            rank_tol=rank_tol,
            min_singular_value=float(np.min(singular)) if singular.size else 0.0,
            rank_ok=rank_ok,
            dimension=dimension,
            expected_dimension=expected_dimension,
            constraints=cons,
            failing_nodes=failing,
            n_failing=int(bad.sum()),
            n_nodes=int(omega.size),
            notes=list(notes),
        )

    @property
    def max_constraint_residual(self):
        return max((c["max"] for c in self.constraints.values()), default=0.0)

    def to_dict(self):
        return {
            "passed": self.passed,
            "tolerance": self.tol,
            "max_omega_residual": self.max_residual,
            "mean_omega_residual": self.mean_residual,
            "worst_node": list(self.worst_node),
            "histogram": self.histogram,
            "rank_tolerance": self.rank_tol,
            "min_singular_value": self.min_singular_value,
            "rank_ok": self.rank_ok,
            "dimension": self.dimension,
            "expected_dimension": self.expected_dimension,
            "constraints": self.constraints,
            "n_nodes": self.n_nodes,
            "n_failing": self.n_failing,
            "failing_nodes": [list(f) for f in self.failing_nodes],
            "notes": self.notes,
        }
