"""Numerical tolerances and conventions, kept in one place."""

import math
import os
from dataclasses import asdict, dataclass


DEFAULT_AREA_SCALE = 2 * math.pi


@dataclass(frozen=True)
class Tolerances:
    level: float = 1e-10          # reduction level residual, relative
    flow: float = 1e-12           # moment drift under torus flows
    fiber: float = 1e-8           # |psi - gamma(s)| relative
    level_set: float = 1e-8       # |f~_j - c_j|
    lagrangian: float = 1e-6      # max |omega(u_i, u_j)| on a torus sample
    rank: float = 1e-6            # smallest singular value of a tangent frame
    margin: float = 0.05          # loop-to-singular-value distance in the psi chart
    base_locus: float = 1e-12     # both pencil monomials below this => undefined
    reality: float = 1e-10        # |Im| of a real-locus sample
    eps_ambient: float = 1e-4     # collision radius in gauge-fixed coordinates
    eps_param: float = 0.1        # minimal parameter separation of a collision

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not v > 0:
                raise ValueError(f"tolerance {k} must be positive, got {v}")

    def replace(self, **kw):
        d = asdict(self)
        d.update({k: v for k, v in kw.items() if v is not None})
        return Tolerances(**d)

    def to_dict(self):
        return asdict(self)


DEFAULT_TOLERANCES = Tolerances()


def worker_count():
    """Thread cap from ``LAGRANGE_FORGE_THREADS`` (default: CPU count)."""
    raw = os.environ.get("LAGRANGE_FORGE_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1
