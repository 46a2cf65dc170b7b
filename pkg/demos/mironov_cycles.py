"""Mironov cycles: real parts swept by subtori.

Three runs:

* C2 with the diagonal circle at level 1/2. The real circle is swept by a
  circle, and (theta, phi) and (theta + pi, phi + pi) land on the same
  point, so the cycle is a 2:1 immersion of a torus. The collision scan
  should find exactly that.
* The real parts of CP2 and Gr(2, 4) with no torus (k = 0): these are
  isotropic of maximal dimension.
* The circle rotating the first C4 coordinate on Gr(2, 4), at level 0.3.

    python3 demos/mironov_cycles.py
"""

import time

import numpy as np

from lagrange_forge import mironov as mi


def c2_cover():
    A = mi.AmbientModel.parse("cn:2")
    M = mi.build_cycle(A, mi.SubtorusSpec(((1, 1),), (0.5,)), 64, 64)
    census = mi.collision_census(M.collisions, M.node_count)
    print(f"C2: max|omega|={M.report.max_residual:.1e}, clusters={census['cluster_sizes']}, "
          f"cover={census['n_cover']}, transverse={census['n_transverse']}")


def real_parts():
    for name in ("cp2", "gr24"):
        A = mi.AmbientModel.parse(name)
        M = mi.build_cycle(A, mi.SubtorusSpec((), ()), 200, seed=0, scan=False)
        print(f"{name} real part: {M.base.size} samples, dimension {M.base.dimension}, "
              f"isotropy {np.max(mi.isotropy_residuals(M.base)):.1e}")


def grassmann_level1():
    t0 = time.perf_counter()
    M = mi.grassmann_cycle_level1(0.3, (200, 64))
    rep = M.report
    print(f"Gr(2,4) level 0.3: {M.node_count} nodes, rank {rep.dimension}, "
          f"max|omega|={rep.max_residual:.1e}, min sv={rep.min_singular_value:.3f}, "
          f"{time.perf_counter() - t0:.2f} s")
    print(f"  note: {rep.notes[0]}")


if __name__ == "__main__":
    c2_cover()
    real_parts()
    grassmann_level1()
