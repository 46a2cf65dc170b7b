"""Clifford and Chekanov tori in CP2 from the pencil of conics.

The direction a = (1, 1) splits the boundary divisors into D+ = D1 + D2 and
D- = 2 D3. A loop around the singular value 0 sweeps out the standard torus;
a small loop away from it gives the exotic one. Both are sampled on a grid,
checked for omega = 0, and written out as point clouds.

    python3 demos/conic_pencil_tori.py [outdir]
"""

import sys
from pathlib import Path

from lagrange_forge import chekanov as ch
from lagrange_forge.divisors import picard, split_pencil
from lagrange_forge.polytope import fixture
from lagrange_forge.toric_space import reduction_setup


def main(outdir="demo_out"):
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)

    P = fixture("cp2")
    pic = picard(P)
    D = split_pencil(P, (1, 1), pic)
    R = reduction_setup(P)
    print(f"Pic rank {pic.rank}, torsion {list(pic.torsion)}")
    print(f"D+ exponents {D.plus_exponents}, D- exponents {D.minus_exponents}, degree {D.degree}")
    print(f"base points on facet pairs {[sorted(b) for b in D.base_points]}")

    loops = {
        "clifford": ch.LoopSpec(center=0, radius=1),
        "chekanov": ch.LoopSpec(center=1, radius=0.25),
    }
    for name, loop in loops.items():
        T = ch.build_torus(R, D, loop, [0.0], (64, 64))
        rep = ch.verify_lagrangian(T)
        per = ch.action_periods(T)
        print(
            f"{name:9s} class={T.loop_class.name:9s} windings={T.loop_class.windings} "
            f"max|omega|={rep.max_residual:.2e} min sv={rep.min_singular_value:.3f} "
            f"periods={[round(p, 6) for p in per.periods]}"
        )
        ch.export_cloud(T, out / f"{name}.csv")

    # the moment fiber over the barycenter is the monotone Clifford torus
    F = ch.moment_fiber_torus(R, [1 / 3, 1 / 3], 64)
    print(f"barycentric fiber periods {[round(p, 6) for p in ch.action_periods(F).periods]}")
    print(f"point clouds written to {out}/")


if __name__ == "__main__":
    main(*sys.argv[1:])
