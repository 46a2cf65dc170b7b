"""Command-line front end.

Exit codes: 0 success, 1 mathematical failure (report still written), 2 usage
or I/O failure. Errors go to stderr as a JSON object.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import chekanov, mironov
from .config import DEFAULT_AREA_SCALE, DEFAULT_TOLERANCES
from .divisors import picard, split_pencil
from .errors import InfeasibleError, LagrangeForgeError, StructureError
from .polytope import fixture, load_polytope, validate_delzant, vertices
from .report import dumps
from .toric_space import reduction_setup


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit_error(kind, message, code, **extra):
    body = {"error": kind, "message": str(message), "exit_code": code}
    body.update({k: v for k, v in extra.items() if v is not None})
    print(json.dumps(body, sort_keys=True), file=sys.stderr)
    return code


def _write(obj, out=None, name="report.json"):
    text = dumps(obj)
    if out:
        path = Path(out)
        if path.suffix != ".json":
            path.mkdir(parents=True, exist_ok=True)
            path = path / name
        else:
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n")
    print(text)


def _out_dir(out):
    if not out:
        return None
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load(source):
    """A polytope JSON path, or the name of a bundled fixture."""
    path = Path(source)
    try:
        if path.exists():
            return load_polytope(path)
        if path.suffix == "" and "/" not in source:
            return fixture(source)
        raise FileNotFoundError(source)
    except (OSError, json.JSONDecodeError, StructureError) as exc:
        raise UsageError(f"cannot load polytope {source!r}: {exc}") from exc


def _ints(text, what):
    try:
        return [int(v) for v in text.replace(" ", "").split(",") if v != ""]
    except ValueError as exc:
        raise UsageError(f"{what} must be comma separated integers, got {text!r}") from exc


def _floats(text, what):
    try:
        return [float(v) for v in text.replace(" ", "").split(",") if v != ""]
    except ValueError as exc:
        raise UsageError(f"{what} must be comma separated numbers, got {text!r}") from exc


def _grid(text, dims=2):
    try:
        parts = [int(v) for v in text.lower().split("x")]
    except ValueError as exc:
        raise UsageError(f"grid must look like 64x64, got {text!r}") from exc
    if len(parts) == 1:
        parts = parts * dims
    if len(parts) != dims or min(parts) < 4:
        raise UsageError(f"grid needs {dims} sizes of at least 4, got {text!r}")
    return tuple(parts)


def _tolerances(args):
    return DEFAULT_TOLERANCES.replace(lagrangian=args.tol_lagrangian, rank=args.tol_rank, margin=getattr(args, "margin", None))


# -- commands ---------------------------------------------------------------

def cmd_polytope(args):
    P = _load(args.input)
    if args.action == "validate":
        rep = validate_delzant(P)
        _write(rep.to_dict(), args.out)
        return 0 if rep.passed else 1
    verts = vertices(P)
    body = {
        "name": P.name,
        "vertices": [
            {"coordinates": [str(c) for c in v.coordinates], "facets": sorted(v.active_facets)} for v in verts
        ],
    }
    _write(body, args.out)
    return 0


def cmd_pencil(args):
    P = _load(args.polytope)
    a = _ints(args.direction, "direction")
    if not any(a):
        raise UsageError("direction must be nonzero")
    pic = picard(P)
    D = split_pencil(P, a, pic)
    R = reduction_setup(P, args.area_scale)
    body = {"pencil": D.to_dict(), "picard": pic.to_dict()}
    sing = chekanov.singular_values(D, R, scan=False)
    body["singular_values"] = [sv.to_dict() for sv in sing]
    _write(body, args.out)
    return 0


def cmd_torus(args):
    P = _load(args.polytope)
    tol = _tolerances(args)
    R = reduction_setup(P, args.area_scale, tol)
    grid = _grid(args.grid)
    out = _out_dir(args.out)
    if args.action == "fiber":
        x = _floats(args.moment, "moment")
        T = chekanov.moment_fiber_torus(R, x, grid[0], fd_order=args.fd_order)
    else:
        a = _ints(args.direction, "direction")
        if not any(a):
            raise UsageError("direction must be nonzero")
        D = split_pencil(P, a)
        c = _floats(args.levels, "levels")
        if len(c) != P.dimension - 1:
            raise UsageError(f"need {P.dimension - 1} level values, got {len(c)}")
        try:
            loop = chekanov.LoopSpec.parse(args.loop, samples=grid[0])
        except (ValueError, StructureError) as exc:
            raise UsageError(str(exc)) from exc
        T = chekanov.build_torus(R, D, loop, c, grid, fd_order=args.fd_order)
    rep = chekanov.verify_lagrangian(T)
    body = chekanov.torus_report(T, rep)
    if out:
        chekanov.export_cloud(T, out / "cloud.csv")
    _write(body, out)
    return 0 if rep.passed else 1


def _parse_weights(text):
    text = text.strip()
    if not text:
        return ()
    return tuple(tuple(_ints(w, "weights")) for w in text.split(";"))


def cmd_mironov(args):
    try:
        A = mironov.AmbientModel.parse(args.model)
    except StructureError as exc:
        raise UsageError(str(exc)) from exc
    W = _parse_weights(args.weights)
    c = _floats(args.levels, "levels")
    if len(c) != len(W):
        raise UsageError(f"{len(W)} weight vectors need {len(W)} levels, got {len(c)}")
    n_base, n_angle = _grid(args.grid)
    tol = _tolerances(args)
    out = _out_dir(args.out)
    S = mironov.SubtorusSpec(W, c)
    if A.kind == "grassmann" and W == ((1, 0, 0, 0),):
        M = mironov.grassmann_cycle_level1(c[0], (n_base, n_angle), seed=args.seed, tol=tol, scan=not args.no_scan)
    else:
        M = mironov.build_cycle(A, S, n_base, n_angle, seed=args.seed, tol=tol, scan=not args.no_scan)
    body = mironov.cycle_report(M)
    if out:
        mironov.export_cycle(M, out / "cycle.csv")
    _write(body, out)
    return 0 if M.report.passed else 1


# -- parser -------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="lagrange-forge", description="Lagrangian tori and cycles in toric and Grassmann varieties.")
    p.add_argument("--area-scale", type=float, default=DEFAULT_AREA_SCALE)
    p.add_argument("--tol-lagrangian", type=float, default=None)
    p.add_argument("--tol-rank", type=float, default=None)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pp = sub.add_parser("polytope", help="validate a polytope or list its vertices")
    pp.add_argument("action", choices=["validate", "vertices"])
    pp.add_argument("--input", required=True, help="JSON file or bundled fixture name")
    pp.add_argument("--out")
    pp.set_defaults(func=cmd_polytope)

    pe = sub.add_parser("pencil", help="pencil data for a lattice direction")
    pe.add_argument("--polytope", required=True)
    pe.add_argument("--direction", required=True)
    pe.add_argument("--out")
    pe.set_defaults(func=cmd_pencil)

    pt = sub.add_parser("torus", help="build and verify a pencil torus or a moment fiber")
    pt.add_argument("action", choices=["build", "fiber"])
    pt.add_argument("--polytope", required=True)
    pt.add_argument("--direction", default="")
    pt.add_argument("--loop", default="circle:center=0,radius=1")
    pt.add_argument("--levels", default="")
    pt.add_argument("--moment", default="")
    pt.add_argument("--grid", default="64x64")
    pt.add_argument("--fd-order", type=int, default=chekanov.DEFAULT_FD_ORDER, choices=sorted(chekanov.FD_COEFFS))
    pt.add_argument("--margin", type=float, default=None)
    pt.add_argument("--out")
    pt.set_defaults(func=cmd_torus)

    pm = sub.add_parser("mironov", help="build and verify a Mironov cycle")
    pm.add_argument("action", choices=["build"])
    pm.add_argument("--model", required=True, help="cn:N, cpN or gr24")
    pm.add_argument("--weights", default="", help="weight vectors separated by ';' (empty for k = 0)")
    pm.add_argument("--levels", default="")
    pm.add_argument("--grid", default="64x64", help="S_R samples x angles per sweep direction")
    pm.add_argument("--seed", type=int, default=0)
    pm.add_argument("--no-scan", action="store_true", help="skip the self-intersection scan")
    pm.add_argument("--out")
    pm.set_defaults(func=cmd_mironov)
    return p


_VALUE_FLAGS = ("--direction", "--levels", "--moment", "--weights", "--loop")


def _glue_values(argv):
    """Let list-valued flags take values that start with '-' (``--direction -1,-1``)."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] in _VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_glue_values(argv))
        with np.errstate(all="ignore"):
            return args.func(args)
    except UsageError as exc:
        return _emit_error("usage", exc, 2)
    except OSError as exc:
        return _emit_error("io", exc, 2)
    except StructureError as exc:
        return _emit_error("usage", exc, 2)
    except InfeasibleError as exc:
        return _emit_error(type(exc).__name__, exc, 1, constraint=exc.constraint)
    except LagrangeForgeError as exc:
        return _emit_error(type(exc).__name__, exc, 1)
    except ValueError as exc:
        return _emit_error("usage", exc, 2)


if __name__ == "__main__":
    sys.exit(main())
