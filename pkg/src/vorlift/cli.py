"""Command-line batch driver.

Subcommands mirror the library: lift, unlift, approx, levelset, slice,
flux, coarea, counterexample.  Options may come from a JSON config file
(``--config``) with command-line flags taking precedence.  Exit codes:
0 success, 1 I/O or file-format problems, 2 contract violations (bad
geometry, unliftable input, degenerate slices), 3 unmet tolerances.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import counterexample as cx
from . import currents, fileio, flux
from .approx import approximate
from .cover import classify_balls, shifted_cover
from .errors import (AliasingError, DataError, DegenerateSliceError,
                     GeometryError, LiftError, QuantizationError,
                     ToleranceError)
from .lifting import ChargeSet, lift, unlift

EXIT_IO = 1
EXIT_CONTRACT = 2
EXIT_TOLERANCE = 3

_CONTRACT_ERRORS = (DataError, GeometryError, AliasingError,
                    DegenerateSliceError, LiftError)
_TOLERANCE_ERRORS = (ToleranceError, QuantizationError)


def _dump_json(path, obj):
    with open(path, "w") as f:
        json.dump(obj, f, sort_keys=True, indent=2)
        f.write("\n")


def _load_charges(path):
    if path is None:
        return None
    with open(path) as f:
        return ChargeSet.from_json(json.load(f))


def _parse_circle(spec):
    try:
        cx_, cy, r = (float(v) for v in spec.split(","))
    except (ValueError, AttributeError):
        raise DataError(f"--circle expects 'cx,cy,radius', got {spec!r}")
    return flux.Circle((cx_, cy), r)


def cmd_lift(args):
    V = fileio.read_vector_field(args.input)
    charges = _load_charges(args.charges)
    try:
        res = lift(V, charges, tol=args.tol)
    except LiftError as exc:
        print(f"not liftable: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    fileio.write_circle_field(args.output, res.u)
    _dump_json(args.output + ".report.json", {
        "boundary_degree": res.boundary_degree,
        "max_loop_residual": res.max_loop_residual,
    })
    return 0


def cmd_unlift(args):
    u = fileio.read_circle_field(args.input)
    fileio.write_vector_field(args.output, unlift(u))
    return 0


def cmd_approx(args):
    V = fileio.read_vector_field(args.input)
    VN, charges, report = approximate(V, args.p, args.r, seed=args.seed)
    fileio.write_vector_field(args.output, VN)
    _dump_json(args.output + ".charges.json", charges.to_json())
    _dump_json(args.output + ".report.json", report.to_json())
    return 0


def cmd_levelset(args):
    u = fileio.read_circle_field(args.input)
    current = currents.level_set_current(u, args.level)
    _dump_json(args.output, current.to_json())
    return 0


def cmd_slice(args):
    with open(args.current) as f:
        current = currents.PolylineCurrent.from_json(json.load(f))
    circle = _parse_circle(args.circle)
    res = currents.slice_by_circle(current, circle)
    out = res.to_json()
    out["total"] = res.total()
    _dump_json(args.output, out)
    return 0


def cmd_flux(args):
    V = fileio.read_vector_field(args.input)
    circle = _parse_circle(args.circle)
    res = flux.circle_flux(V, circle, tol=args.tol or 1e-6)
    out = res.to_json()
    if args.output:
        _dump_json(args.output, out)
    else:
        json.dump(out, sys.stdout, sort_keys=True)
        print()
    return 0


def cmd_coarea(args):
    u = fileio.read_circle_field(args.input)
    res = currents.coarea_check(u, np.ones((u.grid.nx, u.grid.ny)),
                                nlevels=args.nlevels,
                                rng=np.random.default_rng(args.seed))
    out = {"lhs": res.lhs, "rhs": res.rhs,
           "relative_error": res.relative_error}
    if args.output:
        _dump_json(args.output, out)
    else:
        json.dump(out, sys.stdout, sort_keys=True)
        print()
    return 0


def cmd_cover(args):
    V = fileio.read_vector_field(args.input)
    cover = shifted_cover(V, args.r, args.p, seed=args.seed)
    classify_balls(V, cover, tol=args.tol or 1.0)
    _dump_json(args.output, cover.to_json())
    return 0


def cmd_counterexample(args):
    thresholds = [float(t) for t in args.thresholds.split(",")]
    rows = cx.divergence_certificate(args.p, args.eps, thresholds)
    cx.write_certificate_csv(args.output, rows)
    return 0


def _add_common(sp):
    sp.add_argument("--input")
    sp.add_argument("--output")
    sp.add_argument("--charges")
    sp.add_argument("--current")
    sp.add_argument("--circle")
    sp.add_argument("--config")
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--r", type=float, default=0.1)
    sp.add_argument("--grid", type=int, default=256)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--level", type=float, default=1.0)
    sp.add_argument("--nlevels", type=int, default=64)
    sp.add_argument("--ndirs", type=int, default=2048)
    sp.add_argument("--eps", type=float, default=0.1)
    sp.add_argument("--thresholds", default="1,5,10")


_COMMANDS = {
    "lift": cmd_lift,
    "unlift": cmd_unlift,
    "approx": cmd_approx,
    "levelset": cmd_levelset,
    "slice": cmd_slice,
    "flux": cmd_flux,
    "coarea": cmd_coarea,
    "cover": cmd_cover,
    "counterexample": cmd_counterexample,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="vorlift")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        _add_common(sub.add_parser(name))
    return parser


def _apply_config(args, argv):
    """Fill in values from the JSON config for flags not given on the
    command line."""
    if not args.config:
        return args
    with open(args.config) as f:
        cfg = json.load(f)
    given = {a.split("=")[0].lstrip("-") for a in argv if a.startswith("--")}
    for key, val in cfg.items():
        if key not in given and hasattr(args, key):
            setattr(args, key, val)
    return args


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        args = _apply_config(args, argv)
        return _COMMANDS[args.command](args)
    except _TOLERANCE_ERRORS as exc:
        print(f"tolerance not met [{type(exc).__name__}]: {exc}",
              file=sys.stderr)
        return EXIT_TOLERANCE
    except _CONTRACT_ERRORS as exc:
        if isinstance(exc, DataError):
            print(f"bad input [{type(exc).__name__}]: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"contract violation [{type(exc).__name__}]: {exc}",
              file=sys.stderr)
        return EXIT_CONTRACT
    except (OSError, json.JSONDecodeError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
