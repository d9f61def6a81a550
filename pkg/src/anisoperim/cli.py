"""Command-line front end: ``anisoperim <subcommand> ...``.

Subcommands: norm, perim, slice, gmin, verify, casebook.  Inputs are JSON
(a file path or an inline JSON string); outputs are JSON or CSV.  Exit status
is 0 on success, 1 when a verification or scenario fails, and 2 on usage or
configuration errors.  Scalars are printed with 12 digits after the point.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import anisotropy as an
from . import casebook as cb
from . import geometry as geo
from . import varmin as vm
from .grid import GridFunction, GridSet
from .solver import ConvergenceError

log = logging.getLogger("anisoperim")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    """Bad input: malformed JSON, unknown keys, inconsistent dimensions, ..."""


def _num(x: float) -> str:
    return f"{float(x):.12f}"


# --------------------------------------------------------------------------
# input parsing


def load_json(src: str, what: str = "input"):
    """Parse ``src`` as inline JSON if it looks like JSON, else as a file path."""
    text = src
    label = "inline JSON"
    if not src.lstrip().startswith(("{", "[")):
        p = Path(src)
        if not p.is_file():
            raise ConfigError(f"{what}: no such file {src!r}")
        text = p.read_text()
        label = src
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{what}: malformed JSON in {label} at line {e.lineno}, column {e.colno}: {e.msg}") from None


def load_norm(src: str) -> an.Anisotropy:
    try:
        return an.from_dict(load_json(src, "norm"))
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"norm: {e}") from None


def load_set(src: str) -> geo.PolyhedralSet:
    try:
        return geo.PolyhedralSet.from_dict(load_json(src, "set"))
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"set: {e}") from None


def parse_vector(text: str) -> np.ndarray:
    try:
        v = np.array([float(t) for t in text.replace(" ", "").split(",") if t != ""])
    except ValueError:
        raise ConfigError(f"cannot parse vector {text!r}; expected comma-separated numbers") from None
    if v.size == 0 or not np.all(np.isfinite(v)):
        raise ConfigError(f"cannot parse vector {text!r}")
    return v


def parse_window(src: str | None, dim: int):
    if src is None:
        return None
    w = load_json(src, "window")
    if not (isinstance(w, list) and len(w) == 2):
        raise ConfigError("window must be [[lo...], [hi...]]")
    lo, hi = (np.asarray(c, dtype=float) for c in w)
    if lo.shape != (dim,) or hi.shape != (dim,):
        raise ConfigError(f"window has dimension {lo.size} but the set has dimension {dim}")
    return lo, hi


def check_dims(norm: an.Anisotropy, dim: int, what: str):
    if norm.dim is not None and norm.dim != dim:
        raise ConfigError(f"norm has dimension {norm.dim} but the {what} has dimension {dim}")


def _positive(name: str, x):
    if x is not None and not x > 0:
        raise ConfigError(f"{name} must be > 0, got {x}")
    return x


def _reject_unknown(d: dict, allowed: set, where: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be an object")
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"unknown keys in {where}: {sorted(extra)}")


def load_scenario(src: str):
    """Scenario JSON -> (norm, collar GridFunction, solver options)."""
    s = load_json(src, "scenario")
    _reject_unknown(s, {"norm", "lattice", "collar", "solver"}, "scenario")
    for k in ("norm", "lattice", "collar"):
        if k not in s:
            raise ConfigError(f"scenario is missing {k!r}")
    try:
        norm = an.from_dict(s["norm"])
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"norm: {e}") from None
    lat = s["lattice"]
    _reject_unknown(lat, {"dims", "h", "lower"}, "lattice")
    dims = [int(n) for n in lat.get("dims", ())]
    if not dims or min(dims) < 1:
        raise ConfigError("lattice.dims must be a non-empty list of positive integers")
    h = _positive("lattice.h", float(lat.get("h", 1.0 / max(dims))))
    lower = lat.get("lower")
    if lower is not None and len(lower) != len(dims):
        raise ConfigError(f"lattice.lower has dimension {len(lower)} but the lattice has dimension {len(dims)}")
    # the energy lives on subgraphs in one more dimension; a bare base norm is
    # read as the cylindrical norm over it
    if not (isinstance(norm, an.Composed) and norm.kind == "cylindrical"):
        if norm.dim is not None and norm.dim != len(dims):
            raise ConfigError(
                f"norm has dimension {norm.dim} but the lattice has dimension {len(dims)} "
                f"(expected {len(dims)} for a base norm or {len(dims) + 1} for a cylindrical one)")
        norm = an.cylindrical(norm)
    elif norm.dim is not None and norm.dim != len(dims) + 1:
        raise ConfigError(f"norm has dimension {norm.dim} but the lattice has dimension {len(dims)} "
                          f"(a cylindrical norm needs {len(dims) + 1})")

    col = s["collar"]
    kind = col.get("kind") if isinstance(col, dict) else None
    if kind == "linear":
        _reject_unknown(col, {"kind", "zeta", "offset"}, "collar")
        zeta = np.asarray(col.get("zeta", []), dtype=float)
        if zeta.shape != (len(dims),):
            raise ConfigError(f"collar.zeta has dimension {zeta.size} but the lattice has dimension {len(dims)}")
        off = float(col.get("offset", 0.0))

        def data(X):
            return X @ zeta + off
    elif kind == "indicator":
        _reject_unknown(col, {"kind", "set"}, "collar")
        try:
            S = geo.PolyhedralSet.from_dict(col["set"])
        except (ValueError, KeyError, TypeError) as e:
            raise ConfigError(f"collar.set: {e}") from None
        if S.dim != len(dims):
            raise ConfigError(f"collar set has dimension {S.dim} but the lattice has dimension {len(dims)}")
        try:
            g = GridSet.digitize(S.contains, dims, h, lower)
        except ValueError as e:
            raise ConfigError(f"collar.set: {e}") from None
        data = g.values
    elif kind == "constant":
        _reject_unknown(col, {"kind", "value"}, "collar")
        data = float(col.get("value", 0.0))
    else:
        raise ConfigError(f"collar.kind must be linear, indicator or constant, got {kind!r}")
    g = GridFunction.from_collar(data, dims, h, lower)

    sol = s.get("solver", {})
    _reject_unknown(sol, {"gap_tol", "max_iters", "seed", "method"}, "solver")
    opts = {
        "gap_tol": _positive("solver.gap_tol", float(sol.get("gap_tol", 1e-8))),
        "max_iters": int(_positive("solver.max_iters", int(sol.get("max_iters", 100_000)))),
        "seed": int(sol.get("seed", 0)),
        "method": sol.get("method", "auto"),
    }
    return norm, g, opts


# --------------------------------------------------------------------------
# subcommands


def cmd_norm(a, out) -> int:
    norm = load_norm(a.config)
    if not (a.eval or a.dual or a.check):
        raise ConfigError("norm: give at least one of --eval, --dual, --check")
    for flag, vec in (("eval", a.eval), ("dual", a.dual)):
        if vec is None:
            continue
        v = parse_vector(vec)
        check_dims(norm, v.size, "vector")
        val = norm.eval(v) if flag == "eval" else norm.eval_dual(v)
        print(_num(val), file=out)
    if a.check:
        dim = a.dim if a.dim is not None else norm.dim
        if dim is None:
            raise ConfigError("norm: --check needs --dim for a norm without a fixed dimension")
        check_dims(norm, dim, "requested space")
        if a.check == "gap":
            direction = parse_vector(a.direction) if a.direction else "sup"
            val = an.restriction_gap(norm, direction, seed=a.seed, dim=dim)
            print(_num(val), file=out)
        else:
            fn = an.check_generalized_graph if a.check == "graph" else an.check_partial_monotonicity
            rep = fn(norm, seed=a.seed, dim=dim)
            d = {"verdict": rep.verdict, "method": rep.method, "max_violation": rep.max_violation,
                 "witness": None if rep.witness is None else np.asarray(rep.witness).tolist()}
            print(json.dumps(d), file=out)
    return EXIT_OK


def cmd_perim(a, out) -> int:
    E = load_set(a.set)
    norm = load_norm(a.norm)
    check_dims(norm, E.dim, "set")
    print(_num(geo.perimeter(E, norm, parse_window(a.window, E.dim))), file=out)
    return EXIT_OK


def cmd_slice(a, out) -> int:
    E = load_set(a.set)
    norm = load_norm(a.norm)
    check_dims(norm, E.dim, "set")
    r = geo.slice_check(E, norm, parse_window(a.window, E.dim))
    err = r.max_rel_error()
    d = {"lhs_horizontal": r.lhs_horizontal, "rhs_horizontal": r.rhs_horizontal,
         "lhs_vertical": r.lhs_vertical, "rhs_vertical": r.rhs_vertical, "max_rel_error": err,
         "tol": a.tol, "status": "pass" if err <= a.tol else "fail"}
    print(json.dumps(d, indent=2), file=out)
    return EXIT_OK if err <= a.tol else EXIT_FAIL


def grid_csv(u: GridFunction) -> str:
    names = ["x", "y", "z"][: u.ndim] if u.ndim <= 3 else [f"x{i + 1}" for i in range(u.ndim)]
    X = u.centers().reshape(-1, u.ndim)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names + ["u"])
    for x, v in zip(X, u.values.ravel()):
        w.writerow([f"{c:.12g}" for c in x] + [f"{v:.12g}"])
    return buf.getvalue()


def cmd_gmin(a, out) -> int:
    norm, g, opts = load_scenario(a.scenario)
    u = vm.minimize_G(norm, g, **opts)
    text = grid_csv(u)
    if a.out:
        Path(a.out).write_text(text)
    else:
        out.write(text)
    summary = {k: u.meta[k] for k in ("energy", "gap", "iterations", "method", "max_principle_violation")}
    print(json.dumps(summary), file=sys.stderr if not a.out else out)
    return EXIT_OK


def cmd_verify(a, out) -> int:
    E = load_set(a.candidate)
    norm = load_norm(a.norm)
    check_dims(norm, E.dim, "set")
    wins = load_json(a.windows, "windows")
    if not isinstance(wins, list) or not wins:
        raise ConfigError("windows must be a non-empty list of [[lo...], [hi...]] boxes")
    if len(wins) == 2 and all(isinstance(c, list) and c and not isinstance(c[0], list) for c in wins):
        wins = [wins]  # a single box
    for w in wins:
        if not (isinstance(w, list) and len(w) == 2 and all(len(c) == E.dim for c in w)):
            raise ConfigError(f"each window must be [[lo...], [hi...]] with {E.dim} coordinates")
    v = vm.verify_minimality(E, norm, wins, a.method, h=a.h, tol=a.tol, gap_tol=a.gap_tol,
                             max_iters=a.max_iters, seed=a.seed)
    text = json.dumps(v.to_dict(), indent=2) + "\n"
    if a.out:
        Path(a.out).write_text(text)
        print(v.status, file=out)
    else:
        out.write(text)
    return EXIT_OK if v.status == "certified-at-scale" else EXIT_FAIL


def cmd_casebook(a, out) -> int:
    which = "all" if a.run == "all" else [s for s in a.run.split(",") if s]
    try:
        rows = cb.run(which)
    except KeyError as e:
        raise ConfigError(str(e.args[0]) if e.args else str(e)) from None
    text = cb.emit(rows, a.format)
    if a.out:
        Path(a.out).write_text(text)
        n = sum(r.status == "pass" for r in rows)
        print(f"{n}/{len(rows)} scenarios passed", file=out)
    else:
        out.write(text)
    return EXIT_OK if all(r.status == "pass" for r in rows) else EXIT_FAIL


# --------------------------------------------------------------------------
# argument parsing


def _float(x: str) -> float:
    try:
        return float(x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {x!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="anisoperim",
        description="Anisotropic perimeters, total-variation minimisation and minimality checks.",
        epilog="Exit status: 0 success, 1 failed verification/scenario, 2 usage or configuration error. "
               "JSON arguments accept a file path or an inline JSON string. "
               "ANISOPERIM_THREADS caps casebook parallelism.",
    )
    p.add_argument("--version", action="version", version=f"anisoperim {__version__}",
                   help="print the version as 'anisoperim X.Y.Z' and exit")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more log output on stderr (repeatable)")
    sub = p.add_subparsers(dest="command", metavar="{norm,perim,slice,gmin,verify,casebook}")
    sub.required = True

    s = sub.add_parser("norm", help="evaluate a norm, its dual, or a structural predicate")
    s.add_argument("--config", required=True, help="norm descriptor JSON")
    s.add_argument("--eval", metavar="VEC", help="evaluate the norm at a comma-separated vector")
    s.add_argument("--dual", metavar="VEC", help="evaluate the dual norm at a comma-separated vector")
    s.add_argument("--check", choices=("graph", "monotone", "gap"),
                   help="generalized-graph test, partial-monotonicity test, or restriction gap")
    s.add_argument("--dim", type=int, help="ambient dimension for --check when the norm does not fix one")
    s.add_argument("--direction", metavar="VEC", help="direction for --check gap (default: sampled sup)")
    s.add_argument("--seed", type=int, default=0, help="seed for sampled checks (default 0)")
    s.set_defaults(fn=cmd_norm)

    for name, helptext in (("perim", "anisotropic perimeter of a polyhedral set in a window"),
                           ("slice", "horizontal and vertical slicing identities of a polyhedral set")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--set", required=True, help="set descriptor JSON")
        s.add_argument("--norm", required=True, help="norm descriptor JSON")
        s.add_argument("--window", help="box [[lo...],[hi...]] (default: the set's bounding window)")
        if name == "slice":
            s.add_argument("--tol", type=_float, default=1e-9, help="relative tolerance (default 1e-9)")
            s.set_defaults(fn=cmd_slice)
        else:
            s.set_defaults(fn=cmd_perim)

    s = sub.add_parser("gmin", help="minimise the subgraph energy for a scenario; writes x,y,u CSV")
    s.add_argument("--scenario", required=True, help="scenario JSON (norm, lattice, collar, solver)")
    s.add_argument("--out", help="CSV output path (default: stdout)")
    s.set_defaults(fn=cmd_gmin)

    s = sub.add_parser("verify", help="test a candidate set against compact perturbations")
    s.add_argument("--candidate", required=True, help="set descriptor JSON")
    s.add_argument("--norm", required=True, help="norm descriptor JSON")
    s.add_argument("--windows", required=True, help="JSON list of boxes [[lo...],[hi...]] (or a single box)")
    s.add_argument("--method", choices=("brute", "relaxed"), default="brute", help="default brute")
    s.add_argument("--h", type=_float, required=True, help="lattice spacing; window sides must be multiples")
    s.add_argument("--tol", type=_float, default=1e-9, help="energy comparison slack (default 1e-9)")
    s.add_argument("--gap-tol", type=_float, default=1e-8, help="relaxed solver gap target (default 1e-8)")
    s.add_argument("--max-iters", type=int, default=100_000, help="relaxed solver iteration cap (default 100000)")
    s.add_argument("--seed", type=int, default=0, help="solver seed (default 0)")
    s.add_argument("--out", help="verdict JSON path (default: stdout)")
    s.set_defaults(fn=cmd_verify)

    s = sub.add_parser("casebook", help="run registered scenarios and emit the results table")
    s.add_argument("--run", default="all", help="'all' or comma-separated scenario ids (default all)")
    s.add_argument("--out", help="output path (default: stdout)")
    s.add_argument("--format", choices=("csv", "json", "md"), default="csv", help="default csv")
    s.set_defaults(fn=cmd_casebook)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:  # argparse: 0 for --help/--version, 2 for usage errors
        return int(e.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(a.verbose, 2), format="%(levelname)s %(message)s")
    for name in ("tol", "gap_tol", "h"):
        _positive_arg = getattr(a, name, None)
        if _positive_arg is not None and not _positive_arg > 0:
            print(f"error: --{name.replace('_', '-')} must be > 0", file=sys.stderr)
            return EXIT_CONFIG
    try:
        return a.fn(a, out)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL
    except (ValueError, NotImplementedError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
