"""Registry of reproducible worked scenarios with a pass/fail results table.

Each scenario is self-contained: it builds its own norm and set or collar,
runs the library, and compares against an expected value, verdict or
property.  ``run`` returns rows sorted by id; ``emit`` renders them as csv,
json or a markdown table with the fixed column order
(id, computed, expected, tol, status, seconds).
"""
from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import anisotropy as an
from . import geometry as geo
from .grid import GridFunction
from . import varmin as vm

__all__ = ["Scenario", "Row", "SCENARIOS", "run", "emit", "rows_from_json", "COLUMNS"]

COLUMNS = ("id", "computed", "expected", "tol", "status", "seconds")

LINF2 = an.PNorm(np.inf, 2)  # dual l1: face-counting perimeter on the lattice


@dataclass(frozen=True)
class Scenario:
    id: str
    params: dict
    tol: float
    provenance: str  # closed-form | oracle | property
    fn: Callable[[dict], tuple]  # params -> (computed, expected, passed, details)


@dataclass
class Row:
    id: str
    computed: object
    expected: object
    tol: float
    status: str
    seconds: float
    details: dict = field(default_factory=dict)

    def cells(self) -> list[str]:
        return [self.id, _fmt(self.computed), _fmt(self.expected), _fmt(self.tol), self.status, f"{self.seconds:.3f}"]


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def _close(a, b, tol) -> bool:
    return bool(abs(a - b) <= tol)


# --------------------------------------------------------------------------
# scenarios


def _parallelogram(p):
    gaps = {a: an.restriction_gap(an.parallelogram(a), [1.0, 0.0]) for a in p["alphas"]}
    errs = [abs(g - 1 / np.tan(a)) for a, g in gaps.items()]
    main = gaps[p["alpha"]]
    return main, 1 / np.tan(p["alpha"]), max(errs) <= p["tol"], {"gaps": {f"{a:.6f}": g for a, g in gaps.items()}}


def _half_spaces(p):
    nu = np.asarray(p["nu"], dtype=float)
    nu /= np.linalg.norm(nu)
    r = p["radius"]
    H = geo.PolyhedralSet.from_halfspaces([nu], [0.0], "intersect", (-r * np.ones(2), r * np.ones(2)))
    out = {}
    ok = True
    for name, norm in (("linf", LINF2), ("hexagon", an.hexagon(1.0))):
        z = vm.calibration_halfspace(nu, norm)
        v = vm.verify_minimality(H, norm, p["windows"], "brute", h=p["h"])
        out[name] = {"calibration": z.tolist(), "status": v.status}
        ok &= v.status == "certified-at-scale"
    return "certified-at-scale" if ok else "not-certified", "certified-at-scale", ok, out


def _parallel_planes(p):
    a, b = p["a"], p["b"]
    delta = {R: 2 * np.pi * R**2 - 2 * np.pi * R * (b - a) for R in p["radii"]}
    sign_ok = delta[p["small"]] < 0 < delta[p["large"]] and abs(2 * np.pi * (b - a) ** 2 - 2 * np.pi * (b - a) * (b - a)) == 0
    Phi = an.cylindrical(an.Euclidean())
    E = geo.PolyhedralSet.from_halfspaces([[0, 0, 1], [0, 0, -1]], [b, -a], "intersect",
                                          (np.array([-5, -5, a - 2]), np.array([5, 5, b + 2])))
    h = p["h"]
    verdicts = {}
    for R in (p["large"], p["small"]):
        win = ([-R, -R, a - h], [R, R, b + h])
        v = vm.verify_minimality(E, Phi, [win], "relaxed", h=h, gap_tol=p["gap_tol"], max_iters=p["max_iters"])
        verdicts[R] = v.status
    computed = f"{verdicts[p['large']]}@R={p['large']:g};{verdicts[p['small']]}@R={p['small']:g}"
    expected = f"counterexample@R={p['large']:g};certified-at-scale@R={p['small']:g}"
    return computed, expected, bool(sign_ok and computed == expected), {"delta": {str(R): d for R, d in delta.items()}}


def _double_cone(p):
    ok, st = True, []
    for l1, g1, l2, g2 in p["cones"]:
        E = geo.union_of_cones(1, l1, g1, l2, g2, radius=p["radius"])
        v = vm.verify_minimality(E, LINF2, p["windows"], "brute", h=p["h"])
        st.append(v.status)
        ok &= v.status == "certified-at-scale"
    return "certified-at-scale" if ok else "not-certified", "certified-at-scale", ok, {"statuses": st}


def _strip_rectangle(p):
    l, gam, h = p["l"], p["gamma"], p["h"]
    R = geo.PolyhedralSet.box([0, 0], [l, gam], window=([-1, -1], [l + 1, gam + 1]))

    def strip(X):
        return (X[..., 1] > 0) & (X[..., 1] < gam)

    # compact perturbations stay away from the strip's edges: one fixed row on each side
    win = ([-h, h], [l + h, gam - h])
    v = vm.verify_minimality(R, LINF2, [win], "brute", h=h, domain=strip)
    return v.competitor_energy - v.candidate_energy, 0.0, v.status == "certified-at-scale", {"status": v.status}


def _union_cones(p):
    E = geo.union_of_cones(1, 0.0, 0.0, p["l"], p["gamma"], radius=p["radius"])
    v = vm.verify_minimality(E, LINF2, p["windows"], "brute", h=p["h"])
    ok = v.status == "certified-at-scale"
    details = {"status": v.status}
    if "control" in p:
        lc, gc = p["control"]
        F = geo.union_of_cones(1, 0.0, 0.0, lc, gc, radius=p["radius"])
        w = vm.verify_minimality(F, LINF2, p["windows"], "brute", h=p["h"])
        gain = w.competitor_energy - w.candidate_energy
        details.update(control_status=w.status, control_gain=gain)
        ok &= w.status == "counterexample" and _close(gain, 2 * lc - 2 * gc, 1e-12)
    return v.status, "certified-at-scale", ok, details


def _hexagon(p):
    rep = an.check_generalized_graph(an.hexagon(p["eps"]))
    sym = an.hexagon(p["eps"]).structurally_symmetric_last()
    q = an.check_generalized_graph(an.Quadratic([[1.0, 0.5], [0.5, 1.0]]))
    ok = rep.verdict == "holds" and not sym and q.verdict == "fails"
    return rep.verdict, "holds", ok, {"symmetric": sym, "quadratic": q.verdict,
                                      "quadratic_witness": None if q.witness is None else np.asarray(q.witness).tolist()}


def _cube_cross(p):
    r = p["radius"]
    win = (-r * np.ones(2), r * np.ones(2))
    cross = geo.PolyhedralSet.disjoint_union([
        geo.PolyhedralSet.from_halfspaces([[-1, 1], [-1, -1]], [0, 0], "intersect", win),
        geo.PolyhedralSet.from_halfspaces([[1, 1], [1, -1]], [0, 0], "intersect", win),
    ])
    phi = an.PNorm(np.inf)
    worst, pairs = 0.0, {}
    for m in p["m"]:
        lhs, rhs = geo.cylinder_identity(cross, phi, m)
        pairs[m] = (lhs, rhs)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    # with the square unit ball the diagonal cross is not minimal (emptying a window
    # halves its cost); the classification holds for the axis-aligned cross
    quadrants = geo.PolyhedralSet.disjoint_union([
        geo.PolyhedralSet.from_halfspaces([[-1, 0], [0, -1]], [0, 0], "intersect", win),
        geo.PolyhedralSet.from_halfspaces([[1, 0], [0, 1]], [0, 0], "intersect", win),
    ])
    v = vm.verify_minimality(quadrants, LINF2, p["windows"], "brute", h=p["h"])
    lhs, rhs = pairs[p["m"][-1]]
    return lhs, rhs, worst <= p["tol"] and v.status == "certified-at-scale", {"status": v.status}


def _partial_monotone(p):
    out = {}
    for name, norm in (("cylindrical-l1", an.cylindrical(an.PNorm(1))),
                       ("omega2-l1", an.omega_norm({"p": 2}, an.PNorm(1))),
                       ("omega3-euclidean", an.omega_norm({"p": 3}, an.Euclidean()))):
        out[name] = an.check_partial_monotonicity(norm, dim=3).verdict
    ok = all(v == "holds" for v in out.values())
    return "holds" if ok else "fails", "holds", ok, out


def _nu(a):
    return np.array([-np.sin(a), np.cos(a)])


def _cones(p):
    st, ok = [], True
    for a1, a2 in p["angles"]:
        E, F, rep = geo.build_cone_pair(_nu(a1), _nu(a2), radius=p["radius"])
        ok &= rep.minimizing
        for S in (E, F):
            v = vm.verify_minimality(S, LINF2, p["windows"], "brute", h=p["h"])
            st.append(v.status)
            ok &= v.status == "certified-at-scale"
    return "certified-at-scale" if ok else "not-certified", "certified-at-scale", ok, {"statuses": st}


def _roof(p):
    n1, n2 = np.asarray(p["nu1"]), np.asarray(p["nu2"])
    d = p["depth"]
    delta = geo.roof_cut_delta(n1, n2, d, LINF2)
    closed = geo.roof_cut_closed_form(n1, n2, d, LINF2)
    E, _, rep = geo.build_cone_pair(n1, n2, radius=p["radius"])
    v = vm.verify_minimality(E, LINF2, p["windows"], "brute", h=p["h"])
    ok = rep.roof and delta > 0 and _close(delta, closed, p["tol"]) and v.status == "counterexample"
    return delta, closed, ok, {"verify": v.status, "gain": v.candidate_energy - v.competitor_energy}


def _bernstein(p):
    z = np.asarray(p["zeta"], dtype=float)
    n = p["n"]
    h = 1.0 / n
    g = GridFunction.from_collar(lambda X: np.tanh(p["steep"] * (X @ z - p["shift"])), (n, n), h)
    u = vm.minimize_G(an.cylindrical(an.Euclidean()), g, gap_tol=p["gap_tol"], seed=p["seed"])
    fit = vm.bernstein_fit(u)
    angle = fit.angle_to(z)
    ok = fit.residual <= 2 * h and angle <= p["tol"] and not fit.degenerate and u.meta["max_principle_violation"] == 0
    return angle, 0.0, ok, {"residual": fit.residual, "h": h, "zeta": fit.zeta.tolist(),
                            "max_principle_violation": u.meta["max_principle_violation"],
                            "iterations": u.meta["iterations"], "gap": u.meta["gap"]}


def _slicing(p):
    cube = geo.PolyhedralSet.box([0, 0, 0], [1, 1, 1], window=(-0.5 * np.ones(3), 1.5 * np.ones(3)))
    r = 2.0 * np.ones(3)

    def wedge(s):
        return geo.PolyhedralSet.from_halfspaces([[-s, 0, 1]], [0.0], "intersect", (-r, r))

    nu1, nu2 = np.array([0.0, -0.6, 0.8]), np.array([0.6, 0.0, 0.8])
    sets = {
        "cube": cube, "wedge-1": wedge(1.0), "wedge-0.3": wedge(0.3), "wedge-4": wedge(4.0),
        "tilted-box": geo.PolyhedralSet.from_halfspaces(
            [[1, 0, 1], [-1, 0, -1], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], np.ones(6), "intersect",
            (-3 * np.ones(3), 3 * np.ones(3))),
        "cone-E": geo.PolyhedralSet.from_halfspaces([nu1, nu2], [0, 0], "intersect", (-r, r)),
        "cone-F": geo.PolyhedralSet.from_halfspaces([nu1, nu2], [0, 0], "union", (-r, r)),
        "union-cones": geo.union_of_cones(2, 0.5, 0.5, 1.0, -0.2, 2.0),
        "cone-c1": geo.cone_c1(2, 0.3, 0.4, 2.0),
        "complement-cube": cube.complement(),
    }
    errs = {k: geo.slice_check(S, an.cylindrical(an.Euclidean())).max_rel_error() for k, S in sets.items()}
    worst = max(errs.values())
    return worst, 0.0, worst <= p["tol"], {"errors": errs}


_W3 = [([-0.5, -0.5], [0.5, 0.5]), ([-1.0, -0.5], [0.0, 0.5]), ([0.0, -0.5], [1.0, 0.5])]
_UW = [([-0.5, 0.0], [1.5, 2.0]), ([-1.0, -0.5], [1.0, 1.5]), ([0.0, 0.5], [2.0, 2.5])]
_S2 = 1 / np.sqrt(2)

SCENARIOS: dict[str, Scenario] = {s.id: s for s in [
    Scenario("ex2.2-parallelogram", {"alpha": np.pi / 4, "alphas": [np.pi / 6, np.pi / 4, np.pi / 3], "tol": 1e-9},
             1e-9, "closed-form", _parallelogram),
    Scenario("ex2.6-half-spaces", {"nu": [1.0, 0.4], "radius": 3.0, "h": 0.25, "windows": _W3},
             0.0, "oracle", _half_spaces),
    Scenario("ex2.7-parallel-planes", {"a": 0.0, "b": 1.0, "radii": [0.5, 1.0, 2.0], "small": 0.5, "large": 2.0,
                                       "h": 0.25, "gap_tol": 1e-6, "max_iters": 20000},
             0.0, "closed-form+relaxed", _parallel_planes),
    Scenario("ex2.9-double-cone", {"cones": [(0, 0, 0.5, 0), (0, 0.5, 1.0, -0.5), (-0.5, 0, 0, 0)], "radius": 5.0,
                                   "h": 0.25, "windows": _W3},
             0.0, "oracle", _double_cone),
    Scenario("ex2.10-strip-rectangle", {"l": 2.0, "gamma": 1.0, "h": 0.25}, 1e-12, "oracle", _strip_rectangle),
    Scenario("ex2.11-union-cones-a", {"l": 0.0, "gamma": 1.0, "radius": 5.0, "h": 0.5, "windows": _UW},
             0.0, "oracle", _union_cones),
    Scenario("ex2.11-union-cones-b", {"l": 1.0, "gamma": -1.0, "radius": 5.0, "h": 0.5, "windows": _UW},
             0.0, "oracle", _union_cones),
    Scenario("ex2.11-union-cones-c", {"l": 2.0, "gamma": 1.0, "control": (1.0, 2.0), "radius": 5.0, "h": 0.5,
                                      "windows": _UW},
             0.0, "oracle", _union_cones),
    Scenario("ex3.2-hexagon", {"eps": 1.0}, 0.0, "property", _hexagon),
    Scenario("ex3.4-cube-cross", {"radius": 2.0, "m": [0, 1, 2], "tol": 1e-9, "h": 0.25,
                                  "windows": [([-0.5, -0.5], [0.5, 0.5]), ([0.0, -0.5], [1.0, 0.5])]},
             1e-9, "closed-form+oracle", _cube_cross),
    Scenario("ex4.4-partial-monotone", {}, 0.0, "property", _partial_monotone),
    Scenario("prop5.4-cones", {"angles": [(np.pi / 3, np.pi / 6), (np.pi / 4, 0.0), (np.pi / 3, np.pi / 4)],
                               "radius": 3.0, "h": 0.25, "windows": _W3},
             0.0, "oracle", _cones),
    Scenario("ex5.5-roof", {"nu1": [-_S2, _S2], "nu2": [_S2, _S2], "depth": 0.5, "radius": 3.0, "h": 0.25,
                            "windows": [([-0.5, -0.75], [0.5, 0.25])], "tol": 1e-9},
             1e-9, "closed-form+oracle", _roof),
    Scenario("thm5.8-bernstein", {"zeta": [0.6, 0.8], "n": 64, "steep": 3.0, "shift": 0.7, "gap_tol": 1e-8,
                                  "seed": 0, "tol": 2.0},
             2.0, "property", _bernstein),
    Scenario("propA1-slicing", {"tol": 1e-9}, 1e-9, "property", _slicing),
]}


# --------------------------------------------------------------------------
# running and emitting


def _run_one(sc: Scenario) -> Row:
    t0 = time.perf_counter()
    try:
        computed, expected, passed, details = sc.fn(sc.params)
        status = "pass" if passed else "fail"
    except Exception as exc:  # a crashing scenario is a failing row, not a crashed run
        computed, expected, status, details = f"error: {exc}", "-", "fail", {}
    dt = time.perf_counter() - t0
    details = {"provenance": sc.provenance, **details}
    return Row(sc.id, computed, expected, sc.tol, status, dt, details)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("ANISOPERIM_THREADS", "1")))
    except ValueError:
        return 1


def run(which="all", threads: int | None = None) -> list[Row]:
    """Run one id, a list of ids, or "all"; rows come back sorted by id."""
    if which == "all":
        ids = list(SCENARIOS)
    else:
        ids = [which] if isinstance(which, str) else list(which)
        unknown = [i for i in ids if i not in SCENARIOS]
        if unknown:
            raise KeyError(f"unknown scenario id(s): {', '.join(unknown)}")
    n = _threads() if threads is None else max(1, threads)
    scs = [SCENARIOS[i] for i in ids]
    if n == 1:
        rows = [_run_one(s) for s in scs]
    else:
        with ThreadPoolExecutor(max_workers=n) as ex:
            rows = list(ex.map(_run_one, scs))
    return sorted(rows, key=lambda r: r.id)


def emit(rows: list[Row], fmt: str = "csv") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in rows:
            w.writerow(r.cells())
        return buf.getvalue()
    if fmt == "json":
        return json.dumps([dict(zip(COLUMNS, r.cells())) for r in rows], indent=2) + "\n"
    if fmt == "md":
        lines = ["| " + " | ".join(COLUMNS) + " |", "|" + "---|" * len(COLUMNS)]
        lines += ["| " + " | ".join(c.replace("|", "\\|") for c in r.cells()) + " |" for r in rows]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}; use csv, json or md")


def rows_from_json(text: str) -> list[list[str]]:
    """Parse emitted json back into table cells (column order preserved)."""
    return [[d[c] for c in COLUMNS] for d in json.loads(text)]
