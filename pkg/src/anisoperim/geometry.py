"""Exact anisotropic perimeters of polyhedral sets and piecewise-linear subgraphs.

A :class:`PolyhedralSet` lives inside an axis-aligned bounding window ``W`` and
carries an explicit list of boundary facets.  Sets built from half-spaces keep
their generators, which makes membership tests, horizontal sections and
cylinder lifts exact.  Perimeters are finite sums
``sum(area(facet ∩ A) * norm.eval_dual(normal))`` over facets clipped to a box
window ``A``.

Window convention: boxes are half-open, ``[lo, hi)``.  A facet lying in the
plane ``x_k = hi_k`` of the window is not counted, one lying in ``x_k = lo_k``
is.  With this rule perimeters are exactly additive over boxes that tile a
larger box.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.spatial import ConvexHull

from . import _polytope as poly
from .anisotropy import Anisotropy, PredicateReport, check_generalized_graph, cylindrical

__all__ = [
    "Facet",
    "HalfspaceGroup",
    "PolyhedralSet",
    "PLFunction",
    "CoareaResult",
    "SliceResult",
    "ConeReport",
    "perimeter",
    "subgraph_energy",
    "coarea_decomposition",
    "slice_check",
    "cylinder_identity",
    "cylinder_report",
    "build_cone_pair",
    "roof_cut_delta",
    "roof_cut_closed_form",
    "union_of_cones",
    "cone_c1",
    "cone_c2",
]

TOL = 1e-10


def _unit(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("zero normal vector")
    return v / n


def _check_norm_dim(norm: Anisotropy, m: int, what: str = "set"):
    if norm.dim is not None and norm.dim != m:
        raise ValueError(f"norm has dimension {norm.dim} but the {what} has dimension {m}")


# --------------------------------------------------------------------------
# facets and half-space generators


@dataclass(frozen=True)
class Facet:
    """Flat piece of boundary: outward unit normal, (m-1)-area, anchor point.

    ``vertices`` (convex polytope in the facet plane) makes the facet clippable;
    a facet without vertices is atomic and counts in a window iff its anchor does.
    """

    normal: np.ndarray
    area: float
    anchor: np.ndarray
    vertices: np.ndarray | None = None

    @classmethod
    def from_vertices(cls, normal, vertices) -> "Facet":
        V = poly.prune(np.asarray(vertices, dtype=float))
        m = V.shape[1]
        return cls(_unit(normal), poly.measure(V, m - 1), V.mean(axis=0), V)

    @property
    def dim(self) -> int:
        return len(self.normal)

    def clipped(self, lo, hi) -> tuple[float, np.ndarray | None]:
        """(area, vertices) of the part of the facet inside the half-open box [lo, hi)."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if self.vertices is None:
            inside = np.all(self.anchor >= lo) and np.all(self.anchor < hi)
            return (self.area if inside else 0.0), None
        m = self.dim
        for k in range(m):
            if abs(abs(self.normal[k]) - 1.0) <= TOL:
                c = self.vertices[0, k]
                if abs(c - hi[k]) <= TOL * max(1.0, abs(hi[k])):
                    return 0.0, None
        P = poly.clip_box(self.vertices, lo, hi)
        a = poly.measure(P, m - 1)
        return a, (P if a > 0 else None)

    def to_dict(self) -> dict:
        d = {"normal": self.normal.tolist(), "area": self.area, "anchor": self.anchor.tolist()}
        if self.vertices is not None:
            d["vertices"] = self.vertices.tolist()
        return d


@dataclass(frozen=True)
class HalfspaceGroup:
    """Intersection (or union) of open half-spaces {x . normal < offset}, unit normals."""

    normals: np.ndarray
    offsets: np.ndarray
    op: str = "intersect"

    def __post_init__(self):
        if self.op not in ("intersect", "union"):
            raise ValueError(f"op must be 'intersect' or 'union', got {self.op!r}")

    @classmethod
    def build(cls, normals, offsets, op="intersect") -> "HalfspaceGroup":
        N = np.atleast_2d(np.asarray(normals, dtype=float))
        c = np.atleast_1d(np.asarray(offsets, dtype=float))
        if len(N) != len(c):
            raise ValueError("need one offset per normal")
        if not (np.all(np.isfinite(N)) and np.all(np.isfinite(c))):
            raise ValueError("half-space data must be finite")
        lengths = np.linalg.norm(N, axis=1)
        if np.any(lengths == 0):
            raise ValueError("zero normal vector")
        N, c = N / lengths[:, None], c / lengths
        _, keep = np.unique(np.round(np.c_[N, c], 12), axis=0, return_index=True)
        keep = np.sort(keep)
        return cls(N[keep], c[keep], op)

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    def contains(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        inside = X @ self.normals.T < self.offsets
        if self.op == "intersect":
            return inside.all(axis=-1)
        return inside.any(axis=-1)

    def facets(self, lo, hi) -> list[Facet]:
        m = self.dim
        sign = 1.0 if self.op == "intersect" else -1.0
        # the union's boundary is the boundary of the intersection of complements
        K = poly.halfspace_polytope(sign * self.normals, sign * self.offsets, lo, hi)
        if poly.measure(K, m) <= 0:
            return []
        out = []
        for nu, c in zip(self.normals, self.offsets):
            F = poly.plane_section(K, nu, c)
            a = poly.measure(F, m - 1)
            if a > 0:
                out.append(Facet(nu.copy(), a, F.mean(axis=0), F))
        return out

    def section(self, t: float) -> "HalfspaceGroup":
        """Horizontal section at height t, as a group in R^{m-1}."""
        keep_n, keep_c = [], []
        for nu, c in zip(self.normals, self.offsets):
            nh, cc = nu[:-1], c - nu[-1] * t
            r = np.linalg.norm(nh)
            if r <= TOL:
                truth = cc > 0
                if self.op == "intersect" and not truth:
                    return HalfspaceGroup(np.zeros((0, self.dim - 1)), np.zeros(0), "union")
                if self.op == "union" and truth:
                    return HalfspaceGroup(np.zeros((0, self.dim - 1)), np.zeros(0), "intersect")
                continue
            keep_n.append(nh / r)
            keep_c.append(cc / r)
        N = np.array(keep_n).reshape(-1, self.dim - 1)
        return HalfspaceGroup(N, np.array(keep_c), self.op)

    def lifted(self) -> "HalfspaceGroup":
        return HalfspaceGroup(np.c_[self.normals, np.zeros(len(self.normals))], self.offsets, self.op)

    def transformed(self, Q, shift=None) -> "HalfspaceGroup":
        """Image under x -> Q x + shift, Q orthogonal."""
        N = self.normals @ np.asarray(Q).T
        c = self.offsets if shift is None else self.offsets + N @ np.asarray(shift)
        return HalfspaceGroup(N, c, self.op)

    def to_dict(self) -> dict:
        return {
            "halfspaces": [
                {"normal": n.tolist(), "offset": float(c)} for n, c in zip(self.normals, self.offsets)
            ],
            "op": self.op,
        }


# --------------------------------------------------------------------------
# polyhedral sets


class PolyhedralSet:
    """A set in R^m given by its boundary facets inside a bounding window W.

    ``groups`` (optional) are pairwise disjoint half-space groups whose union is
    the set (or its complement when ``complemented``).
    """

    def __init__(
        self,
        facets: Sequence[Facet],
        window,
        groups: Sequence[HalfspaceGroup] | None = None,
        complemented: bool = False,
    ):
        lo, hi = (np.asarray(w, dtype=float) for w in window)
        if lo.shape != hi.shape or lo.ndim != 1 or np.any(hi <= lo):
            raise ValueError("window must be a pair of corner vectors with lo < hi")
        self.lo, self.hi = lo, hi
        self.dim = len(lo)
        self.facets = tuple(facets)
        self.groups = None if groups is None else tuple(groups)
        self.complemented = complemented
        for f in self.facets:
            if f.dim != self.dim:
                raise ValueError(f"facet has dimension {f.dim} but the window has dimension {self.dim}")
            if abs(np.linalg.norm(f.normal) - 1) > 1e-12:
                raise ValueError("facet normals must have unit length")
            slack = 1e-9 * (1 + np.abs(self.hi - self.lo))
            if np.any(f.anchor < lo - slack) or np.any(f.anchor > hi + slack):
                raise ValueError("facet anchor lies outside the bounding window")

    # -- constructors

    @classmethod
    def from_halfspaces(cls, normals, offsets, op="intersect", window=None) -> "PolyhedralSet":
        g = HalfspaceGroup.build(normals, offsets, op)
        if window is None:
            raise ValueError("a bounding window is required")
        return cls.from_groups([g], window)

    @classmethod
    def from_groups(cls, groups, window, complemented=False) -> "PolyhedralSet":
        lo, hi = (np.asarray(w, dtype=float) for w in window)
        facets = []
        for g in groups:
            if g.dim != len(lo):
                raise ValueError(f"half-spaces have dimension {g.dim} but the window has dimension {len(lo)}")
            facets.extend(g.facets(lo, hi))
        if complemented:
            facets = [replace(f, normal=-f.normal) for f in facets]
        return cls(facets, (lo, hi), groups, complemented)

    @classmethod
    def box(cls, lo, hi, window=None) -> "PolyhedralSet":
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        m = len(lo)
        eye = np.eye(m)
        if window is None:
            pad = 0.5 * (hi - lo)
            window = (lo - pad, hi + pad)
        return cls.from_halfspaces(np.r_[eye, -eye], np.r_[hi, -lo], "intersect", window)

    @classmethod
    def from_facets(cls, facets, window) -> "PolyhedralSet":
        return cls(facets, window)

    @classmethod
    def disjoint_union(cls, parts: Sequence["PolyhedralSet"]) -> "PolyhedralSet":
        """Union of generator-built sets whose interiors and walls do not overlap."""
        if not parts:
            raise ValueError("need at least one part")
        lo, hi = parts[0].lo, parts[0].hi
        groups = []
        for p in parts:
            if p.groups is None or p.complemented:
                raise ValueError("disjoint_union needs generator-built, uncomplemented parts")
            if not (np.allclose(p.lo, lo) and np.allclose(p.hi, hi)):
                raise ValueError("parts must share the bounding window")
            groups.extend(p.groups)
        out = cls.from_groups(groups, (lo, hi))
        # a shared wall would be counted twice; detect it
        diam = np.linalg.norm(hi - lo)
        for i, p in enumerate(parts):
            for f in p.facets:
                pts = [f.anchor] if f.vertices is None else [f.anchor, *(0.5 * (f.anchor + v) for v in f.vertices)]
                probes = np.array(pts) + 1e-7 * diam * f.normal
                for j, q in enumerate(parts):
                    if i != j and q.contains(probes).any():
                        raise ValueError("parts share a wall; merge them into one group")
        return out

    # -- derived sets

    @property
    def window(self):
        return self.lo.copy(), self.hi.copy()

    def contains(self, X) -> np.ndarray:
        if self.groups is None:
            raise ValueError("membership needs a generator-built set")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        inside = np.zeros(len(X), dtype=bool)
        for g in self.groups:
            inside |= g.contains(X)
        return ~inside if self.complemented else inside

    def complement(self) -> "PolyhedralSet":
        facets = [replace(f, normal=-f.normal) for f in self.facets]
        return PolyhedralSet(facets, self.window, self.groups, not self.complemented)

    def scaled(self, lam: float) -> "PolyhedralSet":
        if not lam > 0:
            raise ValueError("scale factor must be positive")
        m = self.dim
        facets = [
            Facet(
                f.normal,
                f.area * lam ** (m - 1),
                f.anchor * lam,
                None if f.vertices is None else f.vertices * lam,
            )
            for f in self.facets
        ]
        groups = None
        if self.groups is not None:
            groups = [HalfspaceGroup(g.normals, g.offsets * lam, g.op) for g in self.groups]
        return PolyhedralSet(facets, (self.lo * lam, self.hi * lam), groups, self.complemented)

    def section(self, t: float) -> "PolyhedralSet":
        """Horizontal section {x_hat : (x_hat, t) in E} inside the projected window."""
        if self.groups is None:
            raise ValueError("sections need a generator-built set")
        if self.dim < 2:
            raise ValueError("sections need m >= 2")
        groups = [g.section(t) for g in self.groups]
        return PolyhedralSet.from_groups(groups, (self.lo[:-1], self.hi[:-1]), self.complemented)

    def cylinder(self, half_height: float) -> "PolyhedralSet":
        """E x R inside the window W x [-half_height, half_height]."""
        lo = np.r_[self.lo, -half_height]
        hi = np.r_[self.hi, half_height]
        if self.groups is not None:
            return PolyhedralSet.from_groups([g.lifted() for g in self.groups], (lo, hi), self.complemented)
        facets = []
        for f in self.facets:
            if f.vertices is None:
                facets.append(Facet(np.r_[f.normal, 0.0], f.area * 2 * half_height, np.r_[f.anchor, 0.0]))
            else:
                V = np.vstack([np.c_[f.vertices, np.full(len(f.vertices), s)] for s in (-half_height, half_height)])
                facets.append(Facet.from_vertices(np.r_[f.normal, 0.0], V))
        return PolyhedralSet(facets, (lo, hi))

    def transformed(self, Q, window=None) -> "PolyhedralSet":
        """Image under the orthogonal map Q (generator-built sets only)."""
        if self.groups is None:
            raise ValueError("transforms need a generator-built set")
        win = self.window if window is None else window
        return PolyhedralSet.from_groups([g.transformed(Q) for g in self.groups], win, self.complemented)

    def to_dict(self) -> dict:
        d: dict = {"window": [self.lo.tolist(), self.hi.tolist()]}
        if self.groups is not None and len(self.groups) == 1 and not self.complemented:
            d.update(self.groups[0].to_dict())
        elif self.groups is not None:
            d["groups"] = [g.to_dict() for g in self.groups]
            d["complement"] = self.complemented
        else:
            d["facets"] = [f.to_dict() for f in self.facets]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PolyhedralSet":
        """Inverse of :meth:`to_dict`; unknown keys are rejected.

        Accepted forms: ``{"halfspaces": [...], "op", "window"}``,
        ``{"groups": [{"halfspaces", "op"}, ...], "complement", "window"}`` and
        ``{"facets": [{"normal", "area", "anchor", "vertices"?}], "window"?}``.
        A facet list without a window gets the anchors' bounding box padded by 1.
        """
        if not isinstance(d, dict):
            raise ValueError(f"set descriptor must be an object, got {type(d).__name__}")
        forms = [k for k in ("halfspaces", "groups", "facets") if k in d]
        if len(forms) != 1:
            raise ValueError("set descriptor needs exactly one of 'halfspaces', 'groups', 'facets'")
        allowed = {"halfspaces": {"halfspaces", "op", "window"}, "groups": {"groups", "complement", "window"},
                   "facets": {"facets", "window"}}[forms[0]]
        extra = set(d) - allowed
        if extra:
            raise ValueError(f"unknown keys in set descriptor: {sorted(extra)}")

        def group(g):
            bad = set(g) - {"halfspaces", "op"}
            if bad:
                raise ValueError(f"unknown keys in half-space group: {sorted(bad)}")
            hs = g["halfspaces"]
            for h in hs:
                if set(h) - {"normal", "offset"}:
                    raise ValueError(f"unknown keys in half-space: {sorted(set(h) - {'normal', 'offset'})}")
            return HalfspaceGroup.build([h["normal"] for h in hs], [h.get("offset", 0.0) for h in hs],
                                        g.get("op", "intersect"))

        if forms[0] == "facets":
            facets = []
            for f in d["facets"]:
                bad = set(f) - {"normal", "area", "anchor", "vertices"}
                if bad:
                    raise ValueError(f"unknown keys in facet: {sorted(bad)}")
                V = None if f.get("vertices") is None else np.asarray(f["vertices"], dtype=float)
                facets.append(Facet(_unit(f["normal"]), float(f["area"]), np.asarray(f["anchor"], dtype=float), V))
            if "window" in d:
                window = d["window"]
            else:
                if not facets:
                    raise ValueError("an empty facet list needs a window")
                A = np.array([f.anchor for f in facets])
                window = (A.min(axis=0) - 1.0, A.max(axis=0) + 1.0)
            return cls(facets, window)
        if "window" not in d:
            raise ValueError("a bounding window is required")
        if forms[0] == "halfspaces":
            return cls.from_groups([group({k: d[k] for k in ("halfspaces", "op") if k in d})], d["window"])
        return cls.from_groups([group(g) for g in d["groups"]], d["window"], bool(d.get("complement", False)))

    def __repr__(self):
        return f"PolyhedralSet(dim={self.dim}, facets={len(self.facets)}, window=({self.lo}, {self.hi}))"


def cone_c1(n: int, l: float, gamma: float, radius: float = 1.0) -> PolyhedralSet:
    """(-inf, l) x R^{n-1} x (gamma, inf) inside [-radius, radius]^{n+1}."""
    m = n + 1
    e1, et = np.eye(m)[0], np.eye(m)[-1]
    return PolyhedralSet.from_halfspaces([e1, -et], [l, -gamma], "intersect", (-radius * np.ones(m), radius * np.ones(m)))


def cone_c2(n: int, l: float, gamma: float, radius: float = 1.0) -> PolyhedralSet:
    """(l, inf) x R^{n-1} x (-inf, gamma) inside [-radius, radius]^{n+1}."""
    m = n + 1
    e1, et = np.eye(m)[0], np.eye(m)[-1]
    return PolyhedralSet.from_halfspaces([-e1, et], [-l, gamma], "intersect", (-radius * np.ones(m), radius * np.ones(m)))


def union_of_cones(n: int, l1: float, g1: float, l2: float, g2: float, radius: float = 1.0) -> PolyhedralSet:
    """C1(l1, g1) united with C2(l2, g2); the pieces must not share a wall (l1 <= l2 or g1 >= g2)."""
    return PolyhedralSet.disjoint_union([cone_c1(n, l1, g1, radius), cone_c2(n, l2, g2, radius)])


# --------------------------------------------------------------------------
# perimeter


def _resolve_window(E: PolyhedralSet, window):
    if window is None:
        return E.lo, E.hi
    lo, hi = (np.asarray(w, dtype=float) for w in window)
    if lo.shape != E.lo.shape:
        raise ValueError(f"window has dimension {len(lo)} but the set has dimension {E.dim}")
    slack = 1e-12 * (1 + np.abs(E.hi - E.lo))
    if np.any(lo < E.lo - slack) or np.any(hi > E.hi + slack):
        raise ValueError("window exceeds the set's bounding window; facet data is incomplete there")
    return lo, hi


def perimeter(E: PolyhedralSet, norm: Anisotropy, window=None) -> float:
    """P_norm(E, A): sum over facets clipped to A of area times the dual norm of the normal."""
    _check_norm_dim(norm, E.dim)
    lo, hi = _resolve_window(E, window)
    if not E.facets:
        return 0.0
    areas = np.array([f.clipped(lo, hi)[0] for f in E.facets])
    normals = np.array([f.normal for f in E.facets])
    return float(np.sum(areas * norm.eval_dual(normals)))


# --------------------------------------------------------------------------
# slicing and cylinders


@dataclass
class SliceResult:
    lhs_horizontal: float
    rhs_horizontal: float
    lhs_vertical: float
    rhs_vertical: float

    def as_tuple(self):
        return self.lhs_horizontal, self.rhs_horizontal, self.lhs_vertical, self.rhs_vertical

    def max_rel_error(self) -> float:
        def rel(a, b):
            return abs(a - b) / max(1.0, abs(a), abs(b))

        return max(rel(self.lhs_horizontal, self.rhs_horizontal), rel(self.lhs_vertical, self.rhs_vertical))


def slice_check(E: PolyhedralSet, norm: Anisotropy, window=None) -> SliceResult:
    """Both sides of the horizontal and vertical slicing identities on a box window.

    Horizontal: facet integral of Phi^o(nu_hat, 0) versus the t-integral of the
    section perimeters.  Sections come from the generators when available
    (perimeter of E_t under the norm whose dual is Phi^o(., 0)); otherwise the
    facets themselves are cut by the planes {t = const}.  Section perimeters are
    polynomial of degree <= 2 in t between facet-vertex heights, so three-point
    Gauss-Legendre per interval is exact.

    Vertical: facet integral of Phi^o(0, nu_t) versus Phi^o(0, 1) times the
    measure of the facets' vertical projections (one crossing per vertical line).
    """
    m = E.dim
    if m < 2:
        raise ValueError("slice_check needs m >= 2")
    _check_norm_dim(norm, m)
    lo, hi = _resolve_window(E, window)
    clipped = [(f, *f.clipped(lo, hi)) for f in E.facets]
    clipped = [(f, a, V) for f, a, V in clipped if a > 0]
    if any(V is None for _, _, V in clipped):
        raise ValueError("slice_check needs facets with vertices")

    normals = np.array([f.normal for f, _, _ in clipped]).reshape(-1, m)
    areas = np.array([a for _, a, _ in clipped])
    flat = np.c_[normals[:, :-1], np.zeros(len(normals))]
    vert = np.c_[np.zeros((len(normals), m - 1)), normals[:, -1]]
    lhs_h = float(np.sum(areas * norm.eval_dual(flat))) if len(areas) else 0.0
    lhs_v = float(np.sum(areas * norm.eval_dual(vert))) if len(areas) else 0.0

    heights = {lo[-1], hi[-1]}
    for _, _, V in clipped:
        heights.update(V[:, -1].tolist())
    breaks = np.unique(np.clip(np.array(sorted(heights)), lo[-1], hi[-1]))
    nodes, weights = np.polynomial.legendre.leggauss(3)

    if E.groups is not None:
        slice_norm = norm.dual_restriction()

        def section_perimeter(t):
            return perimeter(E.section(t), slice_norm, (lo[:-1], hi[:-1]))

    else:
        et = np.eye(m)[-1]

        def section_perimeter(t):
            total = 0.0
            for f, _, V in clipped:
                nh = f.normal[:-1]
                r = np.linalg.norm(nh)
                if r <= TOL:
                    continue
                S = poly.plane_section(V, et, t)
                total += poly.measure(S[:, :-1], m - 2) * float(norm.eval_dual(np.r_[nh / r, 0.0]))
            return total

    rhs_h = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b - a <= 0:
            continue
        ts = 0.5 * (a + b) + 0.5 * (b - a) * nodes
        rhs_h += 0.5 * (b - a) * sum(w * section_perimeter(t) for w, t in zip(weights, ts))

    proj = sum(poly.measure(V[:, :-1], m - 1) for _, _, V in clipped)
    rhs_v = float(norm.eval_dual(np.eye(m)[-1])) * proj
    return SliceResult(lhs_h, float(rhs_h), lhs_v, float(rhs_v))


def cylinder_identity(E_hat: PolyhedralSet, phi: Anisotropy, m: float, window=None) -> tuple[float, float]:
    """(lateral perimeter of E_hat x R in A_hat x (-(m+1), m+1), 2(m+1) P_phi(E_hat, A_hat)).

    The left side is computed in R^{n+1} with the cylindrical norm over phi.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    lo, hi = _resolve_window(E_hat, window)
    H = m + 1.0
    lifted = E_hat.cylinder(H + 1.0)
    lhs = perimeter(lifted, cylindrical(phi), (np.r_[lo, -H], np.r_[hi, H]))
    rhs = 2 * H * perimeter(E_hat, phi, (lo, hi))
    return lhs, rhs


def cylinder_report(E_hat: PolyhedralSet, Phi: Anisotropy, m: float, window=None) -> dict:
    """Perimeter of a cylinder under a general Phi against both candidate base norms.

    Reports the lateral perimeter, 2(m+1) times the perimeter under the
    restriction Phi|_{t=0} and under the norm whose dual is Phi^o(., 0), plus
    the generalized-graph verdict (the two agree when it holds).
    """
    lo, hi = _resolve_window(E_hat, window)
    H = m + 1.0
    lifted = E_hat.cylinder(H + 1.0)
    lhs = perimeter(lifted, Phi, (np.r_[lo, -H], np.r_[hi, H]))
    rep: PredicateReport = check_generalized_graph(Phi, dim=E_hat.dim + 1)
    return {
        "lateral": lhs,
        "restriction": 2 * H * perimeter(E_hat, Phi.restriction(), (lo, hi)),
        "dual_restriction": 2 * H * perimeter(E_hat, Phi.dual_restriction(), (lo, hi)),
        "generalized_graph": rep.verdict,
    }


# --------------------------------------------------------------------------
# cones


@dataclass
class ConeReport:
    partial_H: bool
    cond_a: bool
    cond_b: bool
    lambdas: tuple[float, float]
    roof: bool
    degenerate: bool = False
    coincident: bool = False

    @property
    def minimizing(self) -> bool:
        return self.coincident or (self.partial_H and self.cond_a and self.cond_b)


def _angle(u, v):
    return float(np.arccos(np.clip(np.dot(u, v), -1.0, 1.0)))


def build_cone_pair(nu1, nu2, radius: float = 1.0, tol: float = 1e-9):
    """E = H1 ∩ H2 and F = H1 ∪ H2 for H_i = {x . nu_i < 0}, with a hypothesis report."""
    nu1 = np.asarray(nu1, dtype=float)
    nu2 = np.asarray(nu2, dtype=float)
    if nu1.shape != nu2.shape or nu1.ndim != 1 or len(nu1) < 2:
        raise ValueError("normals must be vectors of the same length m >= 2")
    if abs(np.linalg.norm(nu1) - 1) > tol or abs(np.linalg.norm(nu2) - 1) > tol:
        raise ValueError("normals must be unit vectors")
    m = len(nu1)
    e = np.eye(m)[-1]
    win = (-radius * np.ones(m), radius * np.ones(m))
    lam = tuple(
        float(np.sqrt(max(0.0, 1 - (v @ e) ** 2)) / (v @ e)) if abs(v @ e) > tol else np.inf
        for v in (nu1, nu2)
    )
    if np.allclose(nu1, nu2, atol=tol):
        H = PolyhedralSet.from_halfspaces([nu1], [0.0], "intersect", win)
        return H, H, ConeReport(True, True, True, lam, False, coincident=True)
    if np.allclose(nu1, -nu2, atol=tol):
        E = PolyhedralSet.from_halfspaces([nu1, nu2], [0.0, 0.0], "intersect", win)
        F = PolyhedralSet.from_halfspaces([nu1, nu2], [0.0, 0.0], "union", win)
        return E, F, ConeReport(False, False, False, lam, False, degenerate=True)
    partial = np.linalg.matrix_rank(np.vstack([nu1, nu2, e]), tol=1e-9) == 2
    a = nu1 @ nu2 >= -tol and nu2 @ e >= nu1 @ e - tol and nu1 @ e >= -tol
    b = abs(_angle(nu1, nu2) + _angle(nu2, e) - _angle(nu1, e)) <= tol
    d = abs(_angle(nu1, nu2) - _angle(nu1, e) - _angle(e, nu2)) <= tol
    E = PolyhedralSet.from_halfspaces([nu1, nu2], [0.0, 0.0], "intersect", win)
    F = PolyhedralSet.from_halfspaces([nu1, nu2], [0.0, 0.0], "union", win)
    return E, F, ConeReport(bool(partial), bool(a), bool(b), lam, bool(d and not b))


def _roof_triangle(nu1, nu2, depth):
    nu1 = np.asarray(nu1, dtype=float)
    nu2 = np.asarray(nu2, dtype=float)
    if len(nu1) != 2:
        raise ValueError("roof cuts are planar (n = 1)")
    if depth <= 0:
        raise ValueError("depth must be positive")
    *_, rep = build_cone_pair(nu1, nu2)
    if not rep.roof:
        raise ValueError("normals are not in roof configuration")
    pts = []
    for v in (nu1, nu2):
        if abs(v[0]) <= TOL:
            raise ValueError("roof side is horizontal; no triangle")
        pts.append(np.array([depth * v[1] / v[0], -depth]))
    p1, p2 = pts
    T = np.array([[0.0, 0.0], p1, p2])
    if poly.measure(T, 2) <= 0:
        raise ValueError("degenerate roof triangle")
    return p1, p2


def roof_cut_closed_form(nu1, nu2, depth: float, norm: Anisotropy) -> float:
    """a1 Phi^o(nu1) + a2 Phi^o(nu2) - b Phi^o(e2) for the triangle cut at depth d."""
    p1, p2 = _roof_triangle(nu1, nu2, depth)
    a1, a2, b = np.linalg.norm(p1), np.linalg.norm(p2), np.linalg.norm(p1 - p2)
    return float(a1 * norm.eval_dual(nu1) + a2 * norm.eval_dual(nu2) - b * norm.eval_dual([0.0, 1.0]))


def roof_cut_delta(nu1, nu2, depth: float, norm: Anisotropy) -> float:
    """P(E) - P(E minus T) for the roof cone E and the triangle T above {t = -depth}.

    Both perimeters are evaluated with :func:`perimeter` on a window containing T.
    """
    p1, p2 = _roof_triangle(nu1, nu2, depth)
    r = 2.0 * max(np.abs(p1).max(), np.abs(p2).max(), depth) + 1.0
    win = (-r * np.ones(2), r * np.ones(2))
    E = PolyhedralSet.from_halfspaces([nu1, nu2], [0.0, 0.0], "intersect", win)
    cut = PolyhedralSet.from_halfspaces([nu1, nu2, [0.0, 1.0]], [0.0, 0.0, -depth], "intersect", win)
    return perimeter(E, norm) - perimeter(cut, norm)


# --------------------------------------------------------------------------
# piecewise-linear functions on planar partitions


def _ccw(P):
    P = np.asarray(P, dtype=float)
    hull = ConvexHull(P)
    return P[hull.vertices]


@dataclass(frozen=True)
class JumpEdge:
    """Shared edge segment p0-p1; ``normal`` points from cell ``left`` to cell ``right``."""

    p0: np.ndarray
    p1: np.ndarray
    normal: np.ndarray
    left: int
    right: int

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.p1 - self.p0))


class PLFunction:
    """Piecewise-affine function on a partition of a planar domain into convex polygons.

    Cell i carries u(x) = grads[i] . x + offsets[i].
    """

    def __init__(self, cells, grads, offsets):
        self.cells = [_ccw(c) for c in cells]
        self.grads = np.asarray(grads, dtype=float).reshape(len(self.cells), 2)
        self.offsets = np.asarray(offsets, dtype=float).reshape(len(self.cells))
        if not (np.all(np.isfinite(self.grads)) and np.all(np.isfinite(self.offsets))):
            raise ValueError("PL function data must be finite")
        self.areas = np.array([poly.measure(c, 2) for c in self.cells])
        self.edges = self._find_edges()

    @classmethod
    def piecewise_constant(cls, cells, values) -> "PLFunction":
        return cls(cells, np.zeros((len(cells), 2)), values)

    @classmethod
    def from_grid(cls, values, h: float = 1.0, origin=(0.0, 0.0), grads=None) -> "PLFunction":
        """Cells are the lattice squares; values[i, j] sits on [x0+ih, x0+(i+1)h] x [y0+jh, ...]."""
        values = np.asarray(values, dtype=float)
        n1, n2 = values.shape
        cells, offs, gs = [], [], []
        for i in range(n1):
            for j in range(n2):
                x0 = origin[0] + i * h
                y0 = origin[1] + j * h
                cells.append(np.array([[x0, y0], [x0 + h, y0], [x0 + h, y0 + h], [x0, y0 + h]]))
                g = np.zeros(2) if grads is None else np.asarray(grads[i][j], dtype=float)
                c = np.array([x0 + h / 2, y0 + h / 2])
                gs.append(g)
                offs.append(values[i, j] - g @ c)
        return cls(cells, gs, offs)

    @property
    def is_piecewise_constant(self) -> bool:
        return bool(np.all(self.grads == 0))

    def value(self, cell: int, x) -> np.ndarray:
        return np.asarray(x) @ self.grads[cell] + self.offsets[cell]

    def _find_edges(self) -> list[JumpEdge]:
        lines: dict = {}
        for ci, P in enumerate(self.cells):
            for p, q in zip(P, np.roll(P, -1, axis=0)):
                d = q - p
                L = np.linalg.norm(d)
                if L <= TOL:
                    continue
                nrm = np.array([d[1], -d[0]]) / L  # outward for a ccw polygon
                canon = nrm if (nrm[0] > TOL or (abs(nrm[0]) <= TOL and nrm[1] > 0)) else -nrm
                key = (round(canon[0], 9), round(canon[1], 9), round(float(canon @ p), 9))
                lines.setdefault(key, []).append((ci, p, q, nrm))
        edges = []
        for segs in lines.values():
            for a in range(len(segs)):
                ca, pa, qa, na = segs[a]
                for b in range(a + 1, len(segs)):
                    cb, pb, qb, nb = segs[b]
                    if na @ nb > 0:
                        continue
                    d = (qa - pa) / np.linalg.norm(qa - pa)
                    s0 = max(min(0.0, (qa - pa) @ d), min((pb - pa) @ d, (qb - pa) @ d))
                    s1 = min(max(0.0, (qa - pa) @ d), max((pb - pa) @ d, (qb - pa) @ d))
                    if s1 - s0 > TOL:
                        edges.append(JumpEdge(pa + s0 * d, pa + s1 * d, na.copy(), ca, cb))
        return edges

    def subgraph_set(self, M: float) -> PolyhedralSet:
        """Boundary of {(x, t) : t < u(x)} inside bbox x [-M, M], without caps or domain walls."""
        allpts = np.vstack(self.cells)
        lo = np.r_[allpts.min(axis=0), -M]
        hi = np.r_[allpts.max(axis=0), M]
        facets = []
        for i, P in enumerate(self.cells):
            top = np.c_[P, self.value(i, P)]
            if np.any(np.abs(top[:, 2]) >= M):
                raise ValueError("M must exceed sup |u|")
            nu = np.r_[-self.grads[i], 1.0]
            facets.append(Facet.from_vertices(nu, top))
        for e in self.edges:
            for p0, p1, sgn in _jump_pieces(self, e):
                ua = [self.value(e.left, p) for p in (p0, p1)]
                ub = [self.value(e.right, p) for p in (p0, p1)]
                V = np.array([[*p0, ua[0]], [*p1, ua[1]], [*p1, ub[1]], [*p0, ub[0]]])
                if poly.measure(V, 2) > 0:
                    facets.append(Facet.from_vertices(np.r_[sgn * e.normal, 0.0], V))
        return PolyhedralSet(facets, (lo, hi))


def _jump_pieces(u: PLFunction, e: JumpEdge, p0=None, p1=None):
    """Split a (sub)edge where the jump u_left - u_right changes sign: (q0, q1, sign)."""
    p0 = e.p0 if p0 is None else p0
    p1 = e.p1 if p1 is None else p1
    j0 = u.value(e.left, p0) - u.value(e.right, p0)
    j1 = u.value(e.left, p1) - u.value(e.right, p1)
    out = []
    if j0 * j1 < 0:
        s = j0 / (j0 - j1)
        mid = p0 + s * (p1 - p0)
        out = [(p0, mid, np.sign(j0)), (mid, p1, np.sign(j1))]
    else:
        sgn = np.sign(j0 + j1)
        if sgn != 0:
            out = [(p0, p1, sgn)]
    return out


def _region_halfspaces(region):
    """Half-spaces (A, b) with region = {A x <= b} for a convex polygon or box ((lo), (hi))."""
    if isinstance(region, (tuple, list)) and len(region) == 2 and np.ndim(region[0]) == 1:
        lo, hi = (np.asarray(r, dtype=float) for r in region)
        return np.r_[np.eye(2), -np.eye(2)], np.r_[hi, -lo], poly.box_vertices(lo, hi)
    P = np.asarray(region, dtype=float)
    eq = ConvexHull(P).equations
    return eq[:, :2], -eq[:, 2], P


def _clip_region(P, A, b):
    for a, c in zip(A, b):
        P = poly.clip(P, a, c)
        if len(P) == 0:
            break
    return P


def _pos_integral(j0, j1, L):
    """Integral of max(j, 0) for j linear from j0 to j1 over a segment of length L."""
    if j0 >= 0 and j1 >= 0:
        return 0.5 * L * (j0 + j1)
    if j0 <= 0 and j1 <= 0:
        return 0.0
    p = max(j0, j1)
    return 0.5 * L * p * p / (abs(j0) + abs(j1))


def _edge_terms(u: PLFunction, region):
    """Yield (edge, clipped length, integral of jump^+, integral of jump^-)."""
    if region is None:
        A = b = None
    else:
        A, b, _ = _region_halfspaces(region)
    for e in u.edges:
        seg = np.array([e.p0, e.p1])
        if A is not None:
            seg = _clip_region(seg, A, b)
            if poly.measure(seg, 1) <= 0:
                continue
        q0, q1 = seg[0], seg[-1]
        L = float(np.linalg.norm(q1 - q0))
        j0 = float(u.value(e.left, q0) - u.value(e.right, q0))
        j1 = float(u.value(e.left, q1) - u.value(e.right, q1))
        yield e, L, _pos_integral(j0, j1, L), _pos_integral(-j0, -j1, L)


def _cell_areas(u: PLFunction, region):
    if region is None:
        return u.areas.copy()
    A, b, R = _region_halfspaces(region)
    areas = np.array([poly.measure(_clip_region(c, A, b), 2) for c in u.cells])
    if areas.sum() < poly.measure(R, 2) * (1 - 1e-9):
        raise ValueError("region extends outside the partition")
    return areas


def subgraph_energy(u: PLFunction, norm: Anisotropy, region=None) -> float:
    """Integral of Phi^o(-Du, 1) over the region: absolutely continuous part plus jump walls."""
    _check_norm_dim(norm, 3, "subgraph")
    areas = _cell_areas(u, region)
    total = float(np.sum(areas * norm.eval_dual(np.c_[-u.grads, np.ones(len(areas))])))
    for e, _, up, down in _edge_terms(u, region):
        if up:
            total += up * float(norm.eval_dual(np.r_[e.normal, 0.0]))
        if down:
            total += down * float(norm.eval_dual(np.r_[-e.normal, 0.0]))
    return total


@dataclass
class CoareaResult:
    total: float
    levels: list  # (lambda, P_phi({u > lambda}))
    widths: list  # length of the value interval each level represents

    @property
    def integral(self) -> float:
        return float(sum(p * w for (_, p), w in zip(self.levels, self.widths)))


def coarea_decomposition(u: PLFunction, phi: Anisotropy, region=None) -> CoareaResult:
    """Total phi-variation of a piecewise-constant function and its level-set perimeters.

    ``levels`` holds one representative level between each pair of consecutive
    values; the level-set perimeter is constant on that interval.
    """
    if not u.is_piecewise_constant:
        raise ValueError("coarea_decomposition needs a piecewise-constant function")
    _check_norm_dim(phi, 2, "partition")
    _cell_areas(u, region)  # region validation
    terms = []
    for e, L, _, _ in _edge_terms(u, region):
        va, vb = u.offsets[e.left], u.offsets[e.right]
        if va == vb:
            continue
        nu = e.normal if va > vb else -e.normal  # outward for the upper level set
        terms.append((min(va, vb), max(va, vb), L * float(phi.eval_dual(nu))))
    total = float(sum((hi - lo) * w for lo, hi, w in terms))
    vals = np.unique(u.offsets)
    levels, widths = [], []
    for a, b in zip(vals[:-1], vals[1:]):
        lam = 0.5 * (a + b)
        P = float(sum(w for lo, hi, w in terms if lo < lam < hi))
        levels.append((float(lam), P))
        widths.append(float(b - a))
    return CoareaResult(total, levels, widths)
