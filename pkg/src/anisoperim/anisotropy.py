"""Norms on R^m: evaluation, duality, restriction and structural predicates.

Every norm is an immutable object exposing ``eval`` (the norm), ``eval_dual``
(its dual, i.e. the support function of the unit ball) and ``dual()``, which
returns the dual norm as another :class:`Anisotropy`.  Evaluation is
vectorised over the last axis.

Supported kinds::

    euclidean          |x|
    pnorm(p)           (sum |x_i|^p)^(1/p), 1 <= p <= inf
    quadratic(A)       sqrt(x . A x), A symmetric positive definite
    polytope(V)        Minkowski functional of conv(V), V symmetric, 1 <= m <= 4
    cylindrical(base)  max(base(x_hat), |x_last|)
    conical(base)      base(x_hat) + |x_last|
    omega(w, base)     w(base(x_hat), |x_last|), w a p-combination on the quadrant
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.stats import norm as _gauss
from scipy.stats import qmc

__all__ = [
    "Anisotropy",
    "Euclidean",
    "PNorm",
    "Quadratic",
    "Polytope",
    "Composed",
    "Omega",
    "PredicateReport",
    "cylindrical",
    "conical",
    "omega_norm",
    "parallelogram",
    "hexagon",
    "from_dict",
    "omega_dual",
    "check_generalized_graph",
    "check_partial_monotonicity",
    "restriction_gap",
    "sphere_directions",
]

DEFAULT_TOL = 1e-9


def _conjugate(p):
    if p == 1:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _as_vectors(x, dim):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x[None]
    if not np.all(np.isfinite(x)):
        raise ValueError("norm evaluation requires finite input")
    if dim is not None and x.shape[-1] != dim:
        raise ValueError(f"expected vectors of length {dim}, got {x.shape[-1]}")
    return x


def _pnorm(x, p):
    ax = np.abs(x)
    if np.isinf(p):
        return ax.max(axis=-1)
    if p == 1:
        return ax.sum(axis=-1)
    if p == 2:
        return np.sqrt((ax * ax).sum(axis=-1))
    scale = ax.max(axis=-1, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    return scale[..., 0] * ((ax / safe) ** p).sum(axis=-1) ** (1.0 / p)


# --------------------------------------------------------------------------
# Omega: the quadrant "outer" norm used by partially monotone norms


@dataclass(frozen=True)
class Omega:
    """p-combination ``(s^p + t^p)^(1/p)`` on the quadrant; p=inf is max, p=1 is sum."""

    p: float

    def __post_init__(self):
        if not (self.p >= 1):
            raise ValueError(f"omega exponent must be >= 1, got {self.p}")

    @classmethod
    def parse(cls, spec) -> "Omega":
        if isinstance(spec, Omega):
            return spec
        if spec == "max":
            return cls(np.inf)
        if spec == "sum":
            return cls(1.0)
        if isinstance(spec, dict):
            if set(spec) != {"p"}:
                raise ValueError(f"omega spec must be 'max', 'sum' or {{'p': ...}}, got {spec!r}")
            p = spec["p"]
            return cls(np.inf if p in ("inf", float("inf")) else float(p))
        raise ValueError(f"unknown omega spec {spec!r}")

    @property
    def name(self) -> str:
        if np.isinf(self.p):
            return "max"
        if self.p == 1:
            return "sum"
        return "p"

    def to_spec(self):
        if self.name == "p":
            return {"p": self.p}
        return self.name

    def __call__(self, s, t):
        s = np.abs(np.asarray(s, dtype=float))
        t = np.abs(np.asarray(t, dtype=float))
        return _pnorm(np.stack(np.broadcast_arrays(s, t), axis=-1), self.p)

    def dual(self) -> "Omega":
        return Omega(_conjugate(self.p))

    def maximizer(self, a: float, b: float) -> tuple[float, float]:
        """Point (s1, s2) with omega(s1, s2) = 1 maximising s1*a + s2*b (a, b >= 0).

        Ties are broken toward zeros, then toward the midpoint.
        """
        if a == 0 and b == 0:
            return 0.0, 0.0
        if np.isinf(self.p):
            return (1.0 if a > 0 else 0.0), (1.0 if b > 0 else 0.0)
        if self.p == 1:
            if a > b:
                return 1.0, 0.0
            if b > a:
                return 0.0, 1.0
            return 0.5, 0.5
        q = _conjugate(self.p)
        nq = _pnorm(np.array([a, b]), q)
        return (a / nq) ** (q - 1), (b / nq) ** (q - 1)


def omega_dual(spec, s_star: float, t_star: float) -> float:
    """Dual of the quadrant norm omega evaluated at (s*, t*) >= 0."""
    if s_star < 0 or t_star < 0:
        raise ValueError("omega_dual is defined on the nonnegative quadrant")
    return float(Omega.parse(spec).dual()(s_star, t_star))


# --------------------------------------------------------------------------
# Norm classes


class Anisotropy:
    """Base class.  Subclasses implement ``_eval``, ``_make_dual`` and friends."""

    kind: str = "abstract"
    dim: int | None = None

    def eval(self, xi):
        x = _as_vectors(xi, self.dim)
        out = self._eval(x)
        return float(out) if np.ndim(out) == 0 else out

    __call__ = eval

    def eval_dual(self, xi_star):
        return self.dual().eval(xi_star)

    def dual(self) -> "Anisotropy":
        cached = self.__dict__.get("_dual")
        if cached is None:
            cached = self._make_dual()
            object.__setattr__(self, "_dual", cached)
            object.__setattr__(cached, "_dual", self)
        return cached

    def restriction(self) -> "Anisotropy":
        """The norm xi_hat -> Phi(xi_hat, 0) on the horizontal hyperplane."""
        raise NotImplementedError(f"no restriction rule for kind {self.kind!r}")

    def dual_restriction(self) -> "Anisotropy":
        """The norm whose dual is xi_hat* -> Phi^o(xi_hat*, 0)."""
        return self.dual().restriction().dual()

    def calibration(self, nu) -> np.ndarray:
        """zeta with Phi(zeta) = 1 and nu . zeta = Phi^o(nu)."""
        raise NotImplementedError(f"no calibration rule for kind {self.kind!r}")

    def project_ball(self, p) -> np.ndarray:
        """Euclidean projection onto the unit ball, vectorised over the last axis."""
        raise NotImplementedError(f"no unit-ball projection for kind {self.kind!r}")

    def to_dict(self) -> dict:
        raise NotImplementedError

    def structurally_symmetric_last(self) -> bool:
        """True when Phi(x_hat, -t) = Phi(x_hat, t) holds by construction."""
        return False

    def structurally_partially_monotone(self) -> bool:
        return False

    def __repr__(self):
        return f"{type(self).__name__}({self.to_dict()!r})"


class Euclidean(Anisotropy):
    kind = "euclidean"

    def __init__(self, dim: int | None = None):
        self.dim = dim

    def _eval(self, x):
        return np.sqrt((x * x).sum(axis=-1))

    def _make_dual(self):
        return Euclidean(self.dim)

    def restriction(self):
        return Euclidean(None if self.dim is None else self.dim - 1)

    def calibration(self, nu):
        nu = _as_vectors(nu, self.dim)
        return nu / np.linalg.norm(nu)

    def project_ball(self, p):
        r = np.sqrt((p * p).sum(axis=-1, keepdims=True))
        return p / np.maximum(r, 1.0)

    def to_dict(self):
        d = {"kind": "euclidean"}
        if self.dim is not None:
            d["dim"] = self.dim
        return d

    def structurally_symmetric_last(self):
        return True

    def structurally_partially_monotone(self):
        return True


class PNorm(Anisotropy):
    kind = "pnorm"

    def __init__(self, p: float, dim: int | None = None):
        if not (p >= 1):
            raise ValueError(f"p-norm needs p >= 1, got {p}")
        self.p = float(p)
        self.dim = dim

    def _eval(self, x):
        return _pnorm(x, self.p)

    def _make_dual(self):
        return PNorm(_conjugate(self.p), self.dim)

    def restriction(self):
        return PNorm(self.p, None if self.dim is None else self.dim - 1)

    def calibration(self, nu):
        nu = _as_vectors(nu, self.dim)
        if np.isinf(self.p):
            return np.sign(nu)
        a = np.abs(nu)
        if self.p == 1:
            hit = a >= a.max() - 1e-15
            return np.where(hit, np.sign(nu), 0.0) / hit.sum()
        q = _conjugate(self.p)
        return np.sign(nu) * (a / _pnorm(nu, q)) ** (q - 1)

    def project_ball(self, p):
        if np.isinf(self.p):
            return np.clip(p, -1.0, 1.0)
        if self.p == 2:
            return Euclidean().project_ball(p)
        if self.p == 1:
            return _project_l1_ball(p)
        raise NotImplementedError(f"no unit-ball projection for the {self.p}-norm")

    def to_dict(self):
        d = {"kind": "pnorm", "p": "inf" if np.isinf(self.p) else self.p}
        if self.dim is not None:
            d["dim"] = self.dim
        return d

    def structurally_symmetric_last(self):
        return True

    def structurally_partially_monotone(self):
        return True


def _project_l1_ball(p):
    a = np.abs(p)
    inside = a.sum(axis=-1) <= 1.0
    srt = -np.sort(-a, axis=-1)
    css = np.cumsum(srt, axis=-1) - 1.0
    k = np.arange(1, a.shape[-1] + 1)
    cond = srt - css / k > 0
    rho = a.shape[-1] - 1 - np.argmax(cond[..., ::-1], axis=-1)
    theta = np.take_along_axis(css, rho[..., None], axis=-1) / (rho[..., None] + 1)
    proj = np.sign(p) * np.maximum(a - theta, 0.0)
    return np.where(inside[..., None], p, proj)


class Quadratic(Anisotropy):
    kind = "quadratic"

    def __init__(self, matrix):
        A = np.asarray(matrix, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("quadratic norm needs a square matrix")
        if not np.allclose(A, A.T, atol=1e-12):
            raise ValueError("quadratic norm matrix must be symmetric")
        if np.linalg.eigvalsh(A).min() <= 0:
            raise ValueError("quadratic norm matrix must be positive definite")
        self.matrix = A
        self.dim = A.shape[0]

    def _eval(self, x):
        return np.sqrt(np.maximum(np.einsum("...i,ij,...j->...", x, self.matrix, x), 0.0))

    def _make_dual(self):
        return Quadratic(np.linalg.inv(self.matrix))

    def restriction(self):
        return Quadratic(self.matrix[:-1, :-1])

    def calibration(self, nu):
        nu = _as_vectors(nu, self.dim)
        w = np.linalg.solve(self.matrix, nu)
        return w / np.sqrt(nu @ w)

    def to_dict(self):
        return {"kind": "quadratic", "matrix": self.matrix.tolist()}

    def structurally_symmetric_last(self):
        return bool(np.all(self.matrix[-1, :-1] == 0))


class Polytope(Anisotropy):
    """Minkowski functional of a centrally symmetric polytope given by vertices.

    Facets are computed once, with Qhull.  ``eval`` is the max over facet
    functionals and ``eval_dual`` the max over vertices, both exact.
    """

    kind = "polytope"

    def __init__(self, vertices, tol: float = 1e-10):
        V = np.asarray(vertices, dtype=float)
        if V.ndim != 2 or V.shape[0] < 2:
            raise ValueError("polytope needs a (k, m) vertex array with k >= 2")
        if not np.all(np.isfinite(V)):
            raise ValueError("polytope vertices must be finite")
        m = V.shape[1]
        if m > 4:
            raise ValueError("polytope norms are supported for m <= 4")
        self.dim = m
        if m == 1:
            a = np.abs(V).max()
            if a <= tol or V.min() > -tol or V.max() < tol:
                raise ValueError("degenerate polytope: origin is not interior")
            self.vertices = np.array([[a], [-a]])
            self.facets = np.array([[1.0 / a], [-1.0 / a]])
        else:
            try:
                hull = ConvexHull(V)
            except QhullError as exc:
                raise ValueError(f"degenerate polytope: {exc.args[0].splitlines()[0]}") from None
            normals, offsets = hull.equations[:, :-1], hull.equations[:, -1]
            if offsets.max() >= -tol:
                raise ValueError("degenerate polytope: origin is not interior")
            A = normals / -offsets[:, None]
            _, keep = np.unique(np.round(A, 9), axis=0, return_index=True)
            self.facets = A[np.sort(keep)]
            self.vertices = V[hull.vertices]
        if np.max(self.vertices @ self.facets.T * -1.0) > 1 + 1e-9:
            raise ValueError("polytope vertex list is not symmetric about the origin")

    def _eval(self, x):
        return np.maximum((x @ self.facets.T).max(axis=-1), 0.0)

    def _make_dual(self):
        return Polytope(self.facets)

    def restriction(self):
        V = self.vertices
        last = V[:, -1]
        pts = [V[np.abs(last) <= 1e-12, :-1]]
        for i, j in combinations(range(len(V)), 2):
            if last[i] * last[j] < 0:
                s = last[i] / (last[i] - last[j])
                pts.append((V[i] + s * (V[j] - V[i]))[None, :-1])
        return Polytope(np.vstack(pts))

    def calibration(self, nu):
        nu = _as_vectors(nu, self.dim)
        scores = self.vertices @ nu
        hit = scores >= scores.max() - 1e-12
        return self.vertices[hit].mean(axis=0)

    def project_ball(self, p):
        if self.dim == 1:
            a = self.vertices[0, 0]
            return np.clip(p, -a, a)
        if self.dim != 2:
            raise NotImplementedError("polytope projection is implemented for m <= 2")
        return _project_polygon(p, _ordered_polygon(self.vertices), self.facets)

    def to_dict(self):
        return {"kind": "polytope", "vertices": self.vertices.tolist()}

    def structurally_symmetric_last(self):
        flipped = self.vertices * np.r_[np.ones(self.dim - 1), -1.0]
        return bool(np.max(self._eval(flipped)) <= 1 + 1e-12)


def _ordered_polygon(V):
    c = V.mean(axis=0)
    ang = np.arctan2(V[:, 1] - c[1], V[:, 0] - c[0])
    return V[np.argsort(ang)]


def _project_polygon(p, poly, facets):
    """Exact projection of 2-vectors onto a convex polygon (counter-clockwise vertices)."""
    shape = p.shape
    q = p.reshape(-1, 2)
    inside = (q @ facets.T).max(axis=-1) <= 1.0
    best = q.copy()
    if not inside.all():
        out = q[~inside]
        a = poly
        b = np.roll(poly, -1, axis=0)
        e = b - a
        t = np.einsum("nkj,kj->nk", out[:, None, :] - a[None], e) / (e * e).sum(axis=1)
        t = np.clip(t, 0.0, 1.0)
        cand = a[None] + t[..., None] * e[None]
        d2 = ((cand - out[:, None, :]) ** 2).sum(axis=-1)
        best[~inside] = cand[np.arange(len(out)), d2.argmin(axis=1)]
    return best.reshape(shape)


class Composed(Anisotropy):
    """Phi(x_hat, t) = omega(base(x_hat), |t|) on R^{n+1}."""

    def __init__(self, omega: Omega, base: Anisotropy):
        self.omega = Omega.parse(omega)
        self.base = base
        self.dim = None if base.dim is None else base.dim + 1

    @property
    def kind(self):
        return {"max": "cylindrical", "sum": "conical"}.get(self.omega.name, "omega")

    def _eval(self, x):
        return self.omega(self.base._eval(x[..., :-1]), x[..., -1])

    def _make_dual(self):
        return Composed(self.omega.dual(), self.base.dual())

    def restriction(self):
        return self.base

    def calibration(self, nu):
        nu = _as_vectors(nu, self.dim)
        a = float(self.base.eval_dual(nu[:-1]))
        b = abs(float(nu[-1]))
        s1, s2 = self.omega.maximizer(a, b)
        zhat = self.base.calibration(nu[:-1]) if a > 0 else np.zeros(len(nu) - 1)
        return np.r_[s1 * zhat, s2 * np.sign(nu[-1])]

    def project_ball(self, p):
        if self.kind != "cylindrical":
            raise NotImplementedError(f"no unit-ball projection for {self.kind} norms")
        return np.concatenate(
            [self.base.project_ball(p[..., :-1]), np.clip(p[..., -1:], -1.0, 1.0)], axis=-1
        )

    def to_dict(self):
        if self.kind == "omega":
            return {"kind": "omega", "omega": self.omega.to_spec(), "base": self.base.to_dict()}
        return {"kind": self.kind, "base": self.base.to_dict()}

    def structurally_symmetric_last(self):
        return True

    def structurally_partially_monotone(self):
        return True


def cylindrical(base: Anisotropy) -> Composed:
    return Composed(Omega(np.inf), base)


def conical(base: Anisotropy) -> Composed:
    return Composed(Omega(1.0), base)


def omega_norm(spec, base: Anisotropy) -> Composed:
    return Composed(Omega.parse(spec), base)


def parallelogram(alpha: float) -> Polytope:
    """Symmetric parallelogram with vertices (1 + cot a, 1), (-1 + cot a, 1) and opposites."""
    c = 1.0 / np.tan(alpha)
    return Polytope([[1 + c, 1], [-1 + c, 1], [-1 - c, -1], [1 - c, -1]])


def hexagon(eps: float) -> Polytope:
    """Hexagon with vertices (1,0), (eps,-eps), (0,-1) and their opposites."""
    return Polytope([[1, 0], [eps, -eps], [0, -1], [-1, 0], [-eps, eps], [0, 1]])


_KEYS = {
    "euclidean": {"kind", "dim"},
    "pnorm": {"kind", "p", "dim"},
    "quadratic": {"kind", "matrix"},
    "polytope": {"kind", "vertices"},
    "cylindrical": {"kind", "base"},
    "conical": {"kind", "base"},
    "omega": {"kind", "omega", "base"},
}


def from_dict(d: dict) -> Anisotropy:
    """Build a norm from its JSON descriptor; unknown kinds or keys are rejected."""
    if not isinstance(d, dict) or "kind" not in d:
        raise ValueError(f"norm descriptor must be an object with a 'kind', got {d!r}")
    kind = d["kind"]
    if kind not in _KEYS:
        raise ValueError(f"unknown norm kind {kind!r}")
    extra = set(d) - _KEYS[kind]
    if extra:
        raise ValueError(f"unknown keys for {kind} norm: {sorted(extra)}")
    if kind == "euclidean":
        return Euclidean(d.get("dim"))
    if kind == "pnorm":
        p = d["p"]
        return PNorm(np.inf if p in ("inf", float("inf")) else float(p), d.get("dim"))
    if kind == "quadratic":
        return Quadratic(d["matrix"])
    if kind == "polytope":
        return Polytope(d["vertices"])
    base = from_dict(d["base"])
    if kind == "cylindrical":
        return cylindrical(base)
    if kind == "conical":
        return conical(base)
    return omega_norm(d["omega"], base)


# --------------------------------------------------------------------------
# Structural predicates


@dataclass
class PredicateReport:
    verdict: str  # "holds" | "fails"
    method: str  # "exact-polyhedral" | "exact-quadratic" | "structural" | "sampled(N, seed)"
    max_violation: float = 0.0
    witness: np.ndarray | None = None
    details: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.verdict == "holds"


def sphere_directions(dim: int, n: int = 4096, seed: int = 0) -> np.ndarray:
    """Quasi-random unit vectors (scrambled Sobol mapped through the Gaussian)."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        theta = (np.arange(n) + np.random.default_rng(seed).random()) * 2 * np.pi / n
        return np.c_[np.cos(theta), np.sin(theta)]
    u = qmc.Sobol(dim, scramble=True, seed=seed).random(n)
    g = _gauss.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _require_dim(norm, dim):
    m = norm.dim if norm.dim is not None else dim
    if m is None:
        raise ValueError("norm has no fixed dimension; pass dim explicitly")
    if m < 2:
        raise ValueError("predicate needs m >= 2")
    return m


def check_generalized_graph(
    norm: Anisotropy,
    n_dirs: int = 4096,
    n_offsets: int = 33,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    method: str = "auto",
    dim: int | None = None,
) -> PredicateReport:
    """Test Phi(x_hat, t) >= Phi(x_hat, 0) for all (x_hat, t)."""
    m = _require_dim(norm, dim)
    if method == "auto":
        if isinstance(norm, Polytope):
            V = norm.vertices
            flat = np.c_[V[:, :-1], np.zeros(len(V))]
            viol = norm.eval(flat) - 1.0
            k = int(np.argmax(viol))
            bad = viol[k] > tol
            return PredicateReport(
                "fails" if bad else "holds",
                "exact-polyhedral",
                float(max(viol[k], 0.0)),
                V[k].copy() if bad else None,
            )
        if isinstance(norm, Quadratic):
            A = norm.matrix
            c = A[-1, :-1]
            if np.all(np.abs(c) <= tol):
                return PredicateReport("holds", "exact-quadratic")
            xh = c / np.linalg.norm(c)
            t = -(c @ xh) / A[-1, -1]
            w = np.r_[xh, t] / abs(t)
            viol = norm.eval(np.r_[w[:-1], 0.0]) - norm.eval(w)
            return PredicateReport("fails", "exact-quadratic", float(viol), w)
        if norm.structurally_symmetric_last():
            return PredicateReport("holds", "structural")
    dirs = sphere_directions(m - 1, n_dirs, seed)
    offsets = np.linspace(-2.0, 2.0, n_offsets)
    base = np.c_[dirs, np.zeros(len(dirs))]
    ref = norm.eval(base)
    pts = np.repeat(dirs, n_offsets, axis=0)
    pts = np.c_[pts, np.tile(offsets, len(dirs))]
    viol = np.repeat(ref, n_offsets) - norm.eval(pts)
    k = int(np.argmax(viol))
    bad = viol[k] > tol
    return PredicateReport(
        "fails" if bad else "holds",
        f"sampled({len(pts)}, {seed})",
        float(max(viol[k], 0.0)),
        pts[k] if bad else None,
    )


def check_partial_monotonicity(
    norm: Anisotropy,
    n_pairs: int = 4096 * 33,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    method: str = "auto",
    dim: int | None = None,
) -> PredicateReport:
    """Sampled falsification of: Phi(x_hat,0) <= Phi(y_hat,0), Phi(0,s) <= Phi(0,t) => Phi(x) <= Phi(y).

    Composed (omega-type) norms hold by construction.  Sampled pairs sit on the
    boundary of the hypothesis (equal horizontal norms, |s| <= |t|), where a
    violation is easiest to see.
    """
    m = _require_dim(norm, dim)
    if method == "auto" and norm.structurally_partially_monotone():
        return PredicateReport("holds", "structural")
    rng = np.random.default_rng(seed)
    dirs = sphere_directions(m - 1, 4096, seed)
    i = rng.integers(len(dirs), size=n_pairs)
    j = rng.integers(len(dirs), size=n_pairs)
    xh = dirs[i]
    yh = dirs[j]
    zero = np.zeros((n_pairs, 1))
    ratio = norm.eval(np.c_[xh, zero]) / norm.eval(np.c_[yh, zero])
    yh = yh * ratio[:, None] * (1.0 + rng.choice([0.0, 0.0, 0.1], size=n_pairs))[:, None]
    s = rng.uniform(-2.0, 2.0, size=n_pairs)
    s[rng.random(n_pairs) < 0.25] = 0.0
    t = np.abs(s) + rng.choice([0.0, 0.0, 0.5], size=n_pairs) * rng.random(n_pairs)
    t *= rng.choice([-1.0, 1.0], size=n_pairs)
    x = np.c_[xh, s]
    y = np.c_[yh, t]
    viol = norm.eval(x) - norm.eval(y)
    k = int(np.argmax(viol))
    bad = viol[k] > tol
    return PredicateReport(
        "fails" if bad else "holds",
        f"sampled({n_pairs}, {seed})",
        float(max(viol[k], 0.0)),
        np.stack([x[k], y[k]]) if bad else None,
    )


def restriction_gap(
    norm: Anisotropy, direction="sup", n_dirs: int = 4096, seed: int = 0, dim: int | None = None
) -> float:
    """Phi^o(d, 0) - (Phi|_{t=0})^o(d), at a direction or as a sampled sup over unit directions.

    ``direction`` may be given as d_hat in R^n or as (d_hat, 0) in R^{n+1}.
    """
    m = _require_dim(norm, dim)
    upper = norm.dual().restriction()
    lower = norm.restriction().dual()
    if isinstance(direction, str):
        if direction != "sup":
            raise ValueError("direction must be a vector or 'sup'")
        dirs = sphere_directions(m - 1, n_dirs, seed)
        extra = []
        for nm in (upper, lower):
            if isinstance(nm, Polytope):
                extra.append(nm.vertices / np.linalg.norm(nm.vertices, axis=1, keepdims=True))
        if extra:
            dirs = np.vstack([dirs, *extra])
        return float(np.max(upper.eval(dirs) - lower.eval(dirs)))
    d = np.atleast_1d(np.asarray(direction, dtype=float))
    if len(d) == m:
        # a full vector (d_hat, 0) is accepted as well as d_hat itself
        if d[-1] != 0:
            raise ValueError("restriction_gap direction must have zero last component")
        d = d[:-1]
    return float(upper.eval(d) - lower.eval(d))
