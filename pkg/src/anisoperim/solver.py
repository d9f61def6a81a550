"""Convex solvers for discrete anisotropic total variation with Dirichlet collars.

Problem (unit lattice, differences not divided by h)::

    minimise   sum_{c in region} psi^o(D u(c)) + sum_free f(c) u(c)
    over       u(c) in [lo, hi] on free cells, u fixed elsewhere.

Two methods:

* ``"lp"``: when the unit ball of psi is a polytope, psi^o(q) = max_v v . q
  over its vertices and the problem is a linear programme, solved with HiGHS.
* ``"pd"``: first-order primal-dual iteration with the dual variable projected
  onto the unit ball of psi; stops on the primal-dual gap.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .anisotropy import Anisotropy, Composed, Euclidean, PNorm, Polytope
from .grid import GridFunction, energy_support, forward_diff, forward_diff_adjoint, valid_masks

__all__ = ["ConvergenceError", "SolveResult", "solve_tv", "ball_vertices"]


class ConvergenceError(RuntimeError):
    """Raised when the primal-dual gap target is not met within max_iters."""

    def __init__(self, msg, gap, iterations):
        super().__init__(msg)
        self.gap = gap
        self.iterations = iterations


@dataclass
class SolveResult:
    values: np.ndarray  # full lattice array
    objective: float  # unit-lattice objective at the returned point
    lower_bound: float  # certified lower bound on the optimum (unit lattice)
    iterations: int
    method: str

    @property
    def gap(self) -> float:
        return max(0.0, self.objective - self.lower_bound)


def ball_vertices(norm: Anisotropy, d: int) -> np.ndarray | None:
    """Vertices of the unit ball of ``norm`` on R^d if it is a polytope, else None."""
    if isinstance(norm, Polytope):
        return norm.vertices
    if isinstance(norm, PNorm):
        if np.isinf(norm.p):
            return np.array(list(product((-1.0, 1.0), repeat=d)))
        if norm.p == 1:
            return np.r_[np.eye(d), -np.eye(d)]
        return None
    if isinstance(norm, Euclidean):
        return np.array([[1.0], [-1.0]]) if d == 1 else None
    if isinstance(norm, Composed) and norm.kind in ("cylindrical", "conical"):
        base = ball_vertices(norm.base, d - 1)
        if base is None:
            return None
        if norm.kind == "cylindrical":
            return np.r_[np.c_[base, np.ones(len(base))], np.c_[base, -np.ones(len(base))]]
        e = np.zeros((2, d))
        e[:, -1] = (1.0, -1.0)
        return np.r_[np.c_[base, np.zeros(len(base))], e]
    return None


class _Problem:
    def __init__(self, norm, g: GridFunction, region, lo, hi, linear):
        self.norm = norm
        self.g = g
        self.d = g.ndim
        self.free = g.free
        self.region = energy_support(g) if region is None else (np.asarray(region, bool) & g.domain)
        self.valid = [v & self.region for v in valid_masks(g.domain)]
        data = g.values[g.domain & ~g.free]
        if data.size == 0:
            data = g.values[g.domain]
        self.lo = float(data.min() if lo is None else lo)
        self.hi = float(data.max() if hi is None else hi)
        self.f = np.zeros(g.shape) if linear is None else np.asarray(linear, dtype=float) * g.free
        self.fixed = np.where(g.free, 0.0, g.values)
        self.b = forward_diff(self.fixed, self.valid)  # constant part of D u

    def objective(self, u):
        D = forward_diff(u, self.valid)[self.region]
        return float(np.sum(self.norm.eval_dual(D)) + np.sum(self.f * u))

    def lower_bound(self, p):
        """Dual value: min over the box of <p, D u> + <f, u>, with p in the unit ball."""
        a = forward_diff_adjoint(p, self.valid) + self.f
        af = a[self.free]
        return float(np.sum(p * self.b) + np.sum(np.minimum(af * self.lo, af * self.hi)))


def solve_tv(
    norm: Anisotropy,
    g: GridFunction,
    region=None,
    lo=None,
    hi=None,
    linear=None,
    method: str = "auto",
    gap_tol: float = 1e-8,
    max_iters: int = 100_000,
    seed: int = 0,
    check_every: int = 50,
    strict: bool = True,
) -> SolveResult:
    """Minimise the discrete psi-variation of ``g`` over its free cells.

    With ``strict=False`` an unconverged primal-dual run returns its last
    iterate (check ``gap``) instead of raising :class:`ConvergenceError`.
    ``gap_tol`` is relative to the free area: the primal-dual iteration stops
    once the physical gap h^(d-1) * gap <= gap_tol * h^d * #free.
    Bounds default to [min, max] of the collar data.  Truncating any competitor
    to that interval never increases the energy, so the box does not change
    the optimal value; it keeps the dual bound finite.
    """
    prob = _Problem(norm, g, region, lo, hi, linear)
    if method == "auto":
        method = "lp" if ball_vertices(norm, prob.d) is not None else "pd"
    if not g.free.any():
        val = prob.objective(g.values)
        return SolveResult(g.values.copy(), val, val, 0, method)
    if method == "lp":
        return _solve_lp(prob)
    if method == "pd":
        return _solve_pd(prob, gap_tol, max_iters, seed, check_every, strict)
    raise ValueError(f"unknown method {method!r}")


def _solve_lp(prob: _Problem) -> SolveResult:
    V = ball_vertices(prob.norm, prob.d)
    if V is None:
        raise ValueError("the LP method needs a norm with a polytope unit ball")
    g = prob.g
    idx = -np.ones(g.shape, dtype=int)
    idx[g.free] = np.arange(g.free.sum())
    nfree = int(g.free.sum())
    cells = np.argwhere(prob.region)
    ncell = len(cells)
    cid = -np.ones(g.shape, dtype=int)
    cid[tuple(cells.T)] = np.arange(ncell)
    # sparse D_k restricted to free variables: row = cell, value -1 at c, +1 at c + e_k
    Dk = []
    for k in range(prob.d):
        rows, cols, vals = [], [], []
        ok = prob.valid[k][tuple(cells.T)]
        c0 = cells[ok]
        c1 = c0.copy()
        c1[:, k] += 1
        r = cid[tuple(c0.T)]
        for cc, sgn in ((c0, -1.0), (c1, 1.0)):
            j = idx[tuple(cc.T)]
            m = j >= 0
            rows.append(r[m])
            cols.append(j[m])
            vals.append(np.full(m.sum(), sgn))
        Dk.append(sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(ncell, nfree)))
    b = prob.b[tuple(cells.T)]  # (ncell, d)
    blocks, rhs = [], []
    negI = -sparse.identity(ncell, format="csr")
    for v in V:
        A = sum(v[k] * Dk[k] for k in range(prob.d))
        blocks.append(sparse.hstack([A, negI]))
        rhs.append(-(b @ v))
    A_ub = sparse.vstack(blocks).tocsr()
    b_ub = np.concatenate(rhs)
    c = np.r_[prob.f[g.free], np.ones(ncell)]
    bounds = [(prob.lo, prob.hi)] * nfree + [(None, None)] * ncell
    # interior point with crossover is much faster than simplex on large lattices
    lp_method = "highs-ipm" if nfree > 500 else "highs"
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method=lp_method)
    if res.status != 0:
        raise ConvergenceError(f"LP solver failed: {res.message}", np.inf, int(getattr(res, "nit", 0)))
    u = g.values.copy()
    u[g.free] = np.clip(res.x[:nfree], prob.lo, prob.hi)
    obj = prob.objective(u)
    lb = float(res.fun)
    return SolveResult(u, obj, min(lb, obj), int(getattr(res, "nit", 0)), "lp")


def _solve_pd(prob: _Problem, gap_tol, max_iters, seed, check_every, strict) -> SolveResult:
    g = prob.g
    d = prob.d
    tau = sigma = 0.99 / np.sqrt(4.0 * d)
    rng = np.random.default_rng(seed)
    u = g.values.copy()
    u[g.free] = rng.uniform(prob.lo, prob.hi, size=int(g.free.sum()))
    ubar = u.copy()
    p = np.zeros(g.shape + (d,))
    mask = np.stack(prob.valid, axis=-1)
    target = gap_tol * g.h * g.free.sum()
    best_lb = -np.inf
    gap = np.inf
    for it in range(1, max_iters + 1):
        p = prob.norm.project_ball(p + sigma * forward_diff(ubar, prob.valid)) * mask
        u_old = u
        u = u - tau * (forward_diff_adjoint(p, prob.valid) + prob.f)
        u = np.where(g.free, np.clip(u, prob.lo, prob.hi), g.values)
        ubar = 2 * u - u_old
        if it % check_every == 0 or it == max_iters:
            best_lb = max(best_lb, prob.lower_bound(p))
            gap = prob.objective(u) - best_lb
            if gap <= target:
                return SolveResult(u, prob.objective(u), best_lb, it, "pd")
    if not strict:
        return SolveResult(u, prob.objective(u), best_lb, max_iters, "pd")
    raise ConvergenceError(
        f"primal-dual gap {gap:.3e} above target {target:.3e} after {max_iters} iterations", gap, max_iters
    )
