"""Cell-centred lattices: grid functions, binary grid sets and discrete energies.

Index convention: ``values[i, j, ...]`` is the cell whose centre is
``origin + (np.array([i, j, ...]) + 0.5) * h``; axis k of the array is
coordinate k.  The array includes a collar of cells whose values are fixed
(Dirichlet data); the ``free`` mask marks the cells a solver may change.
Cells outside ``domain`` do not exist: differences across the domain boundary
are zero.

Forward differences ``D_h u(c)_k = (u(c + e_k) - u(c)) / h`` are taken on the
energy support: every domain cell that is free or has a free forward
neighbour, so every difference touching a free cell is counted exactly once.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .anisotropy import Anisotropy

__all__ = [
    "GridFunction",
    "GridSet",
    "valid_masks",
    "forward_diff",
    "forward_diff_adjoint",
    "energy_support",
    "discrete_energy",
    "set_energy",
]


@dataclass
class GridFunction:
    values: np.ndarray
    h: float
    origin: np.ndarray
    free: np.ndarray
    domain: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.origin = np.asarray(self.origin, dtype=float).reshape(self.values.ndim)
        self.free = np.asarray(self.free, dtype=bool)
        if self.domain is None:
            self.domain = np.ones(self.values.shape, dtype=bool)
        self.domain = np.asarray(self.domain, dtype=bool)
        if not self.h > 0:
            raise ValueError("lattice spacing h must be positive")
        if self.free.shape != self.values.shape or self.domain.shape != self.values.shape:
            raise ValueError("masks must match the value array")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid values must be finite")
        if np.any(self.free & ~self.domain):
            raise ValueError("free cells must lie in the domain")

    # -- constructors

    @classmethod
    def from_collar(cls, data, dims, h: float, lower=None, domain=None, meta=None) -> "GridFunction":
        """Lattice with ``dims`` free cells per axis (lower corner ``lower``) plus a one-cell collar.

        ``data`` is a callable on (..., d) centre coordinates or a full-shape array.
        """
        dims = tuple(int(n) for n in dims)
        d = len(dims)
        lower = np.zeros(d) if lower is None else np.asarray(lower, dtype=float)
        shape = tuple(n + 2 for n in dims)
        origin = lower - h
        free = np.zeros(shape, dtype=bool)
        free[tuple(slice(1, -1) for _ in dims)] = True
        g = cls(np.zeros(shape), h, origin, free, None, dict(meta or {}))
        vals = data(g.centers()) if callable(data) else np.asarray(data, dtype=float)
        g.values = np.broadcast_to(np.asarray(vals, dtype=float), shape).copy()
        if domain is not None:
            dom = domain(g.centers()) if callable(domain) else np.asarray(domain, dtype=bool)
            g.domain = np.asarray(dom, dtype=bool)
            g.free &= g.domain
        g.__post_init__()
        return g

    # -- geometry

    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def shape(self):
        return self.values.shape

    def centers(self) -> np.ndarray:
        axes = [self.origin[k] + (np.arange(n) + 0.5) * self.h for k, n in enumerate(self.shape)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def with_values(self, values, **meta) -> "GridFunction":
        out = replace(self, values=np.array(values, dtype=float), meta={**self.meta, **meta})
        out.free = self.free.copy()
        out.domain = self.domain.copy()
        return out

    def subgrid(self, lo_idx, hi_idx) -> "GridFunction":
        """Window of free cells lo_idx <= i < hi_idx with a one-cell collar taken from this grid."""
        lo_idx = np.asarray(lo_idx, dtype=int)
        hi_idx = np.asarray(hi_idx, dtype=int)
        if np.any(lo_idx < 1) or np.any(hi_idx > np.array(self.shape) - 1) or np.any(hi_idx <= lo_idx):
            raise ValueError("window must lie inside the lattice and leave room for a collar")
        sl = tuple(slice(a - 1, b + 1) for a, b in zip(lo_idx, hi_idx))
        free = np.zeros(tuple(b - a + 2 for a, b in zip(lo_idx, hi_idx)), dtype=bool)
        free[tuple(slice(1, -1) for _ in lo_idx)] = True
        dom = self.domain[sl].copy()
        out = type(self)(
            self.values[sl].copy(), self.h, self.origin + (lo_idx - 1) * self.h, free & dom, dom,
            {**self.meta, "window_index": (lo_idx.tolist(), hi_idx.tolist())},
        )
        return out

    def free_area(self) -> float:
        return float(self.free.sum() * self.h**self.ndim)


class GridSet(GridFunction):
    """Binary grid function; cells are digitised by their centres."""

    def __post_init__(self):
        super().__post_init__()
        if not np.all((self.values == 0) | (self.values == 1)):
            raise ValueError("grid set values must be 0 or 1")

    @classmethod
    def digitize(cls, contains, dims, h: float, lower=None, domain=None, meta=None) -> "GridSet":
        """Digitise a set given by a membership callable (e.g. ``PolyhedralSet.contains``)."""

        def data(X):
            flat = X.reshape(-1, X.shape[-1])
            return np.asarray(contains(flat), dtype=float).reshape(X.shape[:-1])

        g = GridFunction.from_collar(data, dims, h, lower, domain, meta)
        return cls(g.values, g.h, g.origin, g.free, g.domain, g.meta)

    @classmethod
    def from_function(cls, u: GridFunction, level: float, tie_tol: float = 1e-9) -> "GridSet":
        """{u > level}, with values within ``tie_tol`` of the level sent to 1 (reported in meta)."""
        ties = np.abs(u.values - level) <= tie_tol
        chi = (u.values > level) | ties
        return cls(chi.astype(float), u.h, u.origin, u.free.copy(), u.domain.copy(),
                   {"level": level, "ties": int((ties & u.free).sum())})


# --------------------------------------------------------------------------
# difference operators


def valid_masks(domain: np.ndarray) -> list[np.ndarray]:
    """valid[k][c] is True when c and c + e_k are both domain cells."""
    out = []
    for k in range(domain.ndim):
        v = np.zeros(domain.shape, dtype=bool)
        a = [slice(None)] * domain.ndim
        b = [slice(None)] * domain.ndim
        a[k] = slice(0, -1)
        b[k] = slice(1, None)
        v[tuple(a)] = domain[tuple(a)] & domain[tuple(b)]
        out.append(v)
    return out


def forward_diff(v: np.ndarray, valid: list[np.ndarray]) -> np.ndarray:
    """Unscaled forward differences, shape v.shape + (d,); zero where invalid."""
    d = v.ndim
    out = np.zeros(v.shape + (d,))
    for k in range(d):
        a = [slice(None)] * d
        b = [slice(None)] * d
        a[k] = slice(0, -1)
        b[k] = slice(1, None)
        out[tuple(a) + (k,)] = v[tuple(b)] - v[tuple(a)]
        out[..., k] *= valid[k]
    return out


def forward_diff_adjoint(p: np.ndarray, valid: list[np.ndarray]) -> np.ndarray:
    """Adjoint of :func:`forward_diff` (a negative divergence)."""
    d = p.ndim - 1
    out = np.zeros(p.shape[:-1])
    for k in range(d):
        q = p[..., k] * valid[k]
        out -= q
        a = [slice(None)] * d
        b = [slice(None)] * d
        a[k] = slice(0, -1)
        b[k] = slice(1, None)
        out[tuple(b)] += q[tuple(a)]
    return out


def energy_support(g: GridFunction) -> np.ndarray:
    """Domain cells that are free or have a free forward neighbour."""
    S = g.free.copy()
    valid = valid_masks(g.domain)
    for k in range(g.ndim):
        a = [slice(None)] * g.ndim
        b = [slice(None)] * g.ndim
        a[k] = slice(0, -1)
        b[k] = slice(1, None)
        S[tuple(a)] |= g.free[tuple(b)] & valid[k][tuple(a)]
    return S & g.domain


def _region(g: GridFunction, region):
    if region is None:
        return energy_support(g)
    region = np.asarray(region, dtype=bool)
    if region.shape != g.shape:
        raise ValueError("region mask must match the lattice")
    return region & g.domain


def discrete_energy(u: GridFunction, norm: Anisotropy, region=None) -> float:
    """sum over the region of h^n Phi^o(-D_h u, 1), Phi a norm on R^{n+1}."""
    n = u.ndim
    if norm.dim is not None and norm.dim != n + 1:
        raise ValueError(f"norm has dimension {norm.dim} but functions on a {n}-d lattice need {n + 1}")
    R = _region(u, region)
    D = forward_diff(u.values, valid_masks(u.domain))[R] / u.h
    vecs = np.c_[-D, np.ones(len(D))]
    return float(u.h**n * np.sum(norm.eval_dual(vecs)))


def set_energy(chi: GridFunction, norm: Anisotropy, region=None) -> float:
    """Discrete perimeter sum over the region of h^d Psi^o(-D_h chi), Psi a norm on R^d.

    For norms whose dual is l1-like this is the face count weighted by the
    face normals' dual norms; it also applies to relaxed values in [0, 1].
    """
    d = chi.ndim
    if norm.dim is not None and norm.dim != d:
        raise ValueError(f"norm has dimension {norm.dim} but the lattice has dimension {d}")
    R = _region(chi, region)
    D = forward_diff(chi.values, valid_masks(chi.domain))[R]
    return float(chi.h ** (d - 1) * np.sum(norm.eval_dual(-D)))
