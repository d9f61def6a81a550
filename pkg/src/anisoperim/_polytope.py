"""Small-dimension convex polytope helpers (vertex representation).

Everything works on point clouds whose convex hull is the polytope.  Clipping
by a half-space keeps the points on the right side plus every crossing of a
segment between two points; the hull of that set is the clipped polytope.
Point clouds are pruned back to hull vertices after every step so they stay
small.
"""
from __future__ import annotations

from itertools import product

import numpy as np
from scipy.spatial import ConvexHull, QhullError

TOL = 1e-10


def box_vertices(lo, hi) -> np.ndarray:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return np.array([np.where(bits, hi, lo) for bits in product((0, 1), repeat=len(lo))])


def affine_frame(P: np.ndarray, tol: float = TOL):
    """(origin, basis) of the affine span of the rows of P; basis rows are orthonormal."""
    origin = P.mean(axis=0)
    if len(P) == 1:
        return origin, np.zeros((0, P.shape[1]))
    _, s, vt = np.linalg.svd(P - origin, full_matrices=False)
    scale = max(1.0, np.abs(P).max())
    rank = int(np.sum(s > tol * scale * np.sqrt(len(P))))
    return origin, vt[:rank]


def prune(P: np.ndarray, tol: float = TOL) -> np.ndarray:
    """Drop interior and duplicate points, keeping the vertices of conv(P)."""
    if len(P) <= 1:
        return P
    origin, basis = affine_frame(P, tol)
    r = len(basis)
    if r == 0:
        return P[:1]
    local = (P - origin) @ basis.T
    if r == 1:
        return P[[local[:, 0].argmin(), local[:, 0].argmax()]]
    try:
        return P[ConvexHull(local).vertices]
    except QhullError:
        return P


def clip(P: np.ndarray, a: np.ndarray, b: float, tol: float = TOL) -> np.ndarray:
    """Vertices of conv(P) intersected with {a . x <= b}."""
    if len(P) == 0:
        return P
    s = P @ a - b
    scale = tol * max(1.0, np.abs(b), np.abs(P).max() * np.abs(a).max())
    keep = s <= scale
    if keep.all():
        return P
    if not keep.any():
        return P[:0]
    inside = P[keep]
    i_out = np.flatnonzero(s > scale)
    i_in = np.flatnonzero(s < -scale)
    pts = [inside]
    if len(i_in) and len(i_out):
        si, so = s[i_in][:, None], s[i_out][None, :]
        w = si / (si - so)
        cross = P[i_in][:, None, :] + w[..., None] * (P[i_out][None, :, :] - P[i_in][:, None, :])
        pts.append(cross.reshape(-1, P.shape[1]))
    return prune(np.vstack(pts), tol)


def clip_box(P: np.ndarray, lo, hi, tol: float = TOL) -> np.ndarray:
    m = P.shape[1]
    for k in range(m):
        e = np.zeros(m)
        e[k] = 1.0
        P = clip(P, e, hi[k], tol)
        P = clip(P, -e, -lo[k], tol)
        if len(P) == 0:
            break
    return P


def measure(P: np.ndarray, dim: int, tol: float = TOL) -> float:
    """dim-dimensional volume of conv(P); 0 if conv(P) has lower dimension."""
    if len(P) == 0:
        return 0.0
    if dim == 0:
        return 1.0
    origin, basis = affine_frame(P, tol)
    if len(basis) < dim:
        return 0.0
    local = (P - origin) @ basis[:dim].T
    if dim == 1:
        return float(np.ptp(local[:, 0]))
    try:
        return float(ConvexHull(local).volume)
    except QhullError:
        return 0.0


def halfspace_polytope(normals, offsets, lo, hi, tol: float = TOL) -> np.ndarray:
    """Vertices of the box [lo, hi] intersected with {normals . x <= offsets}."""
    P = box_vertices(lo, hi)
    for a, b in zip(np.atleast_2d(normals), np.atleast_1d(offsets)):
        P = clip(P, a, b, tol)
        if len(P) == 0:
            break
    return P


def plane_section(P: np.ndarray, a: np.ndarray, b: float, tol: float = TOL) -> np.ndarray:
    """Vertices of conv(P) intersected with the hyperplane {a . x = b}."""
    return clip(clip(P, a, b, tol), -a, -b, tol)
