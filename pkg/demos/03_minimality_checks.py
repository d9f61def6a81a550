"""
Checking minimality against compact perturbations
=================================================

A candidate set is digitized on a lattice and compared, window by window,
against every competitor that agrees with it outside the window (brute force)
or against a convex relaxation (for windows too large to enumerate).
"""
# %%
import numpy as np

from anisoperim import anisotropy as an
from anisoperim import geometry as geo
from anisoperim import varmin as vm

LINF = an.PNorm(np.inf, 2)  # dual l1: lattice perimeter counts faces exactly
W = [([-0.5, -0.5], [0.5, 0.5]), ([-1.0, -0.5], [0.0, 0.5]), ([0.0, -0.5], [1.0, 0.5])]

# %%
# a cone pair with both normals on the same side of the vertical passes
nu = lambda a: np.array([-np.sin(a), np.cos(a)])  # noqa: E731
E, F, rep = geo.build_cone_pair(nu(np.pi / 3), nu(np.pi / 6), radius=3.0)
print(rep)
print("E:", vm.verify_minimality(E, LINF, W, "brute", h=0.25).status)

# %%
# a symmetric roof can be cut: removing a small triangle under the ridge lowers the energy
s = 1 / np.sqrt(2)
E, _, rep = geo.build_cone_pair([-s, s], [s, s], radius=3.0)
v = vm.verify_minimality(E, LINF, [([-0.5, -0.75], [0.5, 0.25])], "brute", h=0.25)
print("roof:", v.status, v.candidate_energy, "->", v.competitor_energy)
print("closed-form cut gain at depth 0.5:", geo.roof_cut_delta(np.array([-s, s]), np.array([s, s]), 0.5, LINF))

# %%
# a union of two cones: inserting the strip between them pays 2l - 2 gamma
for l, gamma in ((2.0, 1.0), (1.0, 2.0)):
    U = geo.union_of_cones(1, 0.0, 0.0, l, gamma, radius=5.0)
    v = vm.verify_minimality(U, LINF, [([-0.5, 0.0], [1.5, 2.0])], "brute", h=0.5)
    print(f"l={l} gamma={gamma}: {v.status}, change {v.competitor_energy - v.candidate_energy:+.3f}")

# %%
# a flat slab in R^3 under the cylindrical Euclidean norm: a large window lets a
# hole through the slab pay off, a small one does not (relaxed check)
slab = geo.PolyhedralSet.from_halfspaces([[0, 0, 1], [0, 0, -1]], [1.0, 0.0], "intersect", ([-5, -5, -2], [5, 5, 3]))
Phi = an.cylindrical(an.Euclidean())
for R in (2.0, 0.5):
    v = vm.verify_minimality(slab, Phi, [([-R, -R, -0.25], [R, R, 1.25])], "relaxed", h=0.25,
                             gap_tol=1e-6, max_iters=20000)
    print(f"R={R}: {v.status}")
