"""
Anisotropic perimeters of polyhedral sets
=========================================

Perimeters are facet sums of area times the dual norm of the normal, clipped
to a half-open window.  The slicing identities compare facet integrals with
integrals of section perimeters.
"""
# %%
import numpy as np

from anisoperim import anisotropy as an
from anisoperim import geometry as geo

cube = geo.PolyhedralSet.box([0, 0, 0], [1, 1, 1], window=(-np.ones(3), 2 * np.ones(3)))
print("cube, l_inf:", geo.perimeter(cube, an.PNorm(np.inf)))
print("cube, cylindrical over l1:", geo.perimeter(cube, an.cylindrical(an.PNorm(1))))

# %%
# half-open windows make perimeters additive across a shared face
left = geo.perimeter(cube, an.Euclidean(), ([-1, -1, -1], [0.5, 2, 2]))
right = geo.perimeter(cube, an.Euclidean(), ([0.5, -1, -1], [2, 2, 2]))
print("left + right =", left + right)

# %%
# horizontal and vertical slicing on a tilted wedge
wedge = geo.PolyhedralSet.from_halfspaces([[-0.5, 0, 1]], [0.0], "intersect", (-2 * np.ones(3), 2 * np.ones(3)))
r = geo.slice_check(wedge, an.cylindrical(an.Euclidean()))
print(r, "max relative error", r.max_rel_error())

# %%
# cylinders over a planar set: P(E x (-m, m)) against 2(m+1) P(E)
for m in (0, 1, 2):
    print("m =", m, geo.cylinder_identity(geo.PolyhedralSet.box([0, 0], [1, 1]), an.PNorm(np.inf), m))
