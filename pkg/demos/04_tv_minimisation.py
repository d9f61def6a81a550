"""
Minimizing the subgraph energy on a lattice
===========================================

With a cylindrical norm the subgraph energy is an anisotropic total variation
plus the area.  We solve it with fixed boundary data, threshold the result,
and look at the structure of the minimizer.
"""
# %%
import numpy as np

from anisoperim import anisotropy as an
from anisoperim import varmin as vm
from anisoperim.grid import GridFunction, set_energy

zeta = np.array([0.6, 0.8])
n = 64
g = GridFunction.from_collar(lambda X: np.tanh(3 * (X @ zeta - 0.7)), (n, n), 1 / n)
u = vm.minimize_G(an.cylindrical(an.Euclidean()), g)
print({k: u.meta[k] for k in ("energy", "gap", "iterations", "method", "max_principle_violation")})

# %%
# level lines of the minimizer are parallel: fit one common direction
fit = vm.bernstein_fit(u)
print("fitted direction", fit.zeta, "angle to truth (deg)", fit.angle_to(zeta), "residual", fit.residual)

# %%
# with the l1-type integrand the lattice coarea formula is exact, so scaling,
# truncation and composition behave exactly as in the continuum
Phi = an.cylindrical(an.PNorm(np.inf))
small = GridFunction.from_collar(lambda X: np.tanh(3 * (X @ zeta - 0.7)), (12, 12), 1 / 12)
w = vm.minimize_G(Phi, small)
rep = vm.structure_checks(w, Phi)
print("scaling error", rep["scaling_max_error"], "truncation error", rep["truncation_max_error"])
print("perimeter of {u > 0}:", set_energy(vm.threshold(w, 0.0), Phi.base))
