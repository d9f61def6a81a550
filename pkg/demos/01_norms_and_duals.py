"""
Norms, dual norms and vertical structure
========================================

Build a few anisotropies, evaluate them and their duals, and test the two
structural predicates that matter for subgraphs: the generalized-graph
property and partial monotonicity.
"""
# %%
import numpy as np

from anisoperim import anisotropy as an

# the dual of a cylindrical norm max(phi, |t|) is phi^o + |t|
Phi = an.cylindrical(an.PNorm(1))
print("Phi(1,1,3)   =", Phi.eval([1, 1, 3]))
print("Phi^o(1,1,3) =", Phi.eval_dual([1, 1, 3]))

# %%
# a parallelogram unit ball tilted by alpha is not a generalized graph: the dual
# of its horizontal restriction misses cot(alpha) in the horizontal direction
for alpha in (np.pi / 6, np.pi / 4, np.pi / 3):
    P = an.parallelogram(alpha)
    print(f"alpha={alpha:.4f}  gap={an.restriction_gap(P, [1.0, 0.0]):.12f}  cot={1 / np.tan(alpha):.12f}  "
          f"graph={an.check_generalized_graph(P).verdict}")

# %%
# the hexagon passes the graph test although it is not symmetric in t
H = an.hexagon(1.0)
print("hexagon graph:", an.check_generalized_graph(H).verdict, " symmetric in t:", H.structurally_symmetric_last())

# %%
# omega-composed norms are partially monotone by construction
for name, N in (("cylindrical-l1", an.cylindrical(an.PNorm(1))),
                ("omega p=2 over l1", an.omega_norm({"p": 2}, an.PNorm(1)))):
    print(name, an.check_partial_monotonicity(N, dim=3).verdict)
