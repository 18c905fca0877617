"""Triangular fuzzy numbers and their alpha-cuts.

A triangular fuzzy number (left, peak, right) models an uncertain parameter:
membership is 1 at the peak and falls linearly to 0 at the support ends.
Cutting it at a membership level alpha gives the closed interval of values
whose membership is at least alpha; these intervals nest as alpha grows and
collapse to the peak at alpha = 1.
"""

import numpy as np

from bfpde import FuzzyVector, TriangularFuzzyNumber, alpha_cut, cut_box, is_crisp

beta = TriangularFuzzyNumber(0.25, 0.5, 0.75)
gamma = TriangularFuzzyNumber(0.0, 1.0, 2.0)

print("beta  =", beta)
print("gamma =", gamma)
print()

print("alpha     beta cut              gamma cut")
for alpha in np.linspace(0.0, 1.0, 6):
    b = alpha_cut(beta, float(alpha))
    g = alpha_cut(gamma, float(alpha))
    print(f"{alpha:4.2f}   [{b.lo:6.4f}, {b.hi:6.4f}]   [{g.lo:6.4f}, {g.hi:6.4f}]")

print()
print("The cuts nest: every higher-alpha interval sits inside every lower one,")
print("and the alpha = 1 cut is exactly the peak:", alpha_cut(beta, 1.0))
print()

# A fuzzy parameter vector produces a product box of cuts, the search region
# the envelope operations minimise and maximise over.
params = FuzzyVector((("beta", beta), ("gamma", gamma)))
print("cut box at alpha = 0.5:")
for name, cut in zip(params.names, cut_box(params, 0.5)):
    print(f"  {name}: [{cut.lo}, {cut.hi}]")

print()
crisp = TriangularFuzzyNumber(0.5, 0.5, 0.5)
print("zero-width triangles model crisp parameters:",
      crisp, "-> is_crisp:", is_crisp(crisp))
print("the fuzzy beta above is not crisp:", is_crisp(beta))
