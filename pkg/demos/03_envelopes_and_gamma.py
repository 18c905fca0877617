"""Alpha-cut envelopes and the Gamma curves of the worked example.

Fuzzifying the crisp solution G = x1^beta * x2 + gamma turns it into a band:
at each (x1, x2, alpha) the candidate is the interval [y1, y2] of G values
over the parameter cut box.  Applying (d/dx1)/(d/dx2) to each band edge gives
the Gamma curves, which here should coincide with the closed forms
b_i(alpha) * x2 / x1 read off the worked example.
"""

from pathlib import Path

import numpy as np

from bfpde import envelope, envelope_curve, gamma_curves, load_problem

problem = load_problem(Path(__file__).resolve().parents[1] / "problems" / "worked_example.json")

print("point envelopes of G at (x1, x2) = (2, 3):")
print("alpha     y1          y2")
for alpha in (0.0, 0.5, 1.0):
    lo, hi = envelope(problem.g, problem.parameters, 2.0, 3.0, alpha)
    print(f"{alpha:4.2f}   {lo:9.6f}   {hi:9.6f}")
print("closed form at alpha = 0: (2^0.25 * 3, 2^0.75 * 3 + 2) =",
      (2**0.25 * 3, 2**0.75 * 3 + 2))
print()

y = envelope_curve(problem.g, problem.parameters, problem.box, problem.grid, "Y")
print(f"Y envelope sampled on a {y.lower.shape} grid")
print("  band width at alpha = 0  :", float((y.upper[..., 0] - y.lower[..., 0]).max()))
print("  band width at alpha = 1  :", float((y.upper[..., -1] - y.lower[..., -1]).max()))
print("  any fallback sampling?   :", bool(y.approximate.any()))
print()

gam = gamma_curves(problem.g, problem.parameters, problem.box, problem.grid)
b1 = 0.25 + 0.25 * gam.alpha
b2 = 0.75 - 0.25 * gam.alpha
want_lo = b1[None, None, :] * gam.x2[None, :, None] / gam.x1[:, None, None]
want_hi = b2[None, None, :] * gam.x2[None, :, None] / gam.x1[:, None, None]
print("Gamma curves vs the closed forms b_i(alpha) * x2 / x1:")
print("  max |Gamma_1 - b1*x2/x1| =", float(np.abs(gam.lower - want_lo).max()))
print("  max |Gamma_2 - b2*x2/x1| =", float(np.abs(gam.upper - want_hi).max()))
print()

# the three differentiability conditions, read straight off the arrays
print("condition 1 margin (Gamma_1 rising in alpha):",
      float(np.diff(gam.lower, axis=2).min()))
print("condition 2 margin (Gamma_2 falling in alpha):",
      float(-np.diff(gam.upper, axis=2).max()))
print("condition 3 gap at alpha = 1 (should be 0):",
      float(np.abs(gam.lower[..., -1] - gam.upper[..., -1]).max()))
