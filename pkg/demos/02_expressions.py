"""The expression grammar: parsing, evaluation, symbolic differentiation.

Problem files carry G, F and boundary targets as strings over a small grammar
(numbers, x1, x2, declared parameters, + - * / ^, exp/ln/sqrt/sin/cos).  This
demo parses the worked candidate, differentiates it symbolically, and checks
the derivative against a central finite difference.
"""

from bfpde import differentiate, evaluate, finite_difference, parse, to_string

PARAMS = ("beta", "gamma")

g = parse("x1^beta * x2 + gamma", PARAMS)
print("candidate G:        ", to_string(g))
print("round trip is stable:", parse(to_string(g), PARAMS) == g)
print()

binding = {"x1": 2.0, "x2": 3.0, "beta": 0.5, "gamma": 1.0}
print("G at", binding)
print("  =", evaluate(g, binding))
print()

dg_dx1 = differentiate(g, "x1")
dg_dx2 = differentiate(g, "x2")
print("dG/dx1 =", to_string(dg_dx1))
print("dG/dx2 =", to_string(dg_dx2))
print()

# the quotient of the partials is the differential operator of the equation;
# for this candidate it collapses to beta * x2 / x1
quotient = evaluate(dg_dx1, binding) / evaluate(dg_dx2, binding)
print("(dG/dx1)/(dG/dx2) at the binding:", quotient)
print("beta * x2 / x1 at the binding:   ", 0.5 * 3.0 / 2.0)
print()

# symbolic vs numeric cross-check
sym = evaluate(dg_dx1, binding)
fd = finite_difference(g, "x1", binding, 1e-5)
print(f"symbolic dG/dx1 = {sym:.12f}")
print(f"central diff    = {fd:.12f}")
print(f"|difference|    = {abs(sym - fd):.3e}")
print()

# powers with a variable exponent differentiate through a^b = exp(b ln a),
# so exotic candidates work too
h = parse("exp(0.3 * x1) * sqrt(x2) + ln(1 + x1 * x2)", ())
dh = differentiate(h, "x2")
print("a busier expression:", to_string(h))
print("its dG/dx2:         ", to_string(dh))
b2 = {"x1": 1.5, "x2": 2.5}
print("cross-check |sym - fd| =",
      abs(evaluate(dh, b2) - finite_difference(h, "x2", b2, 1e-5)))
