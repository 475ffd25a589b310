"""
A cone and an operator with two presentations
=============================================

On the line take x^2 d/dx at weight 1 and x d/dx at weight 2.  The osculating
algebra at 0 is three-dimensional and the cone of limiting covectors is
xi1 xi3 = xi2^2.  The operator -x d/dx can be written either as the weight-2
letter or as a weight-4 combination; the two principal parts agree exactly
on the cone and nowhere else.
"""

# %%
import numpy as np

from hypocalc import catalog
from hypocalc.hncone import PairingMap, exact_point, membership, relation_residuals, sample_cone
from hypocalc.osculating import osculating_with_basis
from hypocalc.polyfield import parse_field
from hypocalc.symbols import letter_classes, parse_nc, principal_part, symbol_character

gen = catalog.cusp_line()
g, basis = osculating_with_basis(gen, (0,))
phi = PairingMap.from_basis(basis)
print("weights", phi.weights)

# %%
sample = sample_cone(phi, 2048, seed=0)
print(len(sample), "points, residual", relation_residuals("cusp", sample.points))
# projections for plotting: columns (xi1, xi3)
xy = sample.projections(0, 2)
print(xy[:3])

# %%
for xi in [(1, 1, 1), (1, 0, 1), (4, 2, 1)]:
    v = membership(phi, xi)
    print(xi, v.verdict, f"{v.residual:.1e}", "(heuristic)" if v.heuristic else "")

# %%
letters = ((parse_field("x^2*dx", 1), 1), (parse_field("dx", 1), 3), (parse_field("x*dx", 1), 2))
classes = letter_classes(letters, basis)
P1 = principal_part(parse_nc("X1*X2 - X3*X3", letters), (0,))
P2 = principal_part(parse_nc("-X3", letters), (0,), order=4)

rng = np.random.default_rng(1)
for _ in range(3):
    x, eta, t = rng.integers(1, 9, 3)
    xi = exact_point(phi, [int(x)], [int(eta)], int(t))
    print([str(v) for v in xi], symbol_character(P1, xi, classes), symbol_character(P2, xi, classes))

print("off the cone:", symbol_character(P1, (1, 0, 1), classes), "vs", symbol_character(P2, (1, 0, 1), classes))
