"""
Weighted vector fields on the plane
===================================

d/dx at weight 1 and x d/dy at weight 2.  Off the y-axis the two fields
already span the tangent space; on the axis one bracket is needed and the
graded algebra becomes Heisenberg.
"""

# %%
from fractions import Fraction

from hypocalc import catalog, fiber_dims, generate_filtration, osculating_at
from hypocalc.filtration import check_hormander, minimal_graded_basis

gen = catalog.heisenberg_plane()
filt = generate_filtration(gen)
for level, words in enumerate(filt.levels, start=1):
    print(f"F^{level}:", ", ".join(f"{w.field} (weight {w.weight})" for w in words))

# %%
# Hormander holds everywhere; the witness records which brackets were used.
for p in [(0, 0), (1, 2)]:
    h = check_hormander(gen, p)
    print(p, h.holds, [w.letters for w in h.witness])

# %%
# The graded dimensions jump on the axis.
for p in [(1, 0), (Fraction(-1, 2), 3), (0, 0), (0, Fraction(7, 3))]:
    print(p, fiber_dims(gen, p).dims)

# %%
g = osculating_at(gen, (0, 1))
print(g.classify(), g.to_dict()["sc"])
print(osculating_at(gen, (2, 1)).classify())

# %%
# The basis behind the numbers: representatives of each graded piece.
b = minimal_graded_basis(gen, (0, 1))
for f, w in zip(b.fields, b.weights):
    print(w, f)
