"""
Symbols as Schroedinger-type operators
======================================

d/dx and x d/dy both at weight 1.  In the representation attached to the
functional beta on the centre, the letters act by D and i beta y, so the
operator dx^4 + (x dy)^4 + lambda dy^2 has symbol D^4 + beta^4 y^4 - lambda beta^2.
It is injective exactly when lambda avoids the spectrum of D^4 + y^4.
"""

# %%
from hypocalc import catalog
from hypocalc.osculating import osculating_with_basis
from hypocalc.polyfield import parse_field
from hypocalc.rockland import hypoellipticity_verdict, injectivity_test, spectrum_1d
from hypocalc.symbols import (induce_representation, letter_classes, parse_nc, parse_operator, principal_part,
                              realize_symbol)

gen = catalog.ladder(1, 1)
letters = tuple(zip(gen.fields, gen.weights)) + ((parse_field("dy", 2), 2),)
g, basis = osculating_with_basis(gen, (0, 1))
classes = letter_classes(letters, basis)
PP = principal_part(parse_nc("X1^4 + X2^4 + 3/2*X3^2", letters), (0, 1))
for beta in (1, 2):
    rho = induce_representation(g, [0, 0, beta])
    print(beta, realize_symbol(PP, rho, classes).to_text())

# %%
osc = spectrum_1d(parse_operator("-D^2 + y^2"), L=5, M=64)
print("oscillator", [round(float(v), 12) for v in osc.eigenvalues])
quartic = spectrum_1d(parse_operator("D^4 + y^4"), L=4, M=128)
print("quartic", [float(v) for v in quartic.eigenvalues], "converged" if quartic.converged else "")

# %%
lam1, lam2 = (float(v) for v in quartic.eigenvalues[:2])
for lam in (0.0, lam1, 0.5 * (lam1 + lam2), lam2):
    v = hypoellipticity_verdict(1, 1, lam)
    print(f"lambda={lam:.6f}", v.hypoelliptic, v.basis)

# %%
# The sub-Laplacian symbol is the harmonic oscillator: bounded below by 1.
print(injectivity_test(parse_operator("-D^2 + y^2")).to_dict())
print(injectivity_test(parse_operator("-D^2 + y^2 - 1")).verdict)
