"""
Composing flows
===============

exp(X(t)) . (exp(Y(t)) . x) against exp(BCH(X, Y)(t)) . x for formal series
of polynomial fields.  Truncating the series at t^n leaves an error of order
t^(n+1); the log-log slope shows it.
"""

# %%
from hypocalc import catalog
from hypocalc.bchflow import FormalSeriesField, bch_series, flow_order_test, graded_lie_basis, order_suite, phi_map
from hypocalc.osculating import bch

S = FormalSeriesField.parse
print(bch_series(S(2, ["dx"]), S(2, ["x*dy"]), 2).to_str())

# %%
for name, X, Y, x in order_suite():
    fits = [flow_order_test(X, Y, x, n) for n in (1, 2, 3)]
    print(f"{name:16s}", ["exact" if f.exactly_zero else f"{f.slope:.2f}" for f in fits])

# %%
# Error table for one fit (t, error) ready for a log-log plot.
print(flow_order_test(*order_suite()[1][1:], 2).to_csv())

# %%
# phi interpolates between the flows at t > 0 and the group law at t = 0.
x = (0.5,)
b = graded_lie_basis(catalog.cusp_line(), x)
Y, X = [0.2, -0.1, 0.3], [0.1, 0.25, -0.2]
print("bch", [float(c) for c in bch(b.algebra, Y, X)])
for t in (1, 0.5, 0.25, 0.125, 0.0625, 0):
    print(t, phi_map(b, Y, X, x, t))
