"""BCH for flows of vector fields, the local inverse ``k`` and the interpolating map ``phi``.

Formal series ``sum_i t^i X_i`` are stored as coefficient lists.  The BCH series
follows the same convention as :func:`hypocalc.osculating.bch`, so that
``exp(X) . (exp(Y) . x) = exp(BCH(X, Y)) . x`` up to the truncation order.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .filtration import WeightedGenerators
from .osculating import (GradedLieAlgebra, bch, bch_coefficients, dilate, free_basis_words, free_nilpotent,
                         standard_factorization)
from .polyfield import (FlowEscaped, PolyVectorField, bracket, flow_callable, flow_time_one, flow_time_one_mp,
                        parse_field)
from .scalars import to_exact

DEFAULT_T_GRID = tuple(Fraction(1, 2**k) for k in range(3, 11))
NEWTON_STEPS = 50
DOMAIN_RADIUS = 1e3
SLOPE_MARGIN = 0.8


class OutsideDomain(RuntimeError):
    """Newton iteration for ``k`` did not converge."""


@dataclass(frozen=True)
class FormalSeriesField:
    coefficients: tuple  # coefficients[i] multiplies t^(i+1)

    def __post_init__(self):
        coeffs = tuple(self.coefficients)
        if not coeffs:
            raise ValueError("a formal series needs at least one coefficient")
        if len({c.dim for c in coeffs}) != 1:
            raise ValueError("all coefficient fields must share the base dimension")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def parse(cls, dim: int, texts: Sequence[str]) -> "FormalSeriesField":
        return cls(tuple(parse_field(t, dim) for t in texts))

    @classmethod
    def zero(cls, dim: int, order: int = 1) -> "FormalSeriesField":
        return cls((PolyVectorField.zero(dim),) * order)

    @property
    def dim(self) -> int:
        return self.coefficients[0].dim

    @property
    def order(self) -> int:
        return len(self.coefficients)

    def coefficient(self, i: int) -> PolyVectorField:
        """Coefficient of ``t^i`` (zero beyond the stored order)."""
        if 1 <= i <= self.order:
            return self.coefficients[i - 1]
        return PolyVectorField.zero(self.dim)

    def truncate(self, n: int) -> "FormalSeriesField":
        return FormalSeriesField(tuple(self.coefficient(i) for i in range(1, n + 1)))

    def __add__(self, other: "FormalSeriesField") -> "FormalSeriesField":
        n = max(self.order, other.order)
        return FormalSeriesField(tuple(self.coefficient(i) + other.coefficient(i) for i in range(1, n + 1)))

    def scale(self, c) -> "FormalSeriesField":
        return FormalSeriesField(tuple(X * c for X in self.coefficients))

    def bracket(self, other: "FormalSeriesField", n: int) -> "FormalSeriesField":
        out = [PolyVectorField.zero(self.dim) for _ in range(n)]
        for i in range(1, min(self.order, n) + 1):
            for j in range(1, min(other.order, n - i) + 1):
                out[i + j - 1] = out[i + j - 1] + bracket(self.coefficient(i), other.coefficient(j))
        return FormalSeriesField(tuple(out))

    def at(self, t) -> PolyVectorField:
        """The vector field ``sum t^i X_i`` for a fixed (exact) ``t``."""
        t = to_exact(t)
        total = PolyVectorField.zero(self.dim)
        for i, X in enumerate(self.coefficients, start=1):
            if not X.is_zero():
                total = total + X * t**i
        return total

    def __eq__(self, other):
        if not isinstance(other, FormalSeriesField):
            return NotImplemented
        n = max(self.order, other.order)
        return all(self.coefficient(i) == other.coefficient(i) for i in range(1, n + 1))

    def __hash__(self):
        return hash(tuple(c for c in self.coefficients if not c.is_zero()))

    def to_str(self) -> str:
        parts = [f"t^{i}*({X})" for i, X in enumerate(self.coefficients, start=1) if not X.is_zero()]
        return " + ".join(parts) or "0"


def bch_series(X: FormalSeriesField, Y: FormalSeriesField, n: int) -> FormalSeriesField:
    """``BCH(X, Y) = X + Y - 1/2 [X, Y] + ...`` truncated at ``t^n``, exactly."""
    if n < 1:
        raise ValueError("truncation order must be >= 1")
    Xn, Yn = X.truncate(n), Y.truncate(n)
    total = Xn + Yn
    letters = (Yn, Xn)  # log(e^A e^B) with A = Y, B = X
    for word, c in bch_coefficients(n):
        if len(word) == 1:
            continue
        v = letters[word[-1]]
        for a in reversed(word[:-1]):
            v = letters[a].bracket(v, n)
        total = total + v.scale(c)
    return total.truncate(n)


@dataclass
class OrderFit:
    n: int
    t_grid: list
    errors: list
    slope: float | None
    slope_residual: float | None
    exactly_zero: bool
    dropped: list = field(default_factory=list)
    floor: float = 0.0

    @property
    def inconclusive(self) -> bool:
        return not self.exactly_zero and len(self.errors) < 5

    @property
    def passed(self) -> bool:
        if self.exactly_zero:
            return True
        return not self.inconclusive and self.slope is not None and self.slope >= self.n + SLOPE_MARGIN

    def to_dict(self) -> dict:
        return {"n": self.n, "slope": self.slope, "slope_residual": self.slope_residual,
                "exactly_zero": self.exactly_zero, "passed": self.passed, "inconclusive": self.inconclusive,
                "points": len(self.errors), "dropped": [float(t) for t in self.dropped]}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "error"])
        for t, e in zip(self.t_grid, self.errors):
            w.writerow([repr(float(t)), repr(float(e))])
        return buf.getvalue()


def _flow(Xt: PolyVectorField, x, tol: float):
    if tol < 1e-13:
        digits = int(math.ceil(-math.log10(tol))) + 6
        return flow_time_one_mp(Xt, x, digits)
    return list(flow_time_one(Xt, [float(v) for v in x], tol))


def flow_order_test(X: FormalSeriesField, Y: FormalSeriesField, x: Sequence, n: int,
                    t_grid: Sequence = DEFAULT_T_GRID, tol: float | None = None) -> OrderFit:
    """Compare ``exp(X_n(t)).(exp(Y_n(t)).x)`` with ``exp(BCH(X,Y)_n(t)).x`` across ``t_grid``."""
    grid = sorted((to_exact(t) for t in t_grid), reverse=True)
    t_min = float(grid[-1])
    if tol is None:
        tol = 1e-3 * t_min ** (n + 2)
    Z = bch_series(X, Y, n)
    Xn, Yn = X.truncate(n), Y.truncate(n)
    ts, errs, dropped = [], [], []
    digits = int(math.ceil(-math.log10(tol))) + 6
    with mpmath.workdps(max(digits, 20)):
        for t in grid:
            try:
                lhs = _flow(Xn.at(t), _flow(Yn.at(t), x, tol), tol)
                rhs = _flow(Z.at(t), x, tol)
            except FlowEscaped:
                dropped.append(t)
                continue
            err = mpmath.sqrt(sum((mpmath.mpf(a) - mpmath.mpf(b)) ** 2 for a, b in zip(lhs, rhs)))
            ts.append(t)
            errs.append(float(err))
    # below this the two sides agree to integration accuracy
    floor = 10 * tol if tol < 1e-13 else 100 * np.finfo(float).eps
    exactly_zero = bool(errs) and all(e <= floor for e in errs)
    slope = resid = None
    usable = [(float(t), e) for t, e in zip(ts, errs) if e > 0]
    if not exactly_zero and len(usable) >= 2:
        lt = np.log([u[0] for u in usable])
        le = np.log([u[1] for u in usable])
        coef, res, *_ = np.polyfit(lt, le, 1, full=True)
        slope = float(coef[0])
        resid = float(np.sqrt(res[0] / len(usable))) if len(res) else 0.0
    return OrderFit(n, [float(t) for t in ts], errs, slope, resid, exactly_zero, [float(t) for t in dropped], floor)


def order_suite() -> list[tuple[str, FormalSeriesField, FormalSeriesField, tuple]]:
    """Five non-commuting polynomial pairs with generic base points."""
    S = FormalSeriesField.parse
    return [
        ("cubic-line", S(1, ["x^2*dx"]), S(1, ["0", "x*dx"]), (1.0,)),
        ("sl2", S(2, ["y*dx"]), S(2, ["x*dy"]), (1.0, 0.5)),
        ("shear-quadratic", S(2, ["dx + x*y*dy"]), S(2, ["x^2*dy", "dy"]), (0.2, 0.3)),
        ("mixed", S(2, ["x^2*dx", "dx"]), S(2, ["y*dx + x*dy"]), (0.5, 0.5)),
        ("rotation", S(2, ["x*dy - y*dx"]), S(2, ["dx", "y*dy"]), (1.0, 0.0)),
    ]


# -- graded Lie basis, k and phi --------------------------------------------------------


@dataclass
class GradedLieBasis:
    """Free nilpotent algebra on the generators with ``natural`` extended by brackets."""

    algebra: GradedLieAlgebra
    fields: list
    weights: tuple
    point: tuple
    words: list

    def natural(self, v) -> PolyVectorField:
        total = PolyVectorField.zero(self.fields[0].dim)
        for c, X in zip(v, self.fields):
            if c != 0:
                total = total + X * c
        return total

    def numeric(self):
        fns = [X.numeric() for X in self.fields]

        def combo(v):
            v = np.asarray(v, dtype=float)
            return lambda y: sum(c * f(y) for c, f in zip(v, fns) if c != 0)

        return combo

    def anchor(self, x) -> np.ndarray:
        """Matrix of ``v -> natural(v)(x)``."""
        return np.array([[float(c) for c in X.evaluate(x)] for X in self.fields]).T

    def to_dict(self) -> dict:
        return {"algebra": self.algebra.to_dict(), "fields": [str(X) for X in self.fields],
                "weights": list(self.weights), "point": [float(v) for v in self.point]}


def graded_lie_basis(gen: WeightedGenerators, p: Sequence, coordinates: bool | None = None) -> GradedLieBasis:
    """Graded Lie basis at ``p``; coordinate fields join at weight N when ``coordinates`` is set,
    or automatically when the bracket images fail to span the tangent space at ``p``."""
    N, dim = gen.depth, gen.dim

    def build(with_coords: bool):
        fields = list(gen.fields)
        weights = list(gen.weights)
        if with_coords:
            fields += [PolyVectorField.coordinate(dim, a) for a in range(dim)]
            weights += [N] * dim
        words, lyndon = free_basis_words(weights, N)
        image: dict = {}
        for w in sorted(words, key=len):
            if len(w) == 1:
                image[w] = fields[w[0]]
            else:
                u, v = standard_factorization(w, lyndon)
                image[w] = bracket(image[u], image[v])
        g = free_nilpotent(weights, N)
        return GradedLieBasis(g, [image[w] for w in words], g.weights, tuple(p), words)

    if coordinates is None:
        basis = build(False)
        if np.linalg.matrix_rank(basis.anchor(p)) == dim:
            return basis
        coordinates = True
    return build(bool(coordinates))


def _as_vector(v, size: int) -> np.ndarray:
    coords = v.coords if hasattr(v, "coords") else v
    arr = np.array([float(c) for c in coords], dtype=float)
    if arr.shape != (size,):
        raise ValueError("algebra point has the wrong length")
    return arr


def local_inverse_k(basis, v0, y: Sequence, x: Sequence, tol: float = 1e-11, flow_tol: float = 1e-12,
                    max_steps: int = NEWTON_STEPS, radius: float = DOMAIN_RADIUS) -> np.ndarray:
    """``v`` with ``exp(natural(v)).x = y``, sharing the kernel component of ``v0``.

    ``basis`` is anything with ``fields`` (a :class:`GradedLieBasis` or a minimal graded basis).
    Raises :class:`OutsideDomain` when Newton does not converge or an iterate leaves
    the ball of coefficients of norm ``radius`` (large coefficients make the flows stiff).
    """
    fields = list(basis.fields)
    fns = [X.numeric() for X in fields]
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    v0 = _as_vector(v0, len(fields))
    A = np.array([[float(c) for c in X.evaluate(x)] for X in fields]).T
    _, s, Vh = np.linalg.svd(A)
    rank = int(np.sum(s > 1e-12 * max(1.0, s[0] if len(s) else 1.0)))
    if rank < len(x):
        raise OutsideDomain("the anchor map is not surjective at x")
    C = Vh[:rank].T  # orthonormal complement of the kernel
    base = v0 - C @ (C.T @ v0)

    def F(c):
        v = base + C @ c
        if np.linalg.norm(v) > radius:
            raise FlowEscaped(f"iterate left the coefficient ball of radius {radius:g}")
        f = lambda z: sum(vi * fn(z) for vi, fn in zip(v, fns) if vi != 0) if np.any(v) else np.zeros_like(z)
        return flow_callable(f, x, flow_tol) - y

    c = C.T @ v0
    try:
        r = F(c)
    except FlowEscaped as exc:
        raise OutsideDomain(str(exc)) from exc
    for _ in range(max_steps):
        if np.linalg.norm(r) < tol:
            return base + C @ c
        h = 1e-6 * max(1.0, np.linalg.norm(c))
        J = np.empty((len(x), rank))
        for j in range(rank):
            e = np.zeros(rank)
            e[j] = h
            try:
                J[:, j] = (F(c + e) - F(c - e)) / (2 * h)
            except FlowEscaped as exc:
                raise OutsideDomain(str(exc)) from exc
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        lam = 1.0
        while lam > 1e-4:
            try:
                r_new = F(c + lam * step)
            except FlowEscaped:
                lam /= 2
                continue
            if np.linalg.norm(r_new) < np.linalg.norm(r):
                c, r = c + lam * step, r_new
                break
            lam /= 2
        else:
            break
    if np.linalg.norm(r) < tol:
        return base + C @ c
    raise OutsideDomain(f"Newton iteration stalled at residual {np.linalg.norm(r):.3g}")


def natural_flow(basis, v, x, tol: float = 1e-12) -> np.ndarray:
    """``exp(natural(v)) . x``."""
    fns = [X.numeric() for X in basis.fields]
    v = _as_vector(v, len(fns))
    if not np.any(v):
        return np.asarray(x, dtype=float)
    return flow_callable(lambda z: sum(vi * fn(z) for vi, fn in zip(v, fns) if vi != 0), x, tol)


def pi_map(basis: GradedLieBasis, Y, X, x, t, tol: float = 1e-12) -> np.ndarray:
    g = basis.algebra
    Xt = dilate(g, t, list(_as_vector(X, g.dim)))
    Yt = dilate(g, t, list(_as_vector(Y, g.dim)))
    return natural_flow(basis, Yt, natural_flow(basis, Xt, x, tol), tol)


def phi_map(basis: GradedLieBasis, Y, X, x: Sequence, t, flow_tol: float = 1e-12, tol: float = 1e-11) -> list:
    """First component of ``phi(Y, X, x, t)``; at ``t = 0`` this is the group law ``bch(Y, X)``."""
    g = basis.algebra
    if t == 0:
        yc = Y.coords if hasattr(Y, "coords") else Y
        xc = X.coords if hasattr(X, "coords") else X
        return bch(g, list(yc), list(xc))
    if t < 0:
        raise ValueError("t must be nonnegative")
    # exact rationals keep alpha_{1/t} o alpha_t the identity
    t = Fraction(t)
    y_ = [Fraction(float(c)) for c in _as_vector(Y, g.dim)]
    x_ = [Fraction(float(c)) for c in _as_vector(X, g.dim)]
    if not any(y_):
        # k(v, exp(natural(v)).x, x) = v, so nothing needs integrating
        return [float(c) for c in x_]
    Z = bch(g, dilate(g, t, y_), dilate(g, t, x_))
    try:
        target = pi_map(basis, y_, x_, x, t, flow_tol)
        if np.linalg.norm(natural_flow(basis, Z, x, flow_tol) - target) < tol:
            v = Z
        else:
            v = [Fraction(float(c)) for c in local_inverse_k(basis, Z, target, x, tol=tol, flow_tol=flow_tol)]
    except FlowEscaped as exc:
        raise OutsideDomain(str(exc)) from exc
    return [float(c) for c in dilate(g, 1 / t, v)]
