"""Polynomial vector fields on R^m with exact rational coefficients.

A :class:`MultiPoly` is a canonical sparse map ``exponent -> coefficient``; a
:class:`PolyVectorField` is a tuple of ``m`` such polynomials in ``m``
variables. Brackets, jets and evaluation are exact whenever the inputs are
rational. Time-one flows are numeric.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Sequence

import mpmath
import numpy as np
from scipy.integrate import solve_ivp

from .scalars import Gaussian, to_exact

__all__ = [
    "MultiPoly",
    "PolyVectorField",
    "Jet",
    "FlowEscaped",
    "ParseError",
    "bracket",
    "evaluate",
    "flow_time_one",
    "flow_time_one_mp",
    "jet_at",
    "parse_poly",
    "parse_field",
    "variable_names",
]


class ParseError(ValueError):
    pass


class FlowEscaped(RuntimeError):
    """Raised when a trajectory leaves the divergence bound before time one."""


def variable_names(n: int) -> list[str]:
    if n <= 3:
        return ["x", "y", "z"][:n]
    return [f"x{i + 1}" for i in range(n)]


def _grlex_key(exps):
    return (sum(exps), exps)


def _is_zero(c) -> bool:
    return c == 0


def _fmt_coeff(c) -> str:
    if isinstance(c, Fraction):
        return str(c)
    if isinstance(c, float):
        return repr(c)
    return str(c)


class MultiPoly:
    """Sparse multivariate polynomial in canonical form (no zero coefficients)."""

    __slots__ = ("num_vars", "_terms", "_sorted")

    def __init__(self, num_vars: int, terms: dict | None = None):
        self.num_vars = num_vars
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != num_vars:
                raise ValueError(f"exponent {exps} does not match {num_vars} variables")
            if any(e < 0 for e in exps):
                raise ValueError("negative exponent")
            c = to_exact(c)
            if not _is_zero(c):
                clean[exps] = c
        self._terms = clean
        self._sorted = None

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "MultiPoly":
        return cls(n)

    @classmethod
    def const(cls, n: int, c) -> "MultiPoly":
        return cls(n, {(0,) * n: c})

    @classmethod
    def var(cls, n: int, i: int) -> "MultiPoly":
        e = [0] * n
        e[i] = 1
        return cls(n, {tuple(e): 1})

    @classmethod
    def monomial(cls, exps: Sequence[int], c=1) -> "MultiPoly":
        return cls(len(exps), {tuple(exps): c})

    # -- basic properties ---------------------------------------------------
    @property
    def terms(self) -> tuple:
        """Terms in graded-lexicographic order, highest first."""
        if self._sorted is None:
            self._sorted = tuple(sorted(self._terms.items(), key=lambda kv: _grlex_key(kv[0]), reverse=True))
        return self._sorted

    def items(self):
        return self._terms.items()

    def coeff(self, exps) -> object:
        return self._terms.get(tuple(exps), 0)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self._terms)

    def constant_term(self):
        return self._terms.get((0,) * self.num_vars, 0)

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self.num_vars == other.num_vars and self._terms == other._terms
        if self.is_constant():
            return self.constant_term() == other
        return NotImplemented

    def __hash__(self):
        return hash((self.num_vars, self.terms))

    # -- arithmetic ---------------------------------------------------------
    def _lift(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.num_vars != self.num_vars:
                raise ValueError("variable count mismatch")
            return other
        return MultiPoly.const(self.num_vars, other)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0) + c
        return MultiPoly(self.num_vars, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.num_vars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, PolyVectorField):
            return NotImplemented
        if not isinstance(other, MultiPoly):
            other = to_exact(other)
            return MultiPoly(self.num_vars, {e: c * other for e, c in self._terms.items()})
        other = self._lift(other)
        out: dict = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return MultiPoly(self.num_vars, out)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = MultiPoly.const(self.num_vars, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def map_coeffs(self, fn: Callable) -> "MultiPoly":
        return MultiPoly(self.num_vars, {e: fn(c) for e, c in self._terms.items()})

    # -- calculus -----------------------------------------------------------
    def diff(self, i: int, order: int = 1) -> "MultiPoly":
        out = {}
        for e, c in self._terms.items():
            if e[i] < order:
                continue
            f = math.perm(e[i], order)
            ne = list(e)
            ne[i] -= order
            out[tuple(ne)] = c * f
        return MultiPoly(self.num_vars, out)

    def evaluate(self, point: Sequence):
        if len(point) != self.num_vars:
            raise ValueError(f"point has {len(point)} coordinates, expected {self.num_vars}")
        total = 0
        for e, c in self._terms.items():
            term = c
            for x, k in zip(point, e):
                if k:
                    term = term * x**k
            total = total + term
        return total

    def shift(self, p: Sequence) -> "MultiPoly":
        """Polynomial in u with ``self(p + u) = result(u)``."""
        p = [to_exact(v) for v in p]
        out: dict = {}
        for e, c in self._terms.items():
            per_var = []
            for pi, k in zip(p, e):
                per_var.append([(j, math.comb(k, j) * pi ** (k - j)) for j in range(k + 1)])
            for combo in product(*per_var):
                coef = c
                for _, b in combo:
                    coef = coef * b
                ne = tuple(j for j, _ in combo)
                out[ne] = out.get(ne, 0) + coef
        return MultiPoly(self.num_vars, out)

    def truncate(self, K: int) -> "MultiPoly":
        return MultiPoly(self.num_vars, {e: c for e, c in self._terms.items() if sum(e) <= K})

    def homogeneous_part(self, k: int) -> "MultiPoly":
        return MultiPoly(self.num_vars, {e: c for e, c in self._terms.items() if sum(e) == k})

    def substitute(self, images: Sequence["MultiPoly"]) -> "MultiPoly":
        """Compose with polynomial maps: variable i -> images[i]."""
        if len(images) != self.num_vars:
            raise ValueError("need one image per variable")
        n = images[0].num_vars if images else 0
        total = MultiPoly.zero(n)
        for e, c in self._terms.items():
            term = MultiPoly.const(n, c)
            for img, k in zip(images, e):
                if k:
                    term = term * img**k
            total = total + term
        return total

    # -- numerics -----------------------------------------------------------
    def compile(self) -> Callable[[np.ndarray], float]:
        """Fast float evaluator ``f(x) -> float``."""
        if not self._terms:
            return lambda x: 0.0
        exps = np.array([e for e in self._terms], dtype=float)
        coefs = np.array([float(c) for c in self._terms.values()])

        def f(x):
            return float(coefs @ np.prod(np.asarray(x, dtype=float) ** exps, axis=1))

        return f

    # -- text ---------------------------------------------------------------
    def to_str(self, names: Sequence[str] | None = None) -> str:
        names = list(names or variable_names(self.num_vars))
        if not self._terms:
            return "0"
        parts = []
        for e, c in self.terms:
            mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k)
            if isinstance(c, Gaussian) and c.im != 0:
                cs = str(c)
                sign = "+"
                body = cs if not mono else f"{cs}*{mono}"
            else:
                val = c.re if isinstance(c, Gaussian) else c
                sign = "-" if val < 0 else "+"
                mag = -val if val < 0 else val
                if not mono:
                    body = _fmt_coeff(mag)
                elif mag == 1:
                    body = mono
                else:
                    body = f"{_fmt_coeff(mag)}*{mono}"
            parts.append((sign, body))
        first_sign, first = parts[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"MultiPoly({self.num_vars}, '{self.to_str()}')"


class PolyVectorField:
    """Vector field sum_i components[i] * d/dx_i on R^dim."""

    __slots__ = ("dim", "components", "_compiled", "_jac")

    def __init__(self, components: Sequence[MultiPoly]):
        components = tuple(components)
        if not components:
            raise ValueError("a vector field needs at least one component")
        dim = len(components)
        for c in components:
            if c.num_vars != dim:
                raise ValueError("all components must have num_vars == dim")
        self.dim = dim
        self.components = components
        self._compiled = None
        self._jac = None

    @classmethod
    def zero(cls, dim: int) -> "PolyVectorField":
        return cls([MultiPoly.zero(dim)] * dim)

    @classmethod
    def coordinate(cls, dim: int, i: int) -> "PolyVectorField":
        """The constant field d/dx_i."""
        comps = [MultiPoly.zero(dim)] * dim
        comps[i] = MultiPoly.const(dim, 1)
        return cls(comps)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    @property
    def degree(self) -> int:
        return max(c.degree for c in self.components)

    def __eq__(self, other):
        return isinstance(other, PolyVectorField) and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def _check(self, other: "PolyVectorField"):
        if not isinstance(other, PolyVectorField):
            raise TypeError("expected a PolyVectorField")
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other):
        self._check(other)
        return PolyVectorField([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other):
        self._check(other)
        return PolyVectorField([a - b for a, b in zip(self.components, other.components)])

    def __neg__(self):
        return PolyVectorField([-a for a in self.components])

    def __mul__(self, scalar):
        if isinstance(scalar, PolyVectorField):
            return NotImplemented
        if isinstance(scalar, MultiPoly):
            return PolyVectorField([scalar * a for a in self.components])
        s = to_exact(scalar)
        return PolyVectorField([a * s for a in self.components])

    __rmul__ = __mul__

    def apply(self, f: MultiPoly) -> MultiPoly:
        """Derivative of the function ``f`` along the field."""
        out = MultiPoly.zero(self.dim)
        for i, c in enumerate(self.components):
            if not c.is_zero():
                out = out + c * f.diff(i)
        return out

    def evaluate(self, p: Sequence) -> list:
        if len(p) != self.dim:
            raise ValueError(f"point has {len(p)} coordinates, expected {self.dim}")
        return [c.evaluate(p) for c in self.components]

    def shift(self, p: Sequence) -> "PolyVectorField":
        return PolyVectorField([c.shift(p) for c in self.components])

    def truncate(self, K: int) -> "PolyVectorField":
        return PolyVectorField([c.truncate(K) for c in self.components])

    def coefficient_vector(self, K: int) -> dict:
        """Sparse coordinates ``(component, exponent) -> coeff`` of terms of degree <= K."""
        out = {}
        for i, c in enumerate(self.components):
            for e, v in c.items():
                if sum(e) <= K:
                    out[(i, e)] = v
        return out

    # -- numerics -----------------------------------------------------------
    def numeric(self) -> Callable[[np.ndarray], np.ndarray]:
        if self._compiled is None:
            fns = [c.compile() for c in self.components]
            self._compiled = lambda x: np.array([f(x) for f in fns])
        return self._compiled

    def numeric_jacobian(self) -> Callable[[np.ndarray], np.ndarray]:
        if self._jac is None:
            fns = [[c.diff(j).compile() for j in range(self.dim)] for c in self.components]
            self._jac = lambda x: np.array([[f(x) for f in row] for row in fns])
        return self._jac

    def to_str(self, names: Sequence[str] | None = None) -> str:
        names = list(names or variable_names(self.dim))
        parts = []
        for name, c in zip(names, self.components):
            if c.is_zero():
                continue
            basis = f"d/d{name}"
            terms = c.terms
            if len(terms) == 1:
                (e, coef), = terms
                mono = MultiPoly(self.dim, {e: coef}).to_str(names)
                if mono == "1":
                    parts.append(basis)
                elif mono == "-1":
                    parts.append(f"-{basis}")
                elif mono.startswith("-") and " " not in mono:
                    parts.append(f"-{mono[1:]}*{basis}")
                else:
                    parts.append(f"{mono}*{basis}")
            else:
                parts.append(f"({c.to_str(names)})*{basis}")
        if not parts:
            return "0"
        text = parts[0]
        for p in parts[1:]:
            text += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return text

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"PolyVectorField('{self.to_str()}')"


def bracket(X: PolyVectorField, Y: PolyVectorField) -> PolyVectorField:
    """Lie bracket with components ``sum_i X_i d_i Y_j - Y_i d_i X_j``."""
    X._check(Y)
    return PolyVectorField([X.apply(yj) - Y.apply(xj) for xj, yj in zip(X.components, Y.components)])


def evaluate(X: PolyVectorField, p: Sequence) -> list:
    return X.evaluate(p)


# -- jets ---------------------------------------------------------------------


@dataclass(frozen=True)
class Jet:
    """Taylor data of a field at ``base_point``; ``field`` is written in u = x - p."""

    base_point: tuple
    order: int
    field: PolyVectorField

    def recentered(self) -> PolyVectorField:
        """The truncated Taylor polynomial written back in the original coordinates."""
        return self.field.shift([-to_exact(v) for v in self.base_point])

    def is_zero(self) -> bool:
        return self.field.is_zero()


def jet_at(X: PolyVectorField, p: Sequence, K: int) -> Jet:
    if K < 0:
        raise ValueError("jet order must be >= 0")
    if len(p) != X.dim:
        raise ValueError("point dimension mismatch")
    return Jet(tuple(to_exact(v) for v in p), K, X.shift(p).truncate(K))


# -- flows --------------------------------------------------------------------

DEFAULT_ESCAPE_BOUND = 1e9


def flow_time_one(X: PolyVectorField, p: Sequence, tol: float = 1e-10, bound: float = DEFAULT_ESCAPE_BOUND) -> np.ndarray:
    """Time-one flow of ``X`` from ``p``.

    Uses the DOP853 embedded pair with ``rtol = atol = tol``. Tolerances below
    1e-13 cannot be met in double precision; those requests are routed to a
    multiprecision Taylor integrator and the result is rounded to float.
    """
    p = np.asarray([float(v) for v in p])
    if len(p) != X.dim:
        raise ValueError("point dimension mismatch")
    if X.is_zero():
        return p.copy()
    if tol < 1e-13:
        digits = int(math.ceil(-math.log10(tol))) + 6
        return np.array([float(v) for v in flow_time_one_mp(X, p, digits, bound=bound)])
    return _flow_double(X, p, tol, bound)


def _flow_double(X: PolyVectorField, p: np.ndarray, tol: float, bound: float) -> np.ndarray:
    return flow_callable(X.numeric(), p, tol, bound)


def flow_callable(f: Callable[[np.ndarray], np.ndarray], p: Sequence, tol: float = 1e-10,
                  bound: float = DEFAULT_ESCAPE_BOUND) -> np.ndarray:
    """Time-one flow of an autonomous field given as a numeric callable (DOP853)."""
    p = np.asarray(p, dtype=float)

    def escape(_, y):
        return bound - np.max(np.abs(y))

    escape.terminal = True
    with np.errstate(over="raise", invalid="raise"):
        try:
            sol = solve_ivp(lambda _, y: f(y), (0.0, 1.0), p, method="DOP853", rtol=tol, atol=tol,
                            events=escape)
        except FloatingPointError as exc:
            raise FlowEscaped(f"trajectory from {p.tolist()} overflowed") from exc
    if sol.status == 1 or not np.all(np.isfinite(sol.y[:, -1])):
        raise FlowEscaped(f"trajectory from {p.tolist()} left |x| <= {bound:g} before t=1")
    if sol.status != 0:
        raise FlowEscaped(f"integrator failed: {sol.message}")
    return sol.y[:, -1]


def _mp_poly(poly: MultiPoly):
    terms = []
    for e, c in poly.items():
        terms.append((e, _mp_scalar(c)))

    def f(x):
        total = mpmath.mpf(0)
        for e, c in terms:
            term = c
            for xi, k in zip(x, e):
                if k:
                    term *= xi**k
            total += term
        return total

    return f


def _mp_scalar(v):
    if isinstance(v, (mpmath.mpf, float)):
        return mpmath.mpf(v)
    v = to_exact(v)
    return mpmath.mpf(v.numerator) / v.denominator if isinstance(v, Fraction) else mpmath.mpf(v)


def flow_time_one_mp(X: PolyVectorField, p: Sequence, digits: int = 30, bound: float = DEFAULT_ESCAPE_BOUND) -> list:
    """Multiprecision time-one flow (Taylor series integrator), ``digits`` significant digits."""
    # cheap double-precision pass first so escapes surface as FlowEscaped, not a hang
    _flow_double(X, np.asarray([float(v) for v in p]), 1e-6, bound)
    with mpmath.workdps(digits):
        fns = [_mp_poly(c) for c in X.components]
        x0 = [_mp_scalar(v) for v in p]
        sol = mpmath.odefun(lambda _, y: [fn(y) for fn in fns], 0, x0)
        return [+v for v in sol(1)]


# -- text grammar -------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<basis>d/d(?:x[0-9]+|[xyz])|d(?:x[0-9]+|[xyz])(?![A-Za-z0-9_]))"
    r"|(?P<num>[0-9]+(?:/[0-9]+)?)"
    r"|(?P<gen>X[0-9]+)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


def _variable_index(name: str, n: int) -> int:
    aliases = {"x": 0, "y": 1, "z": 2}
    if name in aliases and n <= 3:
        idx = aliases[name]
    elif re.fullmatch(r"x[0-9]+", name):
        idx = int(name[1:]) - 1
    else:
        raise ParseError(f"unknown variable {name!r}")
    if not 0 <= idx < n:
        raise ParseError(f"variable {name!r} out of range for dimension {n}")
    return idx


class _Parser:
    """Recursive-descent parser; ``atom_hook`` maps leaf tokens to values."""

    def __init__(self, tokens, atom_hook, ops):
        self.tokens = tokens
        self.i = 0
        self.atom_hook = atom_hook
        self.ops = ops

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None or (value is not None and tok[1] != value):
            raise ParseError(f"expected {value!r}, got {tok[1]!r}")
        self.i += 1
        return tok

    def parse(self):
        v = self.expr()
        if self.i != len(self.tokens):
            raise ParseError(f"trailing input at token {self.peek()[1]!r}")
        return v

    def expr(self):
        v = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            v = self.ops["add"](v, rhs) if op == "+" else self.ops["add"](v, self.ops["neg"](rhs))
        return v

    def term(self):
        v = self.unary()
        while self.peek()[1] == "*":
            self.take()
            v = self.ops["mul"](v, self.unary())
        return v

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return self.ops["neg"](self.unary())
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        v = self.atom()
        if self.peek()[1] == "^":
            self.take()
            kind, val = self.take()
            if kind != "num" or "/" in val:
                raise ParseError("exponent must be a non-negative integer")
            v = self.ops["pow"](v, int(val))
        return v

    def atom(self):
        kind, val = self.peek()
        if val == "(":
            self.take()
            v = self.expr()
            self.take(")")
            return v
        if kind is None:
            raise ParseError("unexpected end of input")
        self.i += 1
        return self.atom_hook(kind, val)


class _Lin:
    """Parse value: scalar polynomial plus optional vector part."""

    __slots__ = ("scalar", "vec")

    def __init__(self, scalar, vec=None):
        self.scalar = scalar
        self.vec = vec


def _lin_ops(n):
    def add(a, b):
        if a.vec is None and b.vec is None:
            return _Lin(a.scalar + b.scalar)
        va = a.vec or [MultiPoly.zero(n)] * n
        vb = b.vec or [MultiPoly.zero(n)] * n
        if (a.vec is None and not a.scalar.is_zero()) or (b.vec is None and not b.scalar.is_zero()):
            raise ParseError("cannot add a scalar to a vector field")
        return _Lin(MultiPoly.zero(n), [x + y for x, y in zip(va, vb)])

    def neg(a):
        return _Lin(-a.scalar, None if a.vec is None else [-x for x in a.vec])

    def mul(a, b):
        if a.vec is not None and b.vec is not None:
            raise ParseError("product of two vector fields is not a vector field")
        if a.vec is not None:
            return _Lin(MultiPoly.zero(n), [x * b.scalar for x in a.vec])
        if b.vec is not None:
            return _Lin(MultiPoly.zero(n), [a.scalar * x for x in b.vec])
        return _Lin(a.scalar * b.scalar)

    def pow_(a, k):
        if a.vec is not None:
            raise ParseError("cannot raise a vector field to a power")
        return _Lin(a.scalar**k)

    return {"add": add, "neg": neg, "mul": mul, "pow": pow_}


def _lin_atom(n):
    def hook(kind, val):
        if kind == "num":
            return _Lin(MultiPoly.const(n, Fraction(val)))
        if kind == "name":
            return _Lin(MultiPoly.var(n, _variable_index(val, n)))
        if kind == "basis":
            name = val[3:] if val.startswith("d/d") else val[1:]
            vec = [MultiPoly.zero(n)] * n
            vec = list(vec)
            vec[_variable_index(name, n)] = MultiPoly.const(n, 1)
            return _Lin(MultiPoly.zero(n), vec)
        raise ParseError(f"unexpected token {val!r}")

    return hook


def parse_poly(text: str, num_vars: int) -> MultiPoly:
    v = _Parser(_tokenize(text), _lin_atom(num_vars), _lin_ops(num_vars)).parse()
    if v.vec is not None:
        raise ParseError("expected a polynomial, got a vector field")
    return v.scalar


def parse_field(text: str, dim: int) -> PolyVectorField:
    """Parse e.g. ``"x^2*d/dx + 3/2*y*dy"`` into a field on R^dim."""
    v = _Parser(_tokenize(text), _lin_atom(dim), _lin_ops(dim)).parse()
    if v.vec is None:
        if v.scalar.is_zero():
            return PolyVectorField.zero(dim)
        raise ParseError("expected a vector field, got a scalar polynomial")
    return PolyVectorField(v.vec)


def random_field(rng: np.random.Generator, dim: int, max_degree: int, density: float = 0.5,
                 coeff_range: int = 3) -> PolyVectorField:
    """Random rational polynomial field, used by property tests and demos."""
    exps = [e for e in product(range(max_degree + 1), repeat=dim) if sum(e) <= max_degree]
    comps = []
    for _ in range(dim):
        terms = {}
        for e in exps:
            if rng.random() < density:
                num = int(rng.integers(-coeff_range, coeff_range + 1))
                den = int(rng.integers(1, 3))
                terms[e] = Fraction(num, den)
        comps.append(MultiPoly(dim, terms))
    return PolyVectorField(comps)


def fields_from_text(texts: Iterable[str], dim: int) -> list[PolyVectorField]:
    return [parse_field(t, dim) for t in texts]
