"""Noncommutative operator polynomials, principal parts, and their symbols.

An :class:`NCPolynomial` is written over an alphabet of letters, each a
vector field with a weight. Its principal part at ``p`` keeps the monomials of
top weighted degree with coefficients frozen at ``p``. Symbols are obtained
by sending every letter to its fiber class and then through a representation:
a character (``e_k -> i xi_k``) or an induced representation built with
Kirillov's orbit method, realized as a differential operator on ``R^q``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations, product
from typing import Sequence

from ._linalg import ExactSpan, nullspace_exact
from .filtration import GradedBasisData
from .osculating import GradedLieAlgebra
from .polyfield import MultiPoly, ParseError, _Parser, _tokenize, _variable_index
from .scalars import I, Gaussian, to_exact

log = logging.getLogger(__name__)


class _Undefined:
    def __repr__(self):
        return "UNDEFINED_ORDER"

    def __bool__(self):
        return False


UNDEFINED_ORDER = _Undefined()


class RepresentationError(RuntimeError):
    """The induced-representation construction failed one of its self-checks."""


# -- NC polynomials ---------------------------------------------------------------------


@dataclass(frozen=True)
class NCPolynomial:
    """``sum coeff(x) * L_{i1} L_{i2} ...`` with ``letters[i] = (field, weight)``."""

    letters: tuple
    monomials: tuple  # ((coeff MultiPoly, letter-index tuple), ...)

    def __post_init__(self):
        merged: dict = {}
        for coeff, word in self.monomials:
            word = tuple(int(i) for i in word)
            for i in word:
                if not 0 <= i < len(self.letters):
                    raise ValueError(f"letter index {i} out of range")
            merged[word] = merged[word] + coeff if word in merged else coeff
        mons = tuple((c, w) for w, c in sorted(merged.items(), key=lambda kv: (len(kv[0]), kv[0])) if not c.is_zero())
        object.__setattr__(self, "monomials", mons)

    @property
    def dim(self) -> int:
        return self.letters[0][0].dim

    def weight_of(self, word) -> int:
        return sum(self.letters[i][1] for i in word)

    def __mul__(self, other: "NCPolynomial") -> "NCPolynomial":
        if other.letters != self.letters:
            raise ValueError("alphabets differ")
        mons = []
        for ca, wa in self.monomials:
            for cb, wb in other.monomials:
                if wa and not cb.is_constant():
                    raise ValueError("coefficients to the right of a letter are not supported")
                mons.append((ca * cb, wa + wb))
        return NCPolynomial(self.letters, tuple(mons))

    def to_str(self) -> str:
        if not self.monomials:
            return "0"
        parts = []
        for c, w in self.monomials:
            word = "*".join(f"X{i + 1}" for i in w)
            cs = c.to_str()
            if not word:
                parts.append(f"({cs})")
            elif cs == "1":
                parts.append(word)
            else:
                parts.append(f"({cs})*{word}")
        return " + ".join(parts)

    def __str__(self):
        return self.to_str()


def _nc_ops(n, letters):
    def lift(v):
        return v

    def add(a, b):
        out = dict(a)
        for w, c in b.items():
            out[w] = out[w] + c if w in out else c
        return out

    def neg(a):
        return {w: -c for w, c in a.items()}

    def mul(a, b):
        out: dict = {}
        for wa, ca in a.items():
            for wb, cb in b.items():
                if wa and not cb.is_constant():
                    raise ParseError("polynomial coefficients must stand to the left of the letters they multiply")
                w = wa + wb
                out[w] = out[w] + ca * cb if w in out else ca * cb
        return out

    def pow_(a, k):
        out = {(): MultiPoly.const(n, 1)}
        for _ in range(k):
            out = mul(out, a)
        return out

    return {"add": add, "neg": neg, "mul": mul, "pow": pow_}


def parse_nc(text: str, letters: Sequence[tuple]) -> NCPolynomial:
    """Parse e.g. ``"X1*X2 - X3^2"``; ``letters[i] = (PolyVectorField, weight)`` is ``X{i+1}``."""
    letters = tuple((f, int(w)) for f, w in letters)
    if not letters:
        raise ValueError("empty alphabet")
    n = letters[0][0].dim

    def hook(kind, val):
        if kind == "num":
            return {(): MultiPoly.const(n, Fraction(val))}
        if kind == "gen":
            i = int(val[1:]) - 1
            if not 0 <= i < len(letters):
                raise ParseError(f"unknown letter {val}")
            return {(i,): MultiPoly.const(n, 1)}
        if kind == "name":
            return {(): MultiPoly.var(n, _variable_index(val, n))}
        raise ParseError(f"unexpected token {val!r}")

    value = _Parser(_tokenize(text), hook, _nc_ops(n, letters)).parse()
    return NCPolynomial(letters, tuple((c, w) for w, c in value.items()))


def weighted_order(P: NCPolynomial):
    if not P.monomials:
        return UNDEFINED_ORDER
    return max(P.weight_of(w) for _, w in P.monomials)


@dataclass(frozen=True)
class PrincipalPart:
    order: int
    monomials: tuple  # ((value at p, word), ...)
    letters: tuple

    def is_zero(self) -> bool:
        return not self.monomials

    def __mul__(self, other: "PrincipalPart") -> "PrincipalPart":
        mons: dict = {}
        for ca, wa in self.monomials:
            for cb, wb in other.monomials:
                mons[wa + wb] = mons.get(wa + wb, 0) + ca * cb
        return PrincipalPart(self.order + other.order,
                             tuple((c, w) for w, c in sorted(mons.items()) if c != 0), self.letters)


def principal_part(P: NCPolynomial, p: Sequence, order: int | None = None) -> PrincipalPart:
    """Top-weight monomials of ``P`` with coefficients evaluated at ``p``.

    ``order`` pads to a prescribed order: when it exceeds the order of ``P``
    the principal part is zero.
    """
    k = weighted_order(P)
    if k is UNDEFINED_ORDER:
        return PrincipalPart(order or 0, (), P.letters)
    if order is not None and order < k:
        raise ValueError(f"requested order {order} is below the weighted order {k}")
    target = k if order is None else order
    pt = [to_exact(v) for v in p]
    mons = []
    for c, w in P.monomials:
        if P.weight_of(w) == target:
            v = c.evaluate(pt)
            if v != 0:
                mons.append((v, w))
    return PrincipalPart(target, tuple(mons), P.letters)


def letter_classes(letters: Sequence[tuple], basis: GradedBasisData) -> list[list]:
    """Coordinates of ``[L]_{w,p}`` in the graded basis for every letter ``(L, w)``."""
    return [basis.express(f, w) for f, w in letters]


def symbol_character(PP: PrincipalPart, xi: Sequence, classes: Sequence[Sequence]):
    """Symbol in the one-dimensional representation ``e_k -> i xi_k``."""
    xi = [to_exact(v) for v in (xi.coords if hasattr(xi, "coords") else xi)]
    exact = all(isinstance(v, Fraction) for v in xi) and all(isinstance(to_exact(c), Fraction)
                                                            for cls in classes for c in cls)
    unit = I if exact else 1j
    letter_vals = [unit * sum(to_exact(c) * x for c, x in zip(cls, xi)) for cls in classes]
    total = Gaussian(0) if exact else 0j
    for coeff, word in PP.monomials:
        term = coeff
        for i in word:
            term = term * letter_vals[i]
        total = total + term
    return total


# -- differential operators with polynomial coefficients --------------------------------------


def _poly_names(q: int) -> list[str]:
    return ["y"] if q == 1 else [f"y{i + 1}" for i in range(q)]


class SymbolOperator:
    """``sum_alpha c_alpha(y) d^alpha`` on ``R^q`` with exact (Gaussian) polynomial coefficients."""

    __slots__ = ("q", "terms")

    def __init__(self, q: int, terms: dict | None = None):
        self.q = q
        clean = {}
        for alpha, c in (terms or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != q:
                raise ValueError("multi-index length must equal q")
            if not isinstance(c, MultiPoly):
                c = MultiPoly.const(q, c)
            if not c.is_zero():
                clean[alpha] = clean[alpha] + c if alpha in clean else c
        self.terms = {a: c for a, c in clean.items() if not c.is_zero()}

    @classmethod
    def constant(cls, q: int, c) -> "SymbolOperator":
        return cls(q, {(0,) * q: c})

    @classmethod
    def derivative(cls, q: int, j: int, k: int = 1) -> "SymbolOperator":
        alpha = [0] * q
        alpha[j] = k
        return cls(q, {tuple(alpha): 1})

    @classmethod
    def multiplication(cls, poly: MultiPoly) -> "SymbolOperator":
        return cls(poly.num_vars, {(0,) * poly.num_vars: poly})

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def order(self) -> int:
        return max((sum(a) for a in self.terms), default=-1)

    def __eq__(self, other):
        return isinstance(other, SymbolOperator) and self.q == other.q and self.terms == other.terms

    def __hash__(self):
        return hash((self.q, tuple(sorted(self.terms.items()))))

    def __add__(self, other):
        if not isinstance(other, SymbolOperator):
            other = SymbolOperator.constant(self.q, other)
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out[a] + c if a in out else c
        return SymbolOperator(self.q, out)

    __radd__ = __add__

    def __neg__(self):
        return SymbolOperator(self.q, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "SymbolOperator":
        return SymbolOperator(self.q, {a: c * s for a, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, SymbolOperator):
            return self.compose(other)
        return self.scale(other)

    def __rmul__(self, s):
        return self.scale(s)

    def compose(self, other: "SymbolOperator") -> "SymbolOperator":
        """Operator product ``self o other`` (Leibniz rule)."""
        if other.q != self.q:
            raise ValueError("operators act on different spaces")
        out: dict = {}
        for alpha, a in self.terms.items():
            for beta, b in other.terms.items():
                for gamma in product(*(range(k + 1) for k in alpha)):
                    db = b
                    binom = 1
                    for j, g in enumerate(gamma):
                        if g:
                            db = db.diff(j, g)
                            binom *= math.comb(alpha[j], g)
                        if db.is_zero():
                            break
                    if db.is_zero():
                        continue
                    key = tuple(al - g + be for al, g, be in zip(alpha, gamma, beta))
                    term = a * db * binom
                    out[key] = out[key] + term if key in out else term
        return SymbolOperator(self.q, out)

    def commutator(self, other: "SymbolOperator") -> "SymbolOperator":
        return self.compose(other) - other.compose(self)

    def power(self, k: int) -> "SymbolOperator":
        out = SymbolOperator.constant(self.q, 1)
        for _ in range(k):
            out = out.compose(self)
        return out

    def apply(self, f: MultiPoly) -> MultiPoly:
        out = MultiPoly.zero(self.q)
        for alpha, c in self.terms.items():
            g = f
            for j, k in enumerate(alpha):
                if k:
                    g = g.diff(j, k)
            out = out + c * g
        return out

    def formal_adjoint(self) -> "SymbolOperator":
        """``sum (-d)^alpha o conj(c_alpha)``."""
        out = SymbolOperator(self.q)
        for alpha, c in self.terms.items():
            conj = c.map_coeffs(lambda v: v.conjugate() if hasattr(v, "conjugate") else v)
            sign = (-1) ** sum(alpha)
            d = SymbolOperator(self.q, {alpha: sign})
            out = out + d.compose(SymbolOperator.multiplication(conj))
        return out

    def is_formally_symmetric(self) -> bool:
        return self == self.formal_adjoint()

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        names = _poly_names(self.q)
        dnames = ["D"] if self.q == 1 else [f"D{i + 1}" for i in range(self.q)]
        parts = []
        for alpha in sorted(self.terms, key=lambda a: (-sum(a), tuple(-x for x in a))):
            c = self.terms[alpha].to_str(names)
            ds = "*".join(f"{d}^{a}" for d, a in zip(dnames, alpha) if a)
            parts.append(f"({c})*{ds}" if ds else f"({c})")
        return " + ".join(parts)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"SymbolOperator({self.q}, '{self.to_text()}')"


# -- Kirillov induction ------------------------------------------------------------------------


def _exact_vector(v) -> list:
    out = []
    for c in v:
        c = to_exact(c)
        if isinstance(c, float):
            c = Fraction(c).limit_denominator(10**12)
        out.append(c)
    return out


def _ordered_flag(g: GradedLieAlgebra) -> list[int]:
    # heaviest first; within a weight the later index enters first so that the
    # coexponential basis picks up the lowest indices
    return sorted(range(g.dim), key=lambda i: (-g.weights[i], -i))


def _unit(d, i):
    return [Fraction(int(j == i)) for j in range(d)]


def _combine(vectors, coeffs, d):
    out = [Fraction(0)] * d
    for v, c in zip(vectors, coeffs):
        if c != 0:
            out = [a + c * b for a, b in zip(out, v)]
    return out


def vergne_polarization(g: GradedLieAlgebra, ell: Sequence) -> list[list]:
    """``sum_j rad(ell restricted to g_j)`` along a flag of ideals ``g_j`` (top weights first)."""
    d = g.dim
    ell = _exact_vector(ell)
    order = _ordered_flag(g)
    span = ExactSpan()
    basis = []
    for j in range(1, d + 1):
        E = [_unit(d, i) for i in order[:j]]
        B = [[sum(l * c for l, c in zip(ell, g.bracket(Es, Et))) for Es in E] for Et in E]
        for null in nullspace_exact(B):
            v = _combine(E, null, d)
            if span.add({k: c for k, c in enumerate(v) if c != 0}):
                basis.append(v)
    return basis


def orbit_rank(g: GradedLieAlgebra, ell: Sequence) -> int:
    """Rank of ``B(X, Y) = ell([X, Y])``; the orbit has this dimension."""
    ell = _exact_vector(ell)
    d = g.dim
    B = [[sum(l * c for l, c in zip(ell, g.bracket(_unit(d, s), _unit(d, t)))) for s in range(d)] for t in range(d)]
    return d - len(nullspace_exact(B))


def _poly_vec_ad_exp(g: GradedLieAlgebra, Y: list, var: int, q: int, v: list) -> list:
    """``exp(y_var ad Y) v`` for a vector ``v`` with polynomial entries in ``q`` variables."""
    y = MultiPoly.var(q, var)
    out = list(v)
    term = list(v)
    k = 0
    while True:
        k += 1
        # ad(Y) applied to a polynomial vector: bracket is bilinear, so act coefficientwise
        new = [MultiPoly.zero(q) for _ in range(g.dim)]
        for (i, j), row in g.sc.items():
            for kk, c in row.items():
                if Y[i] != 0 and not term[j].is_zero():
                    new[kk] = new[kk] + term[j] * (Y[i] * c)
                if Y[j] != 0 and not term[i].is_zero():
                    new[kk] = new[kk] - term[i] * (Y[j] * c)
        if all(t.is_zero() for t in new):
            break
        term = [t * y * Fraction(1, k) for t in new]
        out = [a + b for a, b in zip(out, term)]
    return out


def _det(M: list[list[MultiPoly]], q: int) -> MultiPoly:
    n = len(M)
    if n == 0:
        return MultiPoly.const(q, 1)
    if n == 1:
        return M[0][0]
    total = MultiPoly.zero(q)
    for j in range(n):
        if M[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = M[0][j] * _det(minor, q)
        total = total + term if j % 2 == 0 else total - term
    return total


def _adjugate(M: list[list[MultiPoly]], q: int) -> list[list[MultiPoly]]:
    n = len(M)
    adj = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(M) if k != i]
            c = _det(minor, q)
            adj[j][i] = c if (i + j) % 2 == 0 else -c
    return adj


@dataclass
class InducedRep:
    algebra: GradedLieAlgebra
    ell: list
    polarization: list
    coexponential: list
    q: int
    action: list = field(repr=False)

    def describe(self) -> list[str]:
        return [op.to_text() for op in self.action]

    def image(self, coords: Sequence) -> SymbolOperator:
        """``d pi`` of the algebra element with the given coordinates."""
        out = SymbolOperator(self.q)
        for c, op in zip(coords, self.action):
            c = to_exact(c)
            if c != 0:
                out = out + op.scale(c)
        return out


def _try_coexponential(g, ell, m_basis, annihilators, Y_idx):
    d, q = g.dim, len(Y_idx)
    Ys = [_unit(d, i) for i in Y_idx]

    def const_vec(v):
        return [MultiPoly.const(q, c) for c in v]

    def ad_prefix(v, upto):
        # Ad(exp(y_1 Y_1) ... exp(y_upto Y_upto)) v, innermost factor applied first
        for j in reversed(range(upto)):
            v = _poly_vec_ad_exp(g, Ys[j], j, q, v)
        return v

    R = [ad_prefix(const_vec(Ys[j]), j) for j in range(q)]
    C = [[sum((R[j][k] * f[k] for k in range(d) if f[k] != 0), MultiPoly.zero(q)) for j in range(q)]
         for f in annihilators]
    det = _det(C, q)
    if not det.is_constant() or det.is_zero():
        return None
    inv_det = Fraction(1) / det.constant_term()
    adj = _adjugate(C, q) if q > 1 else [[MultiPoly.const(q, 1)]]
    action = []
    for i in range(d):
        Z = ad_prefix(const_vec(_unit(d, i)), q)
        PZ = [sum((Z[k] * f[k] for k in range(d) if f[k] != 0), MultiPoly.zero(q)) for f in annihilators]
        delta = [sum((adj[j][a] * PZ[a] for a in range(q)), MultiPoly.zero(q)) * inv_det for j in range(q)]
        A = list(Z)
        for j in range(q):
            A = [a - delta[j] * r for a, r in zip(A, R[j])]
        ellA = sum((A[k] * ell[k] for k in range(d) if ell[k] != 0), MultiPoly.zero(q))
        terms = {(0,) * q: ellA * I}
        for j in range(q):
            alpha = [0] * q
            alpha[j] = 1
            terms[tuple(alpha)] = delta[j]
        action.append(SymbolOperator(q, terms))
    return action


def induce_representation(g: GradedLieAlgebra, ell: Sequence) -> InducedRep:
    """Irreducible representation attached to the coadjoint orbit of ``ell``.

    Realized on functions of ``q`` variables with
    ``d pi(X) = sum_j delta_j(y) d_j + i ell(A(y))`` where
    ``Ad(s(y)) X = A(y) + sum_j delta_j(y) R_j(y)``, ``A`` in the polarization.
    """
    d = g.dim
    ell = _exact_vector(ell.coords if hasattr(ell, "coords") else ell)
    if len(ell) != d:
        raise ValueError("functional has the wrong dimension")
    m_basis = vergne_polarization(g, ell)
    rank = orbit_rank(g, ell)
    q = rank // 2
    if len(m_basis) != d - q:
        raise RepresentationError(f"polarization has dimension {len(m_basis)}, expected {d - q}")
    annihilators = nullspace_exact(m_basis) if m_basis else [_unit(d, i) for i in range(d)]
    if len(annihilators) != q:
        raise RepresentationError("annihilator of the polarization has the wrong dimension")
    span = ExactSpan()
    for v in m_basis:
        span.add({k: c for k, c in enumerate(v) if c != 0})
    free = [i for i in range(d) if not span.contains({i: Fraction(1)})]
    action = None
    for subset in combinations(free, q):
        test = ExactSpan()
        for v in m_basis:
            test.add({k: c for k, c in enumerate(v) if c != 0})
        if not all(test.add({i: Fraction(1)}) for i in subset):
            continue
        for perm in permutations(subset):
            action = _try_coexponential(g, ell, m_basis, annihilators, list(perm))
            if action is not None:
                Y_idx = list(perm)
                break
        if action is not None:
            break
    if action is None:
        raise RepresentationError("no coexponential ordering gives a polynomial chart")
    rep = InducedRep(g, ell, m_basis, Y_idx, q, action)
    _verify(rep)
    return rep


def _verify(rep: InducedRep) -> None:
    g = rep.algebra
    for i in range(g.dim):
        op = rep.action[i]
        # skew-adjoint iff the vector part is divergence free and the potential is purely imaginary
        div = MultiPoly.zero(rep.q)
        for alpha, c in op.terms.items():
            if sum(alpha) == 1:
                j = alpha.index(1)
                div = div + c.diff(j)
                if any(isinstance(v, Gaussian) and v.im != 0 for _, v in c.items()):
                    raise RepresentationError("vector part has complex coefficients")
        if not div.is_zero():
            raise RepresentationError(f"d pi(e{i + 1}) is not skew-adjoint (divergence {div})")
        pot = op.terms.get((0,) * rep.q)
        if pot is not None and any((v.re if isinstance(v, Gaussian) else v) != 0 for _, v in pot.items()):
            raise RepresentationError(f"d pi(e{i + 1}) has a real potential term")
    for i in range(g.dim):
        for j in range(i + 1, g.dim):
            lhs = rep.action[i].commutator(rep.action[j])
            rhs = SymbolOperator(rep.q)
            for k, c in g.sc.get((i, j), {}).items():
                rhs = rhs + rep.action[k].scale(c)
            if lhs != rhs:
                raise RepresentationError(f"commutator identity fails for (e{i + 1}, e{j + 1})")


def realize_symbol(PP: PrincipalPart, rho: InducedRep, classes: Sequence[Sequence]) -> SymbolOperator:
    """Replace each letter by ``d pi`` of its fiber class and compose."""
    images = []
    for i, cls in enumerate(classes):
        if all(c == 0 for c in cls):
            log.info("letter X%d has zero class at the base point; its monomials are dropped", i + 1)
            images.append(None)
        else:
            images.append(rho.image(cls))
    out = SymbolOperator(rho.q)
    for coeff, word in PP.monomials:
        if any(images[i] is None for i in word):
            continue
        term = SymbolOperator.constant(rho.q, 1)
        for i in word:
            term = term.compose(images[i])
        out = out + term.scale(coeff)
    return out


def character_rep(g: GradedLieAlgebra, xi: Sequence) -> InducedRep:
    """The one-dimensional representation ``e_k -> i xi_k`` (valid when xi kills [g, g])."""
    xi = _exact_vector(xi)
    return InducedRep(g, xi, [_unit(g.dim, i) for i in range(g.dim)], [], 0,
                      [SymbolOperator.constant(0, I * x) for x in xi])


def parse_operator(text: str, q: int = 1) -> SymbolOperator:
    """Parse an operator such as ``"D^4 + y^4"`` or ``"-D1^2 - D2^2 + y1^2"``.

    ``y`` / ``y1..yq`` are multiplication operators, ``D`` / ``D1..Dq``
    derivatives, ``I`` the imaginary unit; products compose left to right.
    """
    names = _poly_names(q)
    dnames = ["D"] if q == 1 else [f"D{i + 1}" for i in range(q)]

    def hook(kind, val):
        if kind == "num":
            return SymbolOperator.constant(q, Fraction(val))
        if kind == "name" and val in names:
            return SymbolOperator.multiplication(MultiPoly.var(q, names.index(val)))
        if kind == "name" and val in dnames:
            return SymbolOperator.derivative(q, dnames.index(val))
        if kind == "name" and val == "I":
            return SymbolOperator.constant(q, I)
        raise ParseError(f"unexpected token {val!r} in operator")

    ops = {
        "add": lambda a, b: a + b,
        "neg": lambda a: -a,
        "mul": lambda a, b: a.compose(b),
        "pow": lambda a, k: a.power(k),
    }
    return _Parser(_tokenize(text), hook, ops).parse()


__all__ = [
    "NCPolynomial", "PrincipalPart", "SymbolOperator", "InducedRep", "RepresentationError", "UNDEFINED_ORDER",
    "parse_nc", "weighted_order", "principal_part", "letter_classes", "symbol_character",
    "induce_representation", "realize_symbol", "parse_operator", "vergne_polarization", "orbit_rank", "character_rep",
]
