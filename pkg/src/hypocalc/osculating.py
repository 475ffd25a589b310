"""Graded nilpotent Lie algebras: osculating algebras, free nilpotent algebras, BCH group law.

Group law convention
--------------------
``bch(g, X, Y)`` (``convention="right"``, the default) is the product of the group attached to vector-field
brackets ``[X, Y] = X.grad(Y) - Y.grad(X)``: it equals
``X + Y - 1/2 [X,Y] + 1/12 [X,[X,Y]] + 1/12 [Y,[Y,X]] + ...``, which is the
textbook ``log(e^Y e^X)``. Passing ``convention="standard"`` gives the
textbook ``log(e^X e^Y)`` instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .filtration import GradedBasisData, WeightedGenerators, minimal_graded_basis
from .polyfield import bracket
from .scalars import to_exact

__all__ = [
    "GradedLieAlgebra",
    "AlgebraElement",
    "DualElement",
    "FreeAlgebraTooLarge",
    "osculating_at",
    "osculating_with_basis",
    "free_nilpotent",
    "bch",
    "bch_coefficients",
    "dilate",
    "dilate_dual",
    "ad_matrix",
    "Ad_matrix",
    "coadjoint",
    "lyndon_words",
    "free_basis_words",
    "standard_factorization",
]

DEFAULT_FREE_DIM_CAP = 500


class FreeAlgebraTooLarge(ValueError):
    pass


def _coords(x) -> list:
    return list(x.coords) if hasattr(x, "coords") else list(x)


@dataclass(frozen=True)
class GradedLieAlgebra:
    dim: int
    weights: tuple
    depth: int
    sc: dict = field(compare=False)  # (i, j) with i < j  ->  {k: c}
    labels: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(self.weights))
        if len(self.weights) != self.dim:
            raise ValueError("one weight per basis vector is required")
        clean = {}
        for (i, j), row in self.sc.items():
            row = {k: c for k, c in row.items() if c != 0}
            if not row:
                continue
            if i == j:
                raise ValueError("[e_i, e_i] must vanish")
            if i > j:
                i, j, row = j, i, {k: -c for k, c in row.items()}
            for k in row:
                if self.weights[k] != self.weights[i] + self.weights[j]:
                    raise ValueError(f"bracket [e{i + 1},e{j + 1}] has a component on e{k + 1} of the wrong weight")
            clean[(i, j)] = row
        object.__setattr__(self, "sc", clean)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"e{i + 1}" for i in range(self.dim)))

    @classmethod
    def from_triplets(cls, weights, depth, triplets, labels=()):
        sc: dict = {}
        for i, j, k, c in triplets:
            if i > j:
                i, j, c = j, i, -c
            sc.setdefault((i, j), {})[k] = sc.get((i, j), {}).get(k, 0) + to_exact(c)
        return cls(len(weights), weights, depth, sc, tuple(labels))

    def c(self, i: int, j: int, k: int):
        if i < j:
            return self.sc.get((i, j), {}).get(k, 0)
        if i > j:
            return -self.sc.get((j, i), {}).get(k, 0)
        return 0

    def structure_tensor(self) -> list:
        return [[[self.c(i, j, k) for k in range(self.dim)] for j in range(self.dim)] for i in range(self.dim)]

    def bracket(self, u, v) -> list:
        u, v = _coords(u), _coords(v)
        out = [0] * self.dim
        for (i, j), row in self.sc.items():
            a = u[i] * v[j] - u[j] * v[i]
            if a != 0:
                for k, c in row.items():
                    out[k] += a * c
        return out

    def is_abelian(self) -> bool:
        return not self.sc

    def center(self) -> list[int]:
        """Indices of basis vectors bracketing trivially with everything (basis-level test)."""
        involved = {i for pair in self.sc for i in pair}
        return [i for i in range(self.dim) if i not in involved]

    def jacobi_defect(self) -> list:
        """Nonzero Jacobiator values ``(i, j, k, vector)``; empty when Jacobi holds."""
        bad = []
        basis = [[1 if a == b else 0 for a in range(self.dim)] for b in range(self.dim)]
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                for k in range(j + 1, self.dim):
                    ei, ej, ek = basis[i], basis[j], basis[k]
                    s = [a + b + c for a, b, c in zip(self.bracket(ei, self.bracket(ej, ek)),
                                                       self.bracket(ej, self.bracket(ek, ei)),
                                                       self.bracket(ek, self.bracket(ei, ej)))]
                    if any(x != 0 for x in s):
                        bad.append((i, j, k, s))
        return bad

    def classify(self) -> str:
        if self.is_abelian():
            return "abelian"
        if self.dim == 3 and len(self.sc) == 1:
            (pair, row), = self.sc.items()
            if len(row) == 1 and next(iter(row)) not in pair:
                return "heisenberg"
        return "nilpotent"

    def element(self, coords) -> "AlgebraElement":
        return AlgebraElement(self, tuple(coords))

    def dual(self, coords) -> "DualElement":
        return DualElement(self, tuple(coords))

    def to_dict(self) -> dict:
        triplets = sorted((i + 1, j + 1, k + 1, str(c)) for (i, j), row in self.sc.items() for k, c in row.items())
        return {"dim": self.dim, "weights": list(self.weights), "depth": self.depth,
                "sc": [list(t) for t in triplets], "labels": list(self.labels)}

    @classmethod
    def from_dict(cls, d: dict) -> "GradedLieAlgebra":
        trip = [(i - 1, j - 1, k - 1, Fraction(c)) for i, j, k, c in d["sc"]]
        return cls.from_triplets(d["weights"], d["depth"], trip, d.get("labels", ()))


@dataclass(frozen=True)
class AlgebraElement:
    algebra: GradedLieAlgebra = field(repr=False)
    coords: tuple

    def __post_init__(self):
        if len(self.coords) != self.algebra.dim:
            raise ValueError("coordinate count does not match the algebra dimension")


@dataclass(frozen=True)
class DualElement:
    algebra: GradedLieAlgebra = field(repr=False)
    coords: tuple

    def __post_init__(self):
        if len(self.coords) != self.algebra.dim:
            raise ValueError("coordinate count does not match the algebra dimension")

    def pair(self, X) -> object:
        return sum(a * b for a, b in zip(self.coords, _coords(X)))


def _wrap_like(template, g, coords):
    if isinstance(template, AlgebraElement):
        return AlgebraElement(g, tuple(coords))
    if isinstance(template, DualElement):
        return DualElement(g, tuple(coords))
    return list(coords)


# -- osculating algebra --------------------------------------------------------------


def osculating_with_basis(gen: WeightedGenerators, p: Sequence, K: int | None = None) -> tuple[GradedLieAlgebra, GradedBasisData]:
    basis = minimal_graded_basis(gen, p, K)
    N = gen.depth
    sc = {}
    for i in range(basis.dim):
        for j in range(i + 1, basis.dim):
            w = basis.weights[i] + basis.weights[j]
            if w > N or not basis.indices_of_weight(w):
                # the class of [B_i, B_j] must still vanish when that fiber is zero
                if w <= N:
                    basis.express(bracket(basis.fields[i], basis.fields[j]), w)
                continue
            coords = basis.express(bracket(basis.fields[i], basis.fields[j]), w)
            row = {k: c for k, c in enumerate(coords) if c != 0}
            if row:
                sc[(i, j)] = row
    labels = tuple(f"[{f}]_{w}" for f, w in zip(basis.fields, basis.weights))
    return GradedLieAlgebra(basis.dim, tuple(basis.weights), N, sc, labels), basis


def osculating_at(gen: WeightedGenerators, p: Sequence, K: int | None = None) -> GradedLieAlgebra:
    return osculating_with_basis(gen, p, K)[0]


# -- free nilpotent algebras -----------------------------------------------------------


def lyndon_words(k: int, max_len: int):
    """Duval's algorithm: Lyndon words over ``range(k)`` of length <= max_len, in lexicographic order."""
    if k <= 0 or max_len <= 0:
        return
    w = [-1]
    while w:
        w[-1] += 1
        yield tuple(w)
        m = len(w)
        while len(w) < max_len:
            w.append(w[len(w) - m])
        while w and w[-1] == k - 1:
            w.pop()


def _standard_factorization(w: tuple, lyndon: set) -> tuple[tuple, tuple]:
    for i in range(1, len(w)):
        if w[i:] in lyndon:
            return w[:i], w[i:]
    raise AssertionError(f"{w} has no Lyndon suffix")


def _nc_bracket(a: dict, b: dict) -> dict:
    out: dict = {}
    for u, cu in a.items():
        for v, cv in b.items():
            out[u + v] = out.get(u + v, 0) + cu * cv
            out[v + u] = out.get(v + u, 0) - cu * cv
    return {w: c for w, c in out.items() if c != 0}


def free_basis_words(generator_weights: Sequence[int], depth: int, cap: int = DEFAULT_FREE_DIM_CAP):
    """Lyndon words of weight <= depth in basis order, plus the Lyndon set; letters index generators."""
    wts = [int(w) for w in generator_weights]
    if not wts or any(w < 1 for w in wts):
        raise ValueError("generator weights must be positive")

    def weight(word):
        return sum(wts[a] for a in word)

    words = [w for w in lyndon_words(len(wts), depth // min(wts)) if weight(w) <= depth]
    if len(words) > cap:
        raise FreeAlgebraTooLarge(f"free nilpotent algebra has dimension {len(words)} > cap {cap}")
    words.sort(key=lambda w: (weight(w), len(w), w))
    return words, set(words)


def standard_factorization(w: tuple, lyndon: set) -> tuple[tuple, tuple]:
    return _standard_factorization(w, lyndon)


def free_nilpotent(generator_weights: Sequence[int], depth: int, cap: int = DEFAULT_FREE_DIM_CAP) -> GradedLieAlgebra:
    """Free nilpotent Lie algebra of weighted step ``depth``, in the Lyndon (Hall) basis."""
    wts = [int(w) for w in generator_weights]
    words, lyndon = free_basis_words(wts, depth, cap)

    def weight(word):
        return sum(wts[a] for a in word)

    index = {w: i for i, w in enumerate(words)}
    poly: dict = {}
    for w in sorted(words, key=len):
        if len(w) == 1:
            poly[w] = {w: Fraction(1)}
        else:
            u, v = _standard_factorization(w, lyndon)
            poly[w] = _nc_bracket(poly[u], poly[v])

    sc = {}
    for a in range(len(words)):
        for b in range(a + 1, len(words)):
            wa, wb = words[a], words[b]
            if weight(wa) + weight(wb) > depth:
                continue
            target = _nc_bracket(poly[wa], poly[wb])
            row = {}
            while target:
                lead = min(target)
                if lead not in index:
                    raise AssertionError(f"leading word {lead} is not Lyndon")
                c = target[lead]
                row[index[lead]] = c
                for word, pc in poly[lead].items():
                    nv = target.get(word, 0) - c * pc
                    if nv == 0:
                        target.pop(word, None)
                    else:
                        target[word] = nv
            if row:
                sc[(a, b)] = row

    def label(w):
        if len(w) == 1:
            return f"X{w[0] + 1}"
        u, v = _standard_factorization(w, lyndon)
        return f"[{label(u)},{label(v)}]"

    return GradedLieAlgebra(len(words), tuple(weight(w) for w in words), depth, sc, tuple(label(w) for w in words))


# -- BCH ---------------------------------------------------------------------------------


def _nc_mul(a: dict, b: dict, max_len: int) -> dict:
    out: dict = {}
    for u, cu in a.items():
        for v, cv in b.items():
            if len(u) + len(v) <= max_len:
                out[u + v] = out.get(u + v, 0) + cu * cv
    return {w: c for w, c in out.items() if c != 0}


@lru_cache(maxsize=None)
def bch_coefficients(max_len: int) -> tuple:
    """``((word, c), ...)`` with ``log(e^A e^B) = sum c * [w_1,[w_2,...,w_L]]`` (letters 0=A, 1=B).

    Coefficients of the associative logarithm divided by word length (Dynkin's theorem).
    """
    one = {(): Fraction(1)}
    expA = {tuple([0] * n): Fraction(1, math.factorial(n)) for n in range(max_len + 1)}
    expB = {tuple([1] * n): Fraction(1, math.factorial(n)) for n in range(max_len + 1)}
    Z = _nc_mul(expA, expB, max_len)
    Z.pop((), None)
    log: dict = {}
    power = dict(one)
    for n in range(1, max_len + 1):
        power = _nc_mul(power, Z, max_len)
        sign = Fraction((-1) ** (n - 1), n)
        for w, c in power.items():
            log[w] = log.get(w, 0) + sign * c
    out = []
    for w in sorted(log, key=lambda w: (len(w), w)):
        c = log[w]
        if c != 0 and (len(w) == 1 or w[-1] != w[-2]):
            out.append((w, c / len(w)))
    return tuple(out)


def _nested(g: GradedLieAlgebra, letters: Sequence[list], word: tuple) -> list:
    v = letters[word[-1]]
    for a in reversed(word[:-1]):
        v = g.bracket(letters[a], v)
        if all(x == 0 for x in v):
            break
    return v


def bch(g: GradedLieAlgebra, X, Y, convention: str = "right"):
    """Group product of ``X`` and ``Y`` (see module docstring for the convention)."""
    x, y = _coords(X), _coords(Y)
    if convention == "right":
        A, B = y, x
    elif convention == "standard":
        A, B = x, y
    else:
        raise ValueError(f"unknown BCH convention {convention!r}")
    step = max(g.depth, max(g.weights, default=1))
    out = [a + b for a, b in zip(x, y)]
    for word, c in bch_coefficients(step):
        if len(word) == 1:
            continue
        v = _nested(g, (A, B), word)
        for k, vk in enumerate(v):
            if vk != 0:
                out[k] += c * vk
    return _wrap_like(X, g, out)


# -- dilations and adjoint actions --------------------------------------------------------


def dilate(g: GradedLieAlgebra, lam, X):
    lam = to_exact(lam)
    return _wrap_like(X, g, [c * lam**w for c, w in zip(_coords(X), g.weights)])


def dilate_dual(g: GradedLieAlgebra, lam, xi):
    lam = to_exact(lam)
    return _wrap_like(xi, g, [c * lam**w for c, w in zip(_coords(xi), g.weights)])


def ad_matrix(g: GradedLieAlgebra, a) -> list[list]:
    """``M[k][j]`` = coefficient of ``e_k`` in ``[a, e_j]``."""
    a = _coords(a)
    M = [[0] * g.dim for _ in range(g.dim)]
    for (i, j), row in g.sc.items():
        for k, c in row.items():
            M[k][j] += a[i] * c
            M[k][i] -= a[j] * c
    return M


def _matmul(A, B):
    n, m, p = len(A), len(B), len(B[0]) if B else 0
    return [[sum(A[i][k] * B[k][j] for k in range(m) if A[i][k] != 0) for j in range(p)] for i in range(n)]


def Ad_matrix(g: GradedLieAlgebra, a) -> list[list]:
    """``exp(ad a)``; the series stops because ``ad a`` is nilpotent."""
    n = g.dim
    ad = ad_matrix(g, a)
    result = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    term = [row[:] for row in result]
    for m in range(1, n + 1):
        term = _matmul(ad, term)
        if all(x == 0 for row in term for x in row):
            break
        f = Fraction(1, math.factorial(m))
        result = [[r + t * f for r, t in zip(rr, tr)] for rr, tr in zip(result, term)]
    return result


def coadjoint(g: GradedLieAlgebra, a, xi):
    """``Ad*(exp a) xi = xi o Ad(exp(-a))``."""
    minus = [-c for c in _coords(a)]
    E = Ad_matrix(g, minus)
    x = _coords(xi)
    return _wrap_like(xi, g, [sum(x[k] * E[k][j] for k in range(g.dim)) for j in range(g.dim)])
