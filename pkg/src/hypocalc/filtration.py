"""Weighted filtrations generated by vector fields, and their fibers at a point.

Generators ``X_i`` of weight ``v_i`` and a depth ``N`` define modules
``F^j`` spanned by the iterated brackets of weight at most ``j``. When
``N`` exceeds every generator weight the top level ``F^N`` is declared to be
all vector fields (the usual convention for a bracket-generating system
whose depth is stated explicitly); the coordinate fields are then added to
level ``N`` as extra module generators.

Fibers ``F^i_p / F^{i-1}_p`` are computed on Taylor jets of order ``K``:
the class of a word ``W`` vanishes when its ``K``-jet lies in the span of
jets of ``m V`` (``V`` of weight ``< i``, ``m`` any monomial in ``x - p``)
and of ``m W'`` (``W'`` of weight ``<= i``, ``m`` of positive degree).
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Sequence

from ._linalg import ExactSpan, NumericSpan
from .polyfield import PolyVectorField, bracket, parse_field, variable_names
from .scalars import to_exact

log = logging.getLogger(__name__)

DEFAULT_MAX_WORDS = 10_000
DEFAULT_RANK_THRESHOLD = 1e-10


class BracketBlowup(RuntimeError):
    pass


class HormanderFailure(ValueError):
    pass


class ClassProjectionError(ArithmeticError):
    """A field's class could not be expressed in a fiber basis (jet order too small?)."""


@dataclass(frozen=True)
class WeightedGenerators:
    fields: tuple
    weights: tuple
    depth: int
    full_top: bool | None = None

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))
        object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
        if not self.fields:
            raise ValueError("at least one generator is required")
        if len(self.fields) != len(self.weights):
            raise ValueError("fields and weights must have equal length")
        dims = {f.dim for f in self.fields}
        if len(dims) != 1:
            raise ValueError("generators live on different dimensions")
        if any(w < 1 for w in self.weights):
            raise ValueError("weights must be positive integers")
        if self.depth < max(self.weights):
            raise ValueError(f"depth {self.depth} is below the largest weight {max(self.weights)}")
        if self.full_top is None:
            object.__setattr__(self, "full_top", self.depth > max(self.weights))

    @property
    def dim(self) -> int:
        return self.fields[0].dim

    @classmethod
    def parse(cls, dim: int, items: Sequence[tuple[str, int]], depth: int, full_top: bool | None = None):
        return cls(tuple(parse_field(t, dim) for t, _ in items), tuple(w for _, w in items), depth, full_top)


@dataclass(frozen=True)
class BracketWord:
    """Left-nested bracket ``[X_{i1},[X_{i2},...,X_{ik}]]``, or a coordinate field of the full top level."""

    letters: tuple
    weight: int
    field: PolyVectorField = field(compare=False)
    coordinate: int | None = None

    @property
    def length(self) -> int:
        return len(self.letters) if self.coordinate is None else 10**6

    def sort_key(self):
        return (self.coordinate is not None, len(self.letters), self.letters, self.coordinate or 0)

    def label(self) -> str:
        if self.coordinate is not None:
            return "d/d" + variable_names(self.field.dim)[self.coordinate]
        inner = f"X{self.letters[-1] + 1}"
        for i in reversed(self.letters[:-1]):
            inner = f"[X{i + 1},{inner}]"
        return inner

    def to_dict(self) -> dict:
        out = {"letters": [i + 1 for i in self.letters], "weight": self.weight, "label": self.label()}
        if self.coordinate is not None:
            out["coordinate"] = self.coordinate + 1
        return out


def realize_word(gen: WeightedGenerators, letters: Sequence[int]) -> PolyVectorField:
    f = gen.fields[letters[-1]]
    for i in reversed(letters[:-1]):
        f = bracket(gen.fields[i], f)
    return f


@dataclass(frozen=True)
class Filtration:
    """Levels ``1..N``; ``levels[j-1]`` holds the words of weight ``<= j``."""

    generators: WeightedGenerators
    words: tuple
    levels: tuple
    full_top: bool

    def __len__(self):
        return len(self.levels)

    def __getitem__(self, j):
        return self.levels[j]

    def words_up_to(self, weight: int) -> list[BracketWord]:
        if weight <= 0:
            return []
        return list(self.levels[min(weight, len(self.levels)) - 1])


def _exact_coeffs(X: PolyVectorField) -> bool:
    return all(isinstance(c, Fraction) for comp in X.components for _, c in comp.items())


def _full_vector(X: PolyVectorField) -> dict:
    return {(i, e): c for i, comp in enumerate(X.components) for e, c in comp.items()}


def generate_filtration(gen: WeightedGenerators, max_words: int = DEFAULT_MAX_WORDS) -> Filtration:
    """All left-nested bracket words up to weight ``N``, pruned of exact linear dependencies."""
    N = gen.depth
    exact = all(_exact_coeffs(f) for f in gen.fields)
    span = ExactSpan(rational=True) if exact else NumericSpan(DEFAULT_RANK_THRESHOLD)
    heap: list = []
    pushed = 0

    def push(letters, fld, weight):
        nonlocal pushed
        pushed += 1
        if pushed > max_words:
            raise BracketBlowup(f"more than {max_words} bracket words below depth {N}")
        heapq.heappush(heap, (weight, len(letters), letters, fld))

    for i, (f, w) in enumerate(zip(gen.fields, gen.weights)):
        push((i,), f, w)

    kept: list[BracketWord] = []
    while heap:
        weight, _, letters, fld = heapq.heappop(heap)
        if fld.is_zero() or not span.add(_full_vector(fld)):
            continue
        kept.append(BracketWord(letters, weight, fld))
        for i, (g, v) in enumerate(zip(gen.fields, gen.weights)):
            if weight + v <= N:
                push((i,) + letters, bracket(g, fld), weight + v)

    if gen.full_top:
        for a in range(gen.dim):
            coord = PolyVectorField.coordinate(gen.dim, a)
            if span.add(_full_vector(coord)):
                kept.append(BracketWord((), N, coord, coordinate=a))

    levels = tuple(tuple(w for w in kept if w.weight <= j) for j in range(1, N + 1))
    return Filtration(gen, tuple(kept), levels, bool(gen.full_top))


# -- fibers ---------------------------------------------------------------------


def _monomials(m: int, max_degree: int, min_degree: int = 0):
    out = []
    for d in range(min_degree, max_degree + 1):
        for combo in combinations_with_replacement(range(m), d):
            e = [0] * m
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return out


def _jet_vector(shifted: PolyVectorField, mono: tuple, K: int) -> dict:
    dm = sum(mono)
    vec = {}
    for i, comp in enumerate(shifted.components):
        for e, c in comp.items():
            if sum(e) + dm <= K:
                vec[(i, tuple(a + b for a, b in zip(e, mono)))] = c
    return vec


def _is_exact_point(p) -> bool:
    return all(isinstance(to_exact(v), Fraction) for v in p)


@dataclass
class LevelFiber:
    level: int
    basis: list  # BracketWord
    span: object = field(repr=False)
    shifted: dict = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.basis)


def default_jet_order(gen: WeightedGenerators) -> int:
    """``max(N, deg + 1)`` where ``deg`` is the largest generator degree."""
    return max(gen.depth, max(f.degree for f in gen.fields) + 1)


def _level_fibers(filt: Filtration, p: Sequence, K: int, threshold: float) -> list[LevelFiber]:
    gen = filt.generators
    m = gen.dim
    exact = _is_exact_point(p) and all(_exact_coeffs(w.field) for w in filt.words)
    p = tuple(to_exact(v) for v in p) if exact else tuple(float(v) for v in p)
    shifted = {id(w): w.field.shift(p) for w in filt.words}
    monos_all = _monomials(m, K)
    monos_pos = [e for e in monos_all if sum(e) >= 1]
    fibers = []
    for i in range(1, gen.depth + 1):
        span = ExactSpan(rational=True) if exact else NumericSpan(threshold)
        for V in filt.words_up_to(i - 1):
            for mono in monos_all:
                vec = _jet_vector(shifted[id(V)], mono, K)
                if vec:
                    span.add(vec, tag="lo")
        level_words = filt.words_up_to(i)
        for W in level_words:
            for mono in monos_pos:
                vec = _jet_vector(shifted[id(W)], mono, K)
                if vec:
                    span.add(vec, tag="lo")
        basis = []
        for W in sorted(level_words, key=BracketWord.sort_key):
            vec = _jet_vector(shifted[id(W)], (0,) * m, K)
            if vec and span.add(vec, tag=("b", len(basis))):
                basis.append(W)
        fibers.append(LevelFiber(i, basis, span, shifted))
    return fibers


@dataclass(frozen=True)
class FiberReport:
    point: tuple
    dims: tuple
    basis_words: tuple
    jet_order: int
    stable: bool

    @property
    def total(self) -> int:
        return sum(self.dims)

    def to_dict(self) -> dict:
        return {
            "point": [str(v) for v in self.point],
            "dims": list(self.dims),
            "basis_words": [[w.to_dict() for w in level] for level in self.basis_words],
            "jet_order": self.jet_order,
            "stable": self.stable,
        }


def fiber_dims(gen: WeightedGenerators, p: Sequence, K: int | None = None,
               threshold: float = DEFAULT_RANK_THRESHOLD, filt: Filtration | None = None) -> FiberReport:
    if len(p) != gen.dim:
        raise ValueError("point dimension mismatch")
    K = default_jet_order(gen) if K is None else K
    if K < gen.depth:
        raise ValueError(f"jet order {K} is below the depth {gen.depth}")
    filt = filt or generate_filtration(gen)
    fibers = _level_fibers(filt, p, K, threshold)
    check = _level_fibers(filt, p, K + 1, threshold)
    dims = tuple(f.dim for f in fibers)
    stable = dims == tuple(f.dim for f in check)
    if not stable:
        log.warning("fiber dimensions at %s change between jet orders %d and %d", p, K, K + 1)
    return FiberReport(tuple(p), dims, tuple(tuple(f.basis) for f in fibers), K, stable)


@dataclass(frozen=True)
class HormanderResult:
    holds: bool
    witness: tuple
    by_convention: bool

    def __bool__(self):
        return self.holds


def check_hormander(gen: WeightedGenerators, p: Sequence, filt: Filtration | None = None,
                    threshold: float = DEFAULT_RANK_THRESHOLD) -> HormanderResult:
    """Do the words of weight ``<= N`` (coordinate fields included when the top level is full) span ``T_p``?"""
    filt = filt or generate_filtration(gen)
    exact = _is_exact_point(p)
    pt = [to_exact(v) for v in p] if exact else [float(v) for v in p]
    span = ExactSpan(rational=True) if exact else NumericSpan(threshold)
    witness = []
    for W in sorted(filt.levels[-1], key=BracketWord.sort_key):
        val = W.field.evaluate(pt)
        vec = {a: c for a, c in enumerate(val) if c != 0}
        if vec and span.add(vec):
            witness.append(W)
        if len(span) == gen.dim:
            break
    holds = len(span) == gen.dim
    by_convention = holds and any(w.coordinate is not None for w in witness)
    return HormanderResult(holds, tuple(witness), by_convention)


# -- minimal graded basis ---------------------------------------------------------


def _leading_jet_coeff(shifted: PolyVectorField):
    """First nonzero Taylor coefficient, by degree, then component, then exponent."""
    best = None
    for i, comp in enumerate(shifted.components):
        for e, c in comp.items():
            key = (sum(e), i, tuple(-a for a in e))
            if best is None or key < best[0]:
                best = (key, c)
    return best[1]


@dataclass
class GradedBasisData:
    """A minimal graded basis at ``point``: one monic field per fiber-basis class."""

    generators: WeightedGenerators
    point: tuple
    weights: list
    fields: list
    words: list
    scales: list
    jet_order: int
    stable: bool
    _fibers: list = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.fields)

    def indices_of_weight(self, w: int) -> list[int]:
        return [k for k, wk in enumerate(self.weights) if wk == w]

    def express(self, X: PolyVectorField, weight: int) -> list:
        """Coordinates of the class ``[X]_{weight,p}`` in this basis (zero outside that weight)."""
        coords = [0] * self.dim
        if weight > len(self._fibers):
            return coords
        fiber = self._fibers[weight - 1]
        shifted = X.shift(self.point)
        vec = _jet_vector(shifted, (0,) * X.dim, self.jet_order)
        combo = fiber.span.express(vec) if vec else {}
        if combo is None:
            raise ClassProjectionError(
                f"class of {X} at weight {weight} is not in the span of the fiber basis at jet order {self.jet_order}"
            )
        slots = self.indices_of_weight(weight)
        for tag, c in combo.items():
            if isinstance(tag, tuple) and tag[0] == "b":
                k = slots[tag[1]]
                coords[k] = c * self.scales[k]
        return coords

    def to_dict(self) -> dict:
        return {
            "point": [str(v) for v in self.point],
            "weights": list(self.weights),
            "fields": [str(f) for f in self.fields],
            "words": [w.to_dict() for w in self.words],
            "jet_order": self.jet_order,
            "stable": self.stable,
        }


def minimal_graded_basis(gen: WeightedGenerators, p: Sequence, K: int | None = None,
                         threshold: float = DEFAULT_RANK_THRESHOLD) -> GradedBasisData:
    filt = generate_filtration(gen)
    if not check_hormander(gen, p, filt, threshold):
        raise HormanderFailure(f"bracket words of weight <= {gen.depth} do not span the tangent space at {tuple(p)}")
    report = fiber_dims(gen, p, K, threshold, filt)
    K = report.jet_order
    fibers = _level_fibers(filt, p, K, threshold)
    weights, fields, words, scales = [], [], [], []
    for fib in fibers:
        for W in fib.basis:
            lead = _leading_jet_coeff(fib.shifted[id(W)])
            weights.append(fib.level)
            fields.append(W.field * (1 / lead if not isinstance(lead, Fraction) else Fraction(1) / lead))
            words.append(W)
            # the fiber span stores the raw word; basis coordinate = raw coordinate * lead
            scales.append(lead)
    pt = tuple(to_exact(v) for v in p) if _is_exact_point(p) else tuple(float(v) for v in p)
    return GradedBasisData(gen, pt, weights, fields, words, scales, K, report.stable, fibers)
