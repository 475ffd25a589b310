"""Incremental span bookkeeping over sparse vectors (dicts keyed by hashable coordinates).

``ExactSpan`` does Gaussian elimination over Fractions (or Gaussian rationals);
with ``rational=True`` it works internally in ``gmpy2.mpq``, which is several
times faster than ``Fraction`` on the jet systems built by the filtration code.
``NumericSpan`` decides membership by least squares with a relative threshold.
Both remember how each stored row combines the vectors that were added, so a
reduced vector can be expressed in terms of tagged inputs.
"""

from __future__ import annotations

from fractions import Fraction

import gmpy2
import numpy as np


def _is_float_vec(vec: dict) -> bool:
    return any(isinstance(v, (float, np.floating)) for v in vec.values())


def _to_mpq(c):
    return gmpy2.mpq(c.numerator, c.denominator) if isinstance(c, Fraction) else gmpy2.mpq(c)


def _from_mpq(c):
    return Fraction(int(c.numerator), int(c.denominator))


class ExactSpan:
    def __init__(self, rational: bool = False):
        self._rows: list[tuple[object, dict, dict]] = []  # (pivot, vector, combo over tags)
        self.tags: list = []
        self.rational = rational

    def __len__(self):
        return len(self._rows)

    def _reduce(self, vec: dict) -> tuple[dict, dict]:
        if self.rational:
            v = {k: _to_mpq(c) for k, c in vec.items() if c != 0}
        else:
            v = {k: c for k, c in vec.items() if c != 0}
        combo: dict = {}
        for pivot, row, rcombo in self._rows:
            c = v.get(pivot)
            if c is None:
                continue
            f = c / row[pivot]
            for k, rv in row.items():
                nv = v.get(k, 0) - f * rv
                if nv == 0:
                    v.pop(k, None)
                else:
                    v[k] = nv
            for t, rc in rcombo.items():
                nc = combo.get(t, 0) + f * rc
                if nc == 0:
                    combo.pop(t, None)
                else:
                    combo[t] = nc
        return v, combo

    def reduce(self, vec: dict) -> tuple[dict, dict]:
        """Return (residual, combo) with ``vec = residual + sum combo[tag] * input[tag]``."""
        v, combo = self._reduce(vec)
        if self.rational:
            v = {k: _from_mpq(c) for k, c in v.items()}
            combo = {t: _from_mpq(c) for t, c in combo.items()}
        return v, combo

    def contains(self, vec: dict) -> bool:
        return not self.reduce(vec)[0]

    def add(self, vec: dict, tag=None) -> bool:
        """Insert ``vec``; returns False (and stores nothing) when it is already in the span."""
        residual, combo = self._reduce(vec)
        if not residual:
            return False
        tag = len(self.tags) if tag is None else tag
        self.tags.append(tag)
        combo = {t: -c for t, c in combo.items()}
        combo[tag] = combo.get(tag, 0) + 1
        pivot = min(residual, key=_sort_key)
        self._rows.append((pivot, residual, combo))
        return True

    def express(self, vec: dict) -> dict | None:
        residual, combo = self.reduce(vec)
        return None if residual else combo


def _sort_key(k):
    return repr(k)


class NumericSpan:
    """Float counterpart of :class:`ExactSpan` (membership by relative residual)."""

    def __init__(self, threshold: float = 1e-10):
        self.threshold = threshold
        self._vecs: list[dict] = []
        self.tags: list = []

    def __len__(self):
        return len(self._vecs)

    def _solve(self, vec: dict):
        keys = sorted({k for v in self._vecs for k in v} | set(vec), key=_sort_key)
        index = {k: i for i, k in enumerate(keys)}
        b = np.zeros(len(keys), dtype=complex)
        for k, c in vec.items():
            b[index[k]] = complex(c)
        if not self._vecs:
            return b, np.zeros(0)
        A = np.zeros((len(keys), len(self._vecs)), dtype=complex)
        for j, v in enumerate(self._vecs):
            for k, c in v.items():
                A[index[k], j] = complex(c)
        coef, *_ = np.linalg.lstsq(A, b, rcond=None)
        return b - A @ coef, coef

    def _is_small(self, residual, vec):
        scale = max(1.0, max((abs(complex(c)) for c in vec.values()), default=0.0))
        return np.linalg.norm(residual) <= self.threshold * scale

    def contains(self, vec: dict) -> bool:
        residual, _ = self._solve(vec)
        return self._is_small(residual, vec)

    def add(self, vec: dict, tag=None) -> bool:
        if self.contains(vec):
            return False
        self._vecs.append(dict(vec))
        self.tags.append(len(self.tags) if tag is None else tag)
        return True

    def express(self, vec: dict) -> dict | None:
        residual, coef = self._solve(vec)
        if not self._is_small(residual, vec):
            return None
        out = {}
        for t, c in zip(self.tags, coef):
            val = c.real if abs(c.imag) <= self.threshold else c
            if abs(val) > self.threshold:
                out[t] = float(val) if not isinstance(val, complex) else val
        return out


def make_span(exact: bool, threshold: float = 1e-10):
    return ExactSpan() if exact else NumericSpan(threshold)


def exact_rank(vectors: list[dict]) -> int:
    span = ExactSpan()
    return sum(span.add(v) for v in vectors)


def solve_exact(A: list[list], b: list) -> list | None:
    """Solve the square or overdetermined system ``A x = b`` exactly; None if inconsistent."""
    n = len(A[0]) if A else 0
    span = ExactSpan()
    cols = [{i: A[i][j] for i in range(len(A)) if A[i][j] != 0} for j in range(n)]
    for j, c in enumerate(cols):
        span.add(c, tag=j)
    combo = span.express({i: v for i, v in enumerate(b) if v != 0})
    if combo is None:
        return None
    return [combo.get(j, Fraction(0)) for j in range(n)]


def nullspace_exact(A: list[list]) -> list[list]:
    """Basis of {x : A x = 0} over the rationals."""
    if not A:
        return []
    n = len(A[0])
    span = ExactSpan()
    basis = []
    for j in range(n):
        col = {i: A[i][j] for i in range(len(A)) if A[i][j] != 0}
        residual, combo = span.reduce(col)
        if residual:
            span.add(col, tag=j)
        else:
            x = [Fraction(0)] * n
            x[j] = Fraction(1)
            for t, c in combo.items():
                x[t] -= c
            basis.append(x)
    return basis
