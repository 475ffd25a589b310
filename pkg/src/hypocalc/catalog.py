"""Generator sets for the bundled filtrations used throughout the tests, demos and bundled configs."""

from __future__ import annotations

import math

import numpy as np

from .filtration import WeightedGenerators
from .hncone import PairingMap


def heisenberg_plane() -> WeightedGenerators:
    """``d/dx`` (weight 1) and ``x d/dy`` (weight 2), depth 3."""
    return WeightedGenerators.parse(2, [("dx", 1), ("x*dy", 2)], 3)


def ladder(k: int, n: int) -> WeightedGenerators:
    """``d/dx`` (weight 1) and ``x^k d/dy`` (weight n), depth n + k."""
    return WeightedGenerators.parse(2, [("dx", 1), (f"x^{k}*dy", n)], n + k)


def cusp_line() -> WeightedGenerators:
    """Cusp line: ``x^2 d/dx`` (weight 1), ``x d/dx`` (weight 2) on the line, depth 3."""
    return WeightedGenerators.parse(1, [("x^2*dx", 1), ("x*dx", 2)], 3)


def grushin_type() -> WeightedGenerators:
    """Grushin type: the filtration of ``d_x^2 + x^2 d_y``; depth 4."""
    return WeightedGenerators.parse(2, [("dx", 1), ("x^2*dy", 2)], 4)


def sextic() -> WeightedGenerators:
    """Sextic: four degree-six multiples of ``d/dx`` at weight 1, depth 2."""
    return WeightedGenerators.parse(2, [("x^2*y^4*dx", 1), ("x^6*dx", 1), ("x^4*y^2*dx", 1), ("y^6*dx", 1)], 2)


def flat_line() -> WeightedGenerators:
    """Flat line: ``x^2 d/dx`` at weight 1, depth 2."""
    return WeightedGenerators.parse(1, [("x^2*dx", 1)], 2)


def _flat1(x):
    r = math.hypot(x[0], x[1])
    if r == 0:
        return np.zeros(2)
    return np.array([(x[0] / r + 2) * math.exp(-2 / r**2), 0.0])


def _flat2(x):
    r = math.hypot(x[0], x[1])
    if r == 0:
        return np.zeros(2)
    return np.array([math.exp(-1 / r**2), 0.0])


def flat_pairing() -> PairingMap:
    """Exponentially flat coefficients, supplied as numeric callbacks."""
    return PairingMap((_flat1, _flat2, lambda x: np.array([1.0, 0.0]), lambda x: np.array([0.0, 1.0])),
                      (1, 2, 3, 3), (0.0, 0.0), 2)


CATALOG = {
    "heisenberg": heisenberg_plane,
    "cusp": cusp_line,
    "grushin": grushin_type,
    "sextic": sextic,
    "flat_line": flat_line,
}
