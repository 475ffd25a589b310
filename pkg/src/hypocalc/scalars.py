"""Exact scalar helpers: rational coercion and Gaussian rationals."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational


def to_exact(value):
    """Coerce ints/Fractions/decimal strings to Fraction, leave floats alone."""
    if isinstance(value, bool):
        return Fraction(int(value))
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, str):
        return Fraction(value)
    return value


def is_exact(value) -> bool:
    return isinstance(value, (int, Fraction, Gaussian)) and not isinstance(value, bool)


class Gaussian:
    """Exact complex number ``re + i*im`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = to_exact(re)
        self.im = to_exact(im)

    @staticmethod
    def _coerce(other):
        if isinstance(other, Gaussian):
            return other
        if isinstance(other, complex):
            return Gaussian(other.real, other.imag)
        return Gaussian(other, 0)

    def __add__(self, other):
        o = self._coerce(other)
        return Gaussian(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return Gaussian(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return Gaussian(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        den = o.re * o.re + o.im * o.im
        return Gaussian((self.re * o.re + self.im * o.im) / den, (self.im * o.re - self.re * o.im) / den)

    def __neg__(self):
        return Gaussian(-self.re, -self.im)

    def __pow__(self, k: int):
        out = Gaussian(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def conjugate(self):
        return Gaussian(self.re, -self.im)

    def __repr__(self):
        return f"Gaussian({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            if abs(self.im) == 1:
                return "I" if self.im > 0 else "-I"
            return f"{self.im}*I"
        sign = "+" if self.im >= 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}*I)"


I = Gaussian(0, 1)


def i_power(k: int) -> Gaussian:
    return [Gaussian(1), Gaussian(0, 1), Gaussian(-1), Gaussian(0, -1)][k % 4]
