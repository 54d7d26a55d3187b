"""Exact Gaussian-rational scalars and helpers for mixing them with floats.

Algebra coefficients are always exact. State values are exact whenever
every moment that enters them is exact, and fall back to ``complex``
otherwise; the helpers here let both kinds flow through the same code.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Union


class QQi:
    """A complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("QQi is immutable")

    @classmethod
    def coerce(cls, x) -> "QQi":
        if isinstance(x, QQi):
            return x
        if isinstance(x, (int, Rational)):
            return cls(x)
        raise TypeError(f"cannot convert {type(x).__name__} to QQi exactly")

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (QQi, int, Rational)):
            o = QQi.coerce(other)
            return QQi(self.re + o.re, self.im + o.im)
        if isinstance(other, (float, complex)):
            return complex(self) + other
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return QQi(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (QQi, int, Rational)):
            o = QQi.coerce(other)
            return QQi(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
        if isinstance(other, (float, complex)):
            return complex(self) * other
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (QQi, int, Rational)):
            o = QQi.coerce(other)
            den = o.re * o.re + o.im * o.im
            if den == 0:
                raise ZeroDivisionError("QQi division by zero")
            num = self * o.conjugate()
            return QQi(num.re / den, num.im / den)
        if isinstance(other, (float, complex)):
            return complex(self) / other
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Rational)):
            return QQi(other) / self
        if isinstance(other, (float, complex)):
            return other / complex(self)
        return NotImplemented

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            return QQi(1) / (self ** -e)
        out, base = QQi(1), self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def conjugate(self) -> "QQi":
        return QQi(self.re, -self.im)

    def norm2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __abs__(self) -> float:
        return abs(complex(self))

    # comparisons / conversions -------------------------------------------

    def __eq__(self, other):
        if isinstance(other, QQi):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Rational)):
            return self.im == 0 and self.re == other
        if isinstance(other, (float, complex)):
            return complex(self) == other
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"QQi({self.re}, {self.im})"

    def __str__(self):
        return format_scalar(self)


Scalar = Union[QQi, complex]


def is_exact(x) -> bool:
    return isinstance(x, (QQi, int, Rational))


def exact_or_complex(x) -> Scalar:
    """Normalise ``x`` to either a QQi (if exact) or a Python complex."""
    if is_exact(x):
        return QQi.coerce(x)
    return complex(x)


def conj(x):
    if isinstance(x, (int, Rational)):
        return x
    return x.conjugate()


def within(diff, threshold) -> bool:
    """``|diff| <= threshold``, decided exactly when both sides are exact."""
    if is_exact(diff) and is_exact(threshold):
        t = Fraction(threshold)
        return QQi.coerce(diff).norm2() <= t * t
    return abs(complex(diff)) <= float(threshold)


def parse_rational(s) -> Fraction:
    """Parse ``"p/q"`` or an integer literal; floats are refused."""
    if isinstance(s, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, str):
        if any(ch in s for ch in ".eE"):
            raise ValueError(f"decimal literals are not accepted, write 'p/q': {s!r}")
        try:
            return Fraction(s.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational literal: {s!r}") from exc
    raise ValueError(f"rationals must be given as 'p/q' strings, got {s!r}")


def format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_scalar(x) -> str:
    if isinstance(x, (int, Rational)):
        return format_rational(Fraction(x))
    if isinstance(x, QQi):
        if x.im == 0:
            return format_rational(x.re)
        if x.re == 0:
            return f"{format_rational(x.im)}i"
        sign = "+" if x.im > 0 else "-"
        return f"{format_rational(x.re)}{sign}{format_rational(abs(x.im))}i"
    z = complex(x)
    if z.imag == 0:
        return repr(z.real)
    return f"{z.real!r}{'+' if z.imag >= 0 else '-'}{abs(z.imag)!r}i"


def to_json_scalar(x):
    """Exact values become ``"p/q"`` strings (or a pair of them); floats stay floats."""
    if is_exact(x):
        q = QQi.coerce(x)
        if q.im == 0:
            return format_rational(q.re)
        return [format_rational(q.re), format_rational(q.im)]
    z = complex(x)
    return [z.real, z.imag]
