"""Scalar-type plumbing and compensated summation.

Kernels in :mod:`ietlab.iet` and :mod:`ietlab.rauzy` only use ``+``, ``-``,
comparisons and ``bisect``, so they run unchanged on ``float``,
:class:`fractions.Fraction` (exact) and ``mpmath.mpf``.  The ``"dd"``
precision mode maps to mpf at 106 bits, the mantissa width of a
double-double.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from decimal import Decimal
from fractions import Fraction

import mpmath
import numpy as np

DD_BITS = 106
PRECISIONS = ("double", "dd", "exact")


def to_scalar(value, precision="double"):
    """Convert a number or decimal string to the scalar type of ``precision``."""
    if precision == "double":
        return float(value)
    if precision == "exact":
        if isinstance(value, str):
            return Fraction(Decimal(value))
        return Fraction(value)
    if precision == "dd":
        if isinstance(value, Fraction):
            return mpmath.mpf(value.numerator) / value.denominator
        return mpmath.mpf(value)
    raise ValueError(f"unknown precision {precision!r}")


def to_fraction(x) -> Fraction:
    """Exact rational value of a float, Fraction, int or mpf."""
    if isinstance(x, mpmath.mpf):
        man, exp = mpmath.mpf(x).man_exp
        return Fraction(int(man)) * Fraction(2) ** int(exp)
    return Fraction(x)


@contextmanager
def working_precision(precision):
    """Set mpmath's working precision for the duration of a computation."""
    if precision == "dd":
        with mpmath.workprec(DD_BITS):
            yield
    else:
        yield


def unit_roundoff(x) -> float:
    """Relative rounding unit of the scalar type of ``x`` (0 for exact types)."""
    if isinstance(x, float):
        return 2.0 ** -53
    if isinstance(x, mpmath.mpf):
        return 2.0 ** -mpmath.mp.prec
    return 0.0


def default_eps(total, rel: float = 1e-12):
    """Matching tolerance for points of an interval of length ``total``.

    ``rel`` applies to doubles; other inexact types scale it by their own
    rounding unit, and exact types get 0.
    """
    u = unit_roundoff(total)
    if u == 0.0:
        return 0
    return type(total)(rel * u / 2.0 ** -53) * total


def log(x):
    if isinstance(x, mpmath.mpf):
        return mpmath.log(x)
    return math.log(x)


def frac(x):
    """Fractional part ``x - floor(x)`` for any supported scalar."""
    if isinstance(x, mpmath.mpf):
        return x - mpmath.floor(x)
    return x - math.floor(x)


def decimal_string(x):
    """Shortest decimal string that parses back to ``x`` exactly (floats)."""
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        return repr(float(x)) if Fraction(float(x)) == x else f"{x.numerator}/{x.denominator}"
    if isinstance(x, mpmath.mpf):
        return mpmath.nstr(x, 34, strip_zeros=False)
    return repr(float(x))


def parse_decimal(s, precision="double"):
    """Parse a decimal (or ``p/q``) string into the requested scalar type."""
    if isinstance(s, str) and "/" in s:
        return to_scalar(Fraction(s), precision)
    return to_scalar(s, precision)


class Neumaier:
    """Running compensated sum (Neumaier's variant of Kahan summation)."""

    __slots__ = ("s", "c")

    def __init__(self, start=0.0):
        self.s = float(start)
        self.c = 0.0

    def add(self, x):
        s = self.s
        t = s + x
        if abs(s) >= abs(x):
            self.c += (s - t) + x
        else:
            self.c += (x - t) + s
        self.s = t

    @property
    def value(self):
        return self.s + self.c


def compensated_cumsum(values):
    """Prefix sums ``out[n] = sum(values[:n])`` with Neumaier compensation.

    ``out`` has ``len(values) + 1`` entries, ``out[0] == 0``.
    """
    values = np.asarray(values, dtype=float)
    out = np.empty(values.size + 1)
    out[0] = 0.0
    acc = Neumaier()
    for i, v in enumerate(values.tolist(), start=1):
        acc.add(v)
        out[i] = acc.value
    return out


def fsum(values):
    return math.fsum(values)
