"""Exact-or-float comparisons shared by every module.

Values are either exact rationals (``int`` / ``Fraction``) or floats.  Exact
inputs are compared exactly; anything involving a float uses an absolute
tolerance of ``TOL``.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Real
from typing import Union

Number = Union[int, Fraction, float]

TOL = 1e-9


def is_exact(*values: Real) -> bool:
    return all(isinstance(x, (int, Fraction)) for x in values)


def greater(a: Number, b: Number) -> bool:
    """``a > b``, with float comparisons requiring a margin of TOL."""
    if is_exact(a, b):
        return a > b
    return a > b + TOL


def geq(a: Number, b: Number) -> bool:
    if is_exact(a, b):
        return a >= b
    return a >= b - TOL


def leq(a: Number, b: Number) -> bool:
    return geq(b, a)


def close(a: Number, b: Number) -> bool:
    if is_exact(a, b):
        return a == b
    return abs(a - b) <= TOL


def to_number(raw: Union[str, int, float, Fraction]) -> Number:
    """Parse a decimal/rational string (or number) into an exact Fraction.

    Floats go through their shortest repr so ``0.1`` becomes ``1/10``.
    """
    if isinstance(raw, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(raw, Fraction):
        return raw
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, float):
        return Fraction(repr(raw))
    if isinstance(raw, str):
        return Fraction(raw.strip())
    raise TypeError(f"cannot interpret {raw!r} as a number")


def format_number(x: Number) -> str:
    """Render a value the way the market files store them."""
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        # terminating decimals stay decimal, everything else as p/q
        d = x.denominator
        for p in (2, 5):
            while d % p == 0:
                d //= p
        if d == 1:
            digits = 0
            while (x * 10**digits).denominator != 1:
                digits += 1
            scaled = x * 10**digits
            sign = "-" if scaled < 0 else ""
            s = str(abs(scaled.numerator)).rjust(digits + 1, "0")
            return f"{sign}{s[:-digits]}.{s[-digits:]}"
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return str(x)
    return repr(float(x))
