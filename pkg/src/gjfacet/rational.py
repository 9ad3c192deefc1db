"""Exact rational scalars and their canonical string form.

All scalars are :class:`fractions.Fraction`; this module only adds the
conversion rules used at the library and file boundaries. Floats are
refused everywhere so that no rounding can slip into core computations.
"""
from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational

from .errors import RationalFormatError

__all__ = ["Fraction", "as_rational", "parse_rational", "format_rational", "mod1"]

_CANONICAL = re.compile(r"-?(0|[1-9][0-9]*)(/[1-9][0-9]*)?")
_LENIENT = re.compile(r"\s*([+-]?[0-9]+)(?:\s*/\s*([+-]?[0-9]+))?\s*")


def as_rational(x) -> Fraction:
    """Coerce ints, Fractions and rational strings; refuse floats."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x, strict=False)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def parse_rational(text: str, strict: bool = True) -> Fraction:
    """Parse ``"p/q"`` or ``"p"``.

    With ``strict=True`` only the canonical form produced by
    :func:`format_rational` is accepted (lowest terms, positive
    denominator, no ``/1``, no ``-0``, no whitespace).
    """
    if not isinstance(text, str):
        raise RationalFormatError(f"expected a string rational, got {text!r}")
    if strict:
        if not _CANONICAL.fullmatch(text) or text == "-0":
            raise RationalFormatError(f"non-canonical rational {text!r}")
        value = Fraction(text)
        if format_rational(value) != text:
            raise RationalFormatError(f"non-canonical rational {text!r} (expected {format_rational(value)!r})")
        return value
    m = _LENIENT.fullmatch(text)
    if not m:
        raise RationalFormatError(f"invalid rational {text!r}; use p/q or an integer")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise RationalFormatError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def format_rational(q) -> str:
    q = as_rational(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def mod1(x: Fraction) -> Fraction:
    """Representative of x in [0, 1)."""
    return x - (x.numerator // x.denominator)
