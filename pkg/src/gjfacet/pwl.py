"""Continuous piecewise-linear functions on [0, 1] with period-1 extension.

A function is stored by its values at the breakpoints; slopes are derived,
so continuity holds by construction. Everything is exact.
"""
from __future__ import annotations

import enum
import json
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .errors import InvalidFunctionError
from .rational import as_rational, format_rational, mod1, parse_rational


class Sign(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class SegmentTag:
    """Slope sign of a piece and the construction step that created it."""

    sign: Sign
    index: int

    def to_dict(self) -> dict:
        return {"sign": self.sign.value, "index": self.index}

    @classmethod
    def from_dict(cls, d: dict) -> "SegmentTag":
        try:
            sign = Sign(d["sign"])
            index = d["index"]
        except (KeyError, ValueError, TypeError) as exc:
            raise InvalidFunctionError(f"bad tag {d!r}: {exc}") from None
        if not isinstance(index, int) or isinstance(index, bool) or index < 0:
            raise InvalidFunctionError(f"bad tag index {index!r}")
        return cls(sign, index)


@dataclass(frozen=True)
class PwlFunction:
    breakpoints: tuple
    values: tuple
    tags: tuple | None = None

    def __post_init__(self):
        bps = tuple(as_rational(b) for b in self.breakpoints)
        vals = tuple(as_rational(v) for v in self.values)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)
        if len(bps) < 2:
            raise InvalidFunctionError("need at least two breakpoints")
        if len(vals) != len(bps):
            raise InvalidFunctionError(f"{len(bps)} breakpoints but {len(vals)} values")
        if bps[0] != 0 or bps[-1] != 1:
            raise InvalidFunctionError("breakpoints must start at 0 and end at 1")
        for k in range(1, len(bps)):
            if bps[k] <= bps[k - 1]:
                raise InvalidFunctionError(
                    f"breakpoints not strictly increasing at index {k}: "
                    f"{format_rational(bps[k - 1])} >= {format_rational(bps[k])}"
                )
        if vals[0] != vals[-1]:
            raise InvalidFunctionError("values at 0 and 1 must agree (periodic continuity)")
        if self.tags is not None:
            tags = tuple(self.tags)
            if len(tags) != len(bps) - 1:
                raise InvalidFunctionError(f"{len(bps) - 1} pieces but {len(tags)} tags")
            object.__setattr__(self, "tags", tags)

    def __call__(self, x) -> Fraction:
        return evaluate(self, x)

    @property
    def n_pieces(self) -> int:
        return len(self.breakpoints) - 1

    def pieces(self) -> Iterator[tuple[Fraction, Fraction, Fraction, Fraction]]:
        """Yield ``(a, b, f(a), f(b))`` for each piece."""
        bps, vals = self.breakpoints, self.values
        for k in range(1, len(bps)):
            yield bps[k - 1], bps[k], vals[k - 1], vals[k]

    def with_tags(self, tags) -> "PwlFunction":
        return PwlFunction(self.breakpoints, self.values, tags)

    def without_tags(self) -> "PwlFunction":
        return PwlFunction(self.breakpoints, self.values)


def evaluate(f: PwlFunction, x) -> Fraction:
    x = mod1(as_rational(x))
    bps = f.breakpoints
    k = bisect_right(bps, x) - 1
    if bps[k] == x:
        return f.values[k]
    a, b = bps[k], bps[k + 1]
    fa, fb = f.values[k], f.values[k + 1]
    return fa + (fb - fa) * (x - a) / (b - a)


def zero_function() -> PwlFunction:
    return PwlFunction((0, 1), (0, 0))


def slopes(f: PwlFunction) -> list[tuple[tuple[Fraction, Fraction], Fraction]]:
    """One ``((a, b), slope)`` entry per piece, adjacent equal slopes not merged."""
    return [((a, b), (fb - fa) / (b - a)) for a, b, fa, fb in f.pieces()]


def distinct_slopes(f: PwlFunction) -> list[Fraction]:
    return sorted({s for _, s in slopes(f)})


def normalize(f: PwlFunction) -> PwlFunction:
    """Merge adjacent pieces of equal slope (the left piece's tag is kept)."""
    bps, vals = f.breakpoints, f.values
    sl = [s for _, s in slopes(f)]
    keep = [0]
    tags = [f.tags[0]] if f.tags is not None else None
    for k in range(1, len(bps) - 1):
        if sl[k] != sl[k - 1]:
            keep.append(k)
            if tags is not None:
                tags.append(f.tags[k])
    keep.append(len(bps) - 1)
    return PwlFunction(
        tuple(bps[k] for k in keep),
        tuple(vals[k] for k in keep),
        tuple(tags) if tags is not None else None,
    )


def add(f: PwlFunction, g: PwlFunction) -> PwlFunction:
    grid = sorted(set(f.breakpoints) | set(g.breakpoints))
    return PwlFunction(grid, [evaluate(f, x) + evaluate(g, x) for x in grid])


def sup_diff_at_breakpoints(f: PwlFunction, g: PwlFunction) -> Fraction:
    """Exact sup norm of f - g over [0, 1]; attained on the merged grid."""
    grid = set(f.breakpoints) | set(g.breakpoints)
    return max(abs(evaluate(f, x) - evaluate(g, x)) for x in grid)


@dataclass(frozen=True)
class ScaledFunction:
    """``x -> factor * f(rate * x)``, with f periodic; period is 1/|rate|."""

    base: PwlFunction
    factor: Fraction
    rate: Fraction

    def __call__(self, x) -> Fraction:
        return self.factor * evaluate(self.base, self.rate * as_rational(x))

    @property
    def period(self) -> Fraction:
        return 1 / abs(self.rate)

    def kinks_in(self, lo, hi) -> list[Fraction]:
        """Sorted points of [lo, hi] where the scaled function may change slope,
        together with the endpoints lo and hi."""
        lo, hi = as_rational(lo), as_rational(hi)
        if hi < lo:
            raise ValueError("empty interval")
        # rate*x ranges over [tlo, thi]
        tlo, thi = sorted((self.rate * lo, self.rate * hi))
        out = {lo, hi}
        first = tlo.numerator // tlo.denominator
        last = thi.numerator // thi.denominator
        for k in range(first, last + 1):
            for b in self.base.breakpoints:
                t = b + k
                if tlo <= t <= thi:
                    out.add(t / self.rate)
        return sorted(out)

    def restrict(self, lo, hi) -> list[tuple[Fraction, Fraction]]:
        """Exact ``(x, h(x))`` samples at every kink of [lo, hi]."""
        return [(x, self(x)) for x in self.kinks_in(lo, hi)]


def scale(f, a, b) -> ScaledFunction:
    """Return the handle ``x -> a * f(b * x)``; nested handles compose."""
    a, b = as_rational(a), as_rational(b)
    if a <= 0:
        raise ValueError("scale factor a must be positive")
    if b == 0:
        raise ValueError("rate b must be nonzero")
    if isinstance(f, ScaledFunction):
        return ScaledFunction(f.base, f.factor * a, f.rate * b)
    return ScaledFunction(f, a, b)


# --- serialization -------------------------------------------------------

def function_to_dict(f: PwlFunction) -> dict:
    d = {
        "breakpoints": [format_rational(b) for b in f.breakpoints],
        "values": [format_rational(v) for v in f.values],
    }
    if f.tags is not None:
        d["tags"] = [t.to_dict() for t in f.tags]
    return d


def function_from_dict(d: dict) -> PwlFunction:
    if not isinstance(d, dict):
        raise InvalidFunctionError("function JSON must be an object")
    for key in ("breakpoints", "values"):
        if not isinstance(d.get(key), list):
            raise InvalidFunctionError(f"missing or non-list field {key!r}")
    bps = [_strict(s, "breakpoints", i) for i, s in enumerate(d["breakpoints"])]
    vals = [_strict(s, "values", i) for i, s in enumerate(d["values"])]
    tags = None
    if "tags" in d:
        if not isinstance(d["tags"], list):
            raise InvalidFunctionError("field 'tags' must be a list")
        tags = tuple(SegmentTag.from_dict(t) for t in d["tags"])
    return PwlFunction(bps, vals, tags)


def _strict(s, field: str, i: int) -> Fraction:
    try:
        return parse_rational(s, strict=True)
    except Exception as exc:
        raise InvalidFunctionError(f"{field}[{i}]: {exc}") from None


def dumps_function(f: PwlFunction) -> str:
    return json.dumps(function_to_dict(f), indent=1) + "\n"


def loads_function(text: str) -> PwlFunction:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidFunctionError(f"invalid JSON: {exc}") from None
    return function_from_dict(d)


def piece_index(f: PwlFunction, x: Fraction) -> int:
    """Index of the piece [b_k, b_{k+1}) containing x mod 1."""
    x = mod1(as_rational(x))
    return bisect_right(f.breakpoints, x) - 1

