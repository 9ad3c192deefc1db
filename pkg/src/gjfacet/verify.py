"""Exact decision procedures for the minimality and two-slope facet criteria.

Subadditivity is decided on the vertices of the two-dimensional complex
cut out by the lines x = b_i, y = b_j and x + y = b_k (mod 1). The
function delta(x, y) = f(x) + f(y) - f(x + y) is affine on each cell of
that complex, so its minimum over the torus sits at a vertex.

The scan runs on an integer grid: breakpoints are multiplied by the lcm
of their denominators and values by the lcm of theirs, so every vertex
coordinate is an integer and delta * (piece length) * (value scale) is an
integer too. The exact minimum is recovered as a Fraction at the end.
"""
from __future__ import annotations

import enum
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .pwl import PwlFunction, distinct_slopes, evaluate, normalize
from .rational import as_rational, format_rational, mod1

DEFAULT_WITNESS_CAP = 64
_INT64_SAFE = 1 << 60
_CHUNK_ELEMENTS = 1 << 19


class Property(enum.Enum):
    SUBADDITIVE = "subadditive"
    SYMMETRIC = "symmetric"
    MINIMAL = "minimal"
    TWO_SLOPE_FACET = "two-slope-facet"
    VALID = "valid"
    STRUCTURE = "structure"
    RECURSIVE_DECOMPOSITION = "recursive-decomposition"
    NON_PWL_EVIDENCE = "non-pwl-evidence"
    FACET_EVIDENCE = "facet-evidence"


class WitnessKind(enum.Enum):
    SUBADDITIVITY_PAIR = "subadditivity-pair"
    SYMMETRY_POINT = "symmetry-point"
    SLOPE_COUNT = "slope-count"
    POINT_VALUE = "point-value"
    SEGMENT = "segment"
    QUANTITY = "quantity"


@dataclass(frozen=True)
class Witness:
    """``lhs`` and ``rhs`` are the two sides of the tight or violated relation."""

    kind: WitnessKind
    data: tuple
    lhs: object
    rhs: object
    label: str = ""

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind.value,
            "data": _jsonable(list(self.data)),
            "lhs": _jsonable(self.lhs),
            "rhs": _jsonable(self.rhs),
        }
        if self.label:
            d["label"] = self.label
        return d


@dataclass
class VerificationReport:
    property: Property
    holds: bool
    witnesses: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    witness_count: int | None = None
    children: list = field(default_factory=list)

    def __post_init__(self):
        if self.witness_count is None:
            self.witness_count = len(self.witnesses)

    def __bool__(self):
        return self.holds

    def child(self, prop: Property) -> "VerificationReport":
        for c in self.children:
            if c.property is prop:
                return c
        raise KeyError(prop)

    def to_dict(self) -> dict:
        d = {
            "property": self.property.value,
            "holds": self.holds,
            "summary": {k: _jsonable(v) for k, v in self.summary.items()},
            "witness_count": self.witness_count,
            "witnesses": [w.to_dict() for w in self.witnesses],
        }
        if self.children:
            d["children"] = [c.to_dict() for c in self.children]
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"


def _jsonable(v):
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, (int, Fraction)):
        return format_rational(v) if isinstance(v, Fraction) else v
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, enum.Enum):
        return v.value
    raise TypeError(f"cannot serialize {type(v).__name__}")


def delta(f: PwlFunction, x, y) -> Fraction:
    """f(x) + f(y) - f((x + y) mod 1)."""
    x, y = as_rational(x), as_rational(y)
    return evaluate(f, x) + evaluate(f, y) - evaluate(f, x + y)


def additivity_vertices(f: PwlFunction) -> list[tuple[Fraction, Fraction]]:
    """All vertices of the additivity complex on the torus [0,1)^2,
    deduplicated and sorted lexicographically."""
    bps = f.breakpoints[:-1]
    out = set()
    for bi in bps:
        for bj in bps:
            out.add((bi, bj))
            y = mod1(bj - bi)
            out.add((bi, y))
            out.add((y, bi))
    return sorted(out)


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("GJFACET_THREADS", "1")))
    except ValueError:
        return 1


# --- integer-grid vertex scan -------------------------------------------

class _Grid:
    """The function on the torus, scaled to integers."""

    def __init__(self, f: PwlFunction):
        bps = f.breakpoints
        vals = f.values
        self.scale_x = math.lcm(*(b.denominator for b in bps))
        self.scale_v = math.lcm(*(v.denominator for v in vals))
        B = [int(b * self.scale_x) for b in bps]
        V = [int(v * self.scale_v) for v in vals]
        bound = max(abs(v) for v in V) * self.scale_x * 4 + 4
        self.dtype = np.int64 if bound < _INT64_SAFE else object
        # B ends with scale_x (the point 1), V[-1] == V[0]
        self.B = np.array(B, dtype=self.dtype)
        self.V = np.array(V, dtype=self.dtype)
        self.n = len(B) - 1  # torus points 0..n-1
        self.D = self.scale_x

    def locate(self, s):
        k = np.searchsorted(self.B, s, side="right") - 1
        return np.minimum(k, self.n - 1)

    def interp_num(self, s, k):
        """(f(s) * L_k * scale_v, L_k) for grid points s in piece k."""
        B, V = self.B, self.V
        lo, hi = B[k], B[k + 1]
        return V[k] * (hi - s) + V[k + 1] * (s - lo), hi - lo

    def to_point(self, xi) -> Fraction:
        return Fraction(int(xi), self.D)


@dataclass
class _ChunkResult:
    min_value: Fraction | None = None
    tight: list = field(default_factory=list)  # (x, y) int pairs, lex-smallest
    tight_count: int = 0
    violations: list = field(default_factory=list)
    violation_count: int = 0
    vertex_count: int = 0


def _lex_smallest(xs, ys, cap):
    if len(xs) == 0:
        return []
    if xs.dtype == object:
        pairs = sorted(zip((int(a) for a in xs), (int(b) for b in ys)))
        return pairs[:cap]
    order = np.lexsort((ys, xs))[:cap]
    return [(int(xs[i]), int(ys[i])) for i in order]


def _exact_min(num, den) -> Fraction:
    """Exact minimum of num/den (den > 0) without floating point."""
    order = np.argsort(den, kind="stable")
    d_sorted = den[order]
    n_sorted = num[order]
    starts = np.flatnonzero(np.concatenate(([True], d_sorted[1:] != d_sorted[:-1])))
    mins = np.minimum.reduceat(n_sorted, starts)
    return min(Fraction(int(m), int(d_sorted[s])) for m, s in zip(mins, starts))


def _equals_mask(num, den, value: Fraction):
    """Mask of entries with num/den == value exactly."""
    p, q = value.numerator, value.denominator
    if den.dtype == object:
        return np.array([n * q == p * d for n, d in zip(num, den)], dtype=bool)
    # num/den == p/q  <=>  den divisible by q/g-compatible; test via target numerators
    dens, inverse = np.unique(den, return_inverse=True)
    targets = []
    ok = []
    for d in dens:
        t, r = divmod(p * int(d), q)
        ok.append(r == 0)
        targets.append(t if r == 0 else 0)
    ok = np.array(ok, dtype=bool)[inverse]
    targets = np.array(targets, dtype=np.int64)[inverse]
    return ok & (num == targets)


def _scan_block(grid: _Grid, rows, cap: int) -> _ChunkResult:
    B, V, n, D = grid.B, grid.V, grid.n, grid.D
    Bt = B[:n]
    Vt = V[:n]
    xi = Bt[rows][:, None]
    vi = Vt[rows][:, None]
    res = _ChunkResult()
    parts = []

    # pairs of breakpoints
    s = (xi + Bt[None, :]) % D
    k = grid.locate(s)
    fs, L = grid.interp_num(s, k)
    num1 = (vi + Vt[None, :]) * L - fs
    xs1 = np.broadcast_to(xi, s.shape).ravel()
    ys1 = np.broadcast_to(Bt[None, :], s.shape).ravel()
    parts.append((num1.ravel(), L.ravel(), xs1, ys1))

    # x a breakpoint and x + y a breakpoint; y off the breakpoints
    y = (Bt[None, :] - xi) % D
    m = grid.locate(y)
    fy, L2 = grid.interp_num(y, m)
    off = (B[m] != y).ravel()
    num2 = ((vi - Vt[None, :]) * L2 + fy).ravel()[off]
    L2 = L2.ravel()[off]
    xs2 = np.broadcast_to(xi, y.shape).ravel()[off]
    ys2 = y.ravel()[off]
    parts.append((num2, L2, xs2, ys2))
    # the mirrored family: delta is symmetric, so reuse values with x and y swapped
    parts.append((num2, L2, ys2, xs2))

    num = np.concatenate([p[0] for p in parts])
    den = np.concatenate([p[1] for p in parts])
    xs = np.concatenate([p[2] for p in parts])
    ys = np.concatenate([p[3] for p in parts])
    res.vertex_count = len(num)
    if len(num) == 0:
        return res
    res.min_value = _exact_min(num, den)
    tight = _equals_mask(num, den, res.min_value)
    res.tight_count = int(tight.sum())
    res.tight = _lex_smallest(xs[tight], ys[tight], cap)
    bad = num < 0
    res.violation_count = int(bad.sum())
    res.violations = _lex_smallest(xs[bad], ys[bad], cap)
    return res


def _merge(results, cap):
    total = _ChunkResult()
    for r in results:
        total.vertex_count += r.vertex_count
        total.violation_count += r.violation_count
        total.violations = sorted(total.violations + r.violations)[:cap]
        if r.min_value is None:
            continue
        if total.min_value is None or r.min_value < total.min_value:
            total.min_value = r.min_value
            total.tight = list(r.tight)
            total.tight_count = r.tight_count
        elif r.min_value == total.min_value:
            total.tight = sorted(total.tight + r.tight)[:cap]
            total.tight_count += r.tight_count
    return total


def check_subadditive(f: PwlFunction, cap: int = DEFAULT_WITNESS_CAP,
                      threads: int | None = None) -> VerificationReport:
    """Decide subadditivity of f exactly on the additivity-complex vertices."""
    grid = _Grid(f)
    n = grid.n
    rows_per_block = max(1, _CHUNK_ELEMENTS // max(n, 1))
    blocks = [np.arange(i, min(i + rows_per_block, n)) for i in range(0, n, rows_per_block)]
    threads = threads or default_threads()
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda r: _scan_block(grid, r, cap), blocks))
    else:
        results = [_scan_block(grid, r, cap) for r in blocks]
    total = _merge(results, cap)

    min_delta = total.min_value / grid.scale_v
    holds = total.violation_count == 0
    pairs = total.tight if holds else total.violations
    witnesses = []
    for xi, yi in pairs:
        x, y = grid.to_point(xi), grid.to_point(yi)
        witnesses.append(Witness(WitnessKind.SUBADDITIVITY_PAIR, (x, y),
                                 evaluate(f, x) + evaluate(f, y), evaluate(f, x + y)))
    summary = {
        "min_delta": min_delta,
        "vertex_count": total.vertex_count,
        "tight_count": total.tight_count,
        "violation_count": total.violation_count,
    }
    return VerificationReport(
        Property.SUBADDITIVE, holds, witnesses, summary,
        witness_count=total.tight_count if holds else total.violation_count,
    )


def symmetry_check_points(f: PwlFunction, fpoint: Fraction) -> list[Fraction]:
    bps = f.breakpoints[:-1]
    return sorted(set(bps) | {mod1(fpoint - b) for b in bps})


def check_symmetric(f: PwlFunction, fpoint, cap: int = DEFAULT_WITNESS_CAP) -> VerificationReport:
    fpoint = as_rational(fpoint)
    if not 0 < fpoint < 1:
        raise ValueError(f"symmetry point must lie in ]0,1[, got {format_rational(fpoint)}")
    bad = []
    points = symmetry_check_points(f, fpoint)
    for a in points:
        lhs = evaluate(f, a) + evaluate(f, fpoint - a)
        if lhs != 1:
            bad.append(Witness(WitnessKind.SYMMETRY_POINT, (a,), lhs, Fraction(1)))
    return VerificationReport(
        Property.SYMMETRIC, not bad, bad[:cap],
        {"check_points": len(points), "violation_count": len(bad)},
        witness_count=len(bad),
    )


def check_minimal(f: PwlFunction, fpoint, cap: int = DEFAULT_WITNESS_CAP,
                  threads: int | None = None) -> VerificationReport:
    """Minimality via subadditivity, symmetry, f(0) = 0 and f(fpoint) = 1.

    The bounds 0 <= f <= 1 follow from these; they are re-checked at the
    breakpoints and any breach is reported as a witness.
    """
    fpoint = as_rational(fpoint)
    witnesses = []
    f0 = evaluate(f, 0)
    ffp = evaluate(f, fpoint)
    if f0 != 0:
        witnesses.append(Witness(WitnessKind.POINT_VALUE, (Fraction(0),), f0, Fraction(0), "f(0) = 0"))
    if ffp != 1:
        witnesses.append(Witness(WitnessKind.POINT_VALUE, (fpoint,), ffp, Fraction(1), "f(f) = 1"))
    for b, v in zip(f.breakpoints, f.values):
        if v < 0:
            witnesses.append(Witness(WitnessKind.POINT_VALUE, (b,), v, Fraction(0), "f >= 0"))
        elif v > 1:
            witnesses.append(Witness(WitnessKind.POINT_VALUE, (b,), v, Fraction(1), "f <= 1"))
    sub = check_subadditive(f, cap=cap, threads=threads)
    children = [sub]
    if 0 < fpoint < 1:
        sym = check_symmetric(f, fpoint, cap=cap)
        children.append(sym)
    else:
        sym = None
        witnesses.append(Witness(WitnessKind.POINT_VALUE, (fpoint,), fpoint, Fraction(1, 2),
                                 "symmetry point outside ]0,1["))
    holds = not witnesses and sub.holds and sym is not None and sym.holds
    own = len(witnesses)
    for c in children:
        if not c.holds:
            witnesses.extend(c.witnesses)
    count = own + sum(c.witness_count for c in children if not c.holds)
    summary = {
        "fpoint": fpoint,
        "min_value": min(f.values),
        "max_value": max(f.values),
        "min_delta": sub.summary["min_delta"],
    }
    return VerificationReport(Property.MINIMAL, holds, witnesses[:cap], summary,
                              witness_count=count, children=children)


def check_valid(f: PwlFunction, fpoint, cap: int = DEFAULT_WITNESS_CAP,
                threads: int | None = None) -> VerificationReport:
    """Validity as implied by minimality; the covering condition over all
    finite-support solutions is not enumerated."""
    m = check_minimal(f, fpoint, cap=cap, threads=threads)
    return VerificationReport(Property.VALID, m.holds, list(m.witnesses),
                              {"implied_by": "minimal"}, witness_count=m.witness_count,
                              children=[m])


def check_two_slope_facet(f: PwlFunction, fpoint, cap: int = DEFAULT_WITNESS_CAP,
                          threads: int | None = None) -> VerificationReport:
    m = check_minimal(f, fpoint, cap=cap, threads=threads)
    sl = distinct_slopes(normalize(f))
    witnesses = list(m.witnesses) if not m.holds else []
    if len(sl) != 2:
        witnesses.insert(0, Witness(WitnessKind.SLOPE_COUNT, tuple(sl), len(sl), 2))
    holds = m.holds and len(sl) == 2
    summary = {"slope_count": len(sl)}
    if len(sl) == 2:
        summary["slope_min"], summary["slope_max"] = sl
    else:
        summary["slopes"] = sl
    count = (0 if m.holds else m.witness_count) + (len(sl) != 2)
    return VerificationReport(Property.TWO_SLOPE_FACET, holds, witnesses[:cap], summary,
                              witness_count=count, children=[m])


def reproduce(w: Witness, f: PwlFunction, fpoint=None) -> tuple:
    """Recompute ``(lhs, rhs)`` of a subadditivity or symmetry witness."""
    if w.kind is WitnessKind.SUBADDITIVITY_PAIR:
        x, y = w.data
        return evaluate(f, x) + evaluate(f, y), evaluate(f, x + y)
    if w.kind is WitnessKind.SYMMETRY_POINT:
        (a,) = w.data
        return evaluate(f, a) + evaluate(f, as_rational(fpoint) - a), Fraction(1)
    if w.kind is WitnessKind.POINT_VALUE:
        (x,) = w.data
        return evaluate(f, x), w.rhs
    raise ValueError(f"cannot reproduce {w.kind.value} witness")
