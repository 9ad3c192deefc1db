"""Certified evaluation and analysis of the limit psi = lim psi_i.

Construction steps only ever touch positive-slope segments, so once a
point sits in the closure of a negative segment its value is final. Points
are followed by a localized descent that tracks the single positive
interval containing them, which costs O(depth) instead of O(2^depth).
Elsewhere the uniform tail bound C / 2^(d-1) gives an enclosure.
"""
from __future__ import annotations

import json
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .construct import (
    MAX_BUILD_DEPTH,
    EpsilonSchedule,
    build,
)
from .errors import DepthPolicyError, UnsupportedScheduleError
from .pwl import Sign, evaluate
from .rational import as_rational, format_rational, mod1
from .verify import Property, VerificationReport, Witness, WitnessKind

DEFAULT_PROBES = (Fraction(1, 3), Fraction(2, 3), Fraction(1, 7))


def gamma_limit(schedule: EpsilonSchedule) -> Fraction:
    if schedule.kind != "geometric":
        raise UnsupportedScheduleError("the limit needs a geometric schedule (closed-form tail)")
    return schedule.alpha - schedule.series_total()


@dataclass(frozen=True)
class LimitParams:
    schedule: EpsilonSchedule
    gamma: Fraction
    C: Fraction

    @classmethod
    def from_schedule(cls, schedule: EpsilonSchedule) -> "LimitParams":
        g = gamma_limit(schedule)
        return cls(schedule, g, convergence_constant_from(schedule.alpha, g))


@lru_cache(maxsize=16)
def _params(schedule: EpsilonSchedule) -> LimitParams:
    return LimitParams.from_schedule(schedule)


def convergence_constant_from(alpha: Fraction, gamma: Fraction) -> Fraction:
    return alpha * (1 - gamma) / ((1 - alpha) * gamma)


def convergence_constant(params) -> Fraction:
    """C with |psi_i - psi_(i+1)| <= C / 2^i; accepts LimitParams or a schedule."""
    if isinstance(params, EpsilonSchedule):
        params = LimitParams.from_schedule(params)
    return convergence_constant_from(params.schedule.alpha, params.gamma)


@dataclass(frozen=True)
class SegmentLocation:
    """Where x sits in psi_depth.

    ``sign`` NEGATIVE: x is in the closure of the negative segment
    [left, right] created at step ``depth``. POSITIVE: x is in the positive
    piece [left, right] of psi_depth. The endpoint values are psi_depth's.
    """

    sign: Sign
    left: Fraction
    right: Fraction
    left_value: Fraction
    right_value: Fraction
    depth: int

    def value_at(self, x) -> Fraction:
        x = as_rational(x)
        if x == self.left:
            return self.left_value
        return self.left_value + (self.right_value - self.left_value) * (x - self.left) / (self.right - self.left)

    @property
    def interval(self) -> tuple[Fraction, Fraction]:
        return self.left, self.right


def locate(x, max_depth: int, schedule: EpsilonSchedule) -> SegmentLocation:
    x = as_rational(x)
    if not 0 < x < 1:
        raise ValueError(f"x must lie in ]0,1[, got {format_rational(x)}")
    if max_depth < 0:
        raise ValueError("max_depth must be nonnegative")
    alpha = schedule.alpha
    if x >= alpha:
        return SegmentLocation(Sign.NEGATIVE, alpha, Fraction(1), Fraction(1), Fraction(0), 0)
    lift_scale = 1 / (2 * (1 - alpha))
    a, b = Fraction(0), alpha
    fa, fb = Fraction(0), Fraction(1)
    for d in range(1, max_depth + 1):
        eps = schedule.eps(d)
        mid = (fa + fb) / 2
        p, q = (a + b - eps) / 2, (a + b + eps) / 2
        hp, hq = mid + eps * lift_scale, mid - eps * lift_scale
        if p <= x <= q:
            return SegmentLocation(Sign.NEGATIVE, p, q, hp, hq, d)
        if x < p:
            b, fb = p, hp
        else:
            a, fa = q, hq
    return SegmentLocation(Sign.POSITIVE, a, b, fa, fb, max_depth)


def eval_depth(x, depth: int, schedule: EpsilonSchedule) -> Fraction:
    """psi_depth(x) via localized descent."""
    x = mod1(as_rational(x))
    if x == 0:
        return Fraction(0)
    return locate(x, depth, schedule).value_at(x)


@dataclass(frozen=True)
class LimitEvaluation:
    point: Fraction
    mode: str  # "exact" or "enclosure"
    depth: int
    value: Fraction | None = None
    lower: Fraction | None = None
    upper: Fraction | None = None
    segment_index: int | None = None

    @property
    def is_exact(self) -> bool:
        return self.mode == "exact"

    def contains(self, v) -> bool:
        if self.is_exact:
            return v == self.value
        return self.lower <= v <= self.upper

    def width(self) -> Fraction:
        return Fraction(0) if self.is_exact else self.upper - self.lower

    def to_dict(self) -> dict:
        d = {"point": format_rational(self.point), "mode": self.mode}
        if self.is_exact:
            d["value"] = format_rational(self.value)
        else:
            d["lower"] = format_rational(self.lower)
            d["upper"] = format_rational(self.upper)
        d["depth"] = self.depth
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_dict()) + "\n"


def enclosure_depth(C: Fraction, tol: Fraction) -> int:
    """Smallest d >= 0 with C / 2^(d-1) <= tol."""
    r = 2 * C / tol
    m = -(-r.numerator // r.denominator)  # ceil
    return max(0, (m - 1).bit_length())


def eval_limit(x, tol, schedule: EpsilonSchedule) -> LimitEvaluation:
    x = as_rational(x)
    tol = as_rational(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    params = _params(schedule)
    point = mod1(x)
    if point == 0:
        return LimitEvaluation(point, "exact", 0, value=Fraction(0), segment_index=0)
    d = enclosure_depth(params.C, tol)
    loc = locate(point, d, schedule)
    if loc.sign is Sign.NEGATIVE:
        return LimitEvaluation(point, "exact", loc.depth, value=loc.value_at(point), segment_index=loc.depth)
    v = loc.value_at(point)
    r = params.C * 2 / 2 ** d
    return LimitEvaluation(point, "enclosure", d, lower=max(Fraction(0), v - r), upper=min(Fraction(1), v + r))


# --- finite structure of S_depth ---------------------------------------------

@dataclass(frozen=True)
class NegativeSegment:
    left: Fraction
    right: Fraction
    index: int

    @property
    def midpoint(self) -> Fraction:
        return (self.left + self.right) / 2


def _check_depth(depth: int):
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if depth > MAX_BUILD_DEPTH:
        raise DepthPolicyError(f"full construction is capped at depth {MAX_BUILD_DEPTH}")


def negative_segments(depth: int, schedule: EpsilonSchedule) -> list[NegativeSegment]:
    """Maximal negative segments of psi_depth with creation indices, sorted."""
    _check_depth(depth)
    f = build(schedule, depth)
    return [NegativeSegment(a, b, t.index)
            for (a, b, _, _), t in zip(f.pieces(), f.tags) if t.sign is Sign.NEGATIVE]


def density_gap(depth: int, schedule: EpsilonSchedule) -> Fraction:
    """Longest sub-interval of [0, 1] missing S_depth, measured from the segments."""
    segs = negative_segments(depth, schedule)
    gap, prev = Fraction(0), Fraction(0)
    for s in segs:
        gap = max(gap, s.left - prev)
        prev = s.right
    return max(gap, 1 - prev)


def non_pwl_evidence(depth: int, schedule: EpsilonSchedule) -> VerificationReport:
    """For k = 1..depth, a whole negative segment of S_depth inside ]0, 2^-k[,
    and negative segment counts 2^d growing with d."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    segs = negative_segments(depth, schedule)
    witnesses = []
    missing = []
    first = segs[0]  # closest to the origin
    for k in range(1, depth + 1):
        bound = Fraction(1, 2 ** k)
        if 0 < first.left and first.right < bound:
            witnesses.append(Witness(WitnessKind.SEGMENT, (first.left, first.right, first.index),
                                     first.right, bound, f"segment inside ]0, 2^-{k}["))
        else:
            missing.append(k)
    counts = [sum(1 for s in segs if s.index <= d) for d in range(depth + 1)]
    counts_ok = all(c == 2 ** d for d, c in enumerate(counts))
    increasing = all(counts[d] < counts[d + 1] for d in range(depth))
    holds = not missing and counts_ok and increasing
    if not counts_ok:
        witnesses.insert(0, Witness(WitnessKind.QUANTITY, tuple(counts), counts,
                                    [2 ** d for d in range(depth + 1)], "segment counts"))
    summary = {"depth": depth, "segment_counts": counts, "missing_scales": missing,
               "closest_segment": [first.left, first.right]}
    return VerificationReport(Property.NON_PWL_EVIDENCE, holds, witnesses, summary)


def _complex_vertices_in_box(bps, u1, u2, v1, v2):
    """Vertices of the additivity complex of a function with breakpoints bps,
    refined by the box edges, inside [u1, u2] x [v1, v2] (coordinates in R)."""
    # breakpoints of the periodic function near an interval
    def kinks(lo, hi):
        out = {lo, hi}
        for k in range(lo.numerator // lo.denominator, hi.numerator // hi.denominator + 1):
            i = bisect_left(bps, lo - k)
            j = bisect_right(bps, hi - k)
            out.update(b + k for b in bps[i:j])
        return sorted(out)

    xs = kinks(u1, u2)
    ys = kinks(v1, v2)
    pts = {(x, y) for x in xs for y in ys}
    for x in xs:
        for w in kinks(x + v1, x + v2):
            pts.add((x, w - x))
    for y in ys:
        for w in kinks(u1 + y, u2 + y):
            pts.add((w - y, y))
    return sorted(pts)


def facet_evidence(depth: int, schedule: EpsilonSchedule, probes=DEFAULT_PROBES) -> VerificationReport:
    """Finite checks behind the facet argument for psi, done on psi_depth.

    (a) interval additivity on U = [(a+b)/2, b], V = [1 - (b-a)/2, 1] for
        every negative segment ]a, b[;
    (b) midpoint relations 2 psi(m) = psi(2m) and psi(m_s) + psi(m) = psi(m_s + m);
    (c) for each probe x, points y_n, z_n of S_depth with 0 < z_n < 1/n,
        y_n + z_n = x and psi(y_n) + psi(z_n) >= psi_depth(x).

    Every point used in (a) and (b), and the y_n, z_n of (c), lies in the
    closure of a negative segment, where psi_depth already equals psi.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    f = build(schedule, depth)
    segs = negative_segments(depth, schedule)
    bps = list(f.breakpoints)
    witnesses = []
    failures = 0
    summary = {"depth": depth}

    def fail(w):
        nonlocal failures
        failures += 1
        if len(witnesses) < 64:
            witnesses.append(w)

    # (a)
    checked = 0
    for s in segs:
        a, b = s.left, s.right
        u1, u2 = (a + b) / 2, b
        v1, v2 = 1 - (b - a) / 2, Fraction(1)
        for u, v in _complex_vertices_in_box(bps, u1, u2, v1, v2):
            checked += 1
            lhs = evaluate(f, u) + evaluate(f, v)
            rhs = evaluate(f, u + v)
            if lhs != rhs:
                fail(Witness(WitnessKind.SUBADDITIVITY_PAIR, (u, v), lhs, rhs, "interval additivity"))
    summary["interval_vertices_checked"] = checked

    # (b)
    starts = {s.left: s.index for s in segs}
    by_index = {}
    for s in segs:
        by_index.setdefault(s.index, []).append(s)
    relations = 0
    for k1 in range(1, depth + 1):
        group = by_index.get(k1, [])
        if not group:
            fail(Witness(WitnessKind.QUANTITY, (k1,), 0, 2 ** (k1 - 1), "segments of index"))
            continue
        sc = min(group, key=lambda s: s.left)
        m = sc.midpoint
        relations += 1
        if starts.get(2 * m) != k1 - 1:
            fail(Witness(WitnessKind.POINT_VALUE, (2 * m,), starts.get(2 * m, -1), k1 - 1,
                         "2m starts a segment of the previous index"))
        lhs, rhs = 2 * evaluate(f, m), evaluate(f, 2 * m)
        if lhs != rhs:
            fail(Witness(WitnessKind.SUBADDITIVITY_PAIR, (m, m), lhs, rhs, "psi(m) + psi(m) = psi(2m)"))
        for s in group:
            if s is sc:
                continue
            relations += 1
            ms = s.midpoint
            idx = starts.get(mod1(ms + m))
            if idx is None or idx > k1 - 1:
                fail(Witness(WitnessKind.POINT_VALUE, (ms + m,), -1 if idx is None else idx, k1 - 1,
                             "m_s + m starts an earlier segment"))
            lhs, rhs = evaluate(f, ms) + evaluate(f, m), evaluate(f, ms + m)
            if lhs != rhs:
                fail(Witness(WitnessKind.SUBADDITIVITY_PAIR, (ms, m), lhs, rhs,
                             "psi(m_s) + psi(m) = psi(m_s + m)"))
    summary["midpoint_relations_checked"] = relations

    # (c)
    lip = max(abs(s) for s in _slopes_of(f))
    chains = {}
    for probe in probes:
        probe = as_rational(probe)
        if not 0 < probe < 1:
            raise ValueError("probe points must lie in ]0,1[")
        chain = _vanishing_chain(f, segs, probe, depth, lip)
        chains[format_rational(probe)] = [[n, z, gap] for n, _, z, gap in chain["links"]]
        for w in chain["failures"]:
            fail(w)
    summary["lipschitz"] = lip
    summary["vanishing_chains"] = chains
    return VerificationReport(Property.FACET_EVIDENCE, failures == 0, witnesses, summary,
                              witness_count=failures)


def _slopes_of(f):
    return [(fb - fa) / (b - a) for a, b, fa, fb in f.pieces()]


def _chain_spans(segs, probe, upper):
    """Open intervals ]a, b[ = J ∩ (probe - I) for negative segments I, J with J inside ]0, upper[."""
    lefts = [s.left for s in segs]
    out = []
    for J in segs:
        if not (0 < J.left and J.right < upper):
            continue
        # I must meet ]probe - J.right, probe - J.left[
        lo, hi = probe - J.right, probe - J.left
        start = max(0, bisect_left(lefts, lo) - 1)
        for I in segs[start:]:
            if I.left >= hi:
                break
            a = max(J.left, probe - I.right)
            b = min(J.right, probe - I.left)
            if a < b:
                out.append((a, b))
    return sorted(set(out))


def _vanishing_chain(f, segs, probe, depth, lip):
    """Witness pairs y_n + z_n = probe, n = 2..depth, with z_n strictly decreasing.

    z_n is the midpoint of the admissible interval clipped below the current
    bound, taking the interval that reaches highest. The gap
    psi(y_n) + psi(z_n) - psi_depth(probe) must lie in [0, 2 lip z_n], a bound
    that shrinks with z_n; the raw gap need not be monotone at finite depth
    since psi_depth(probe) only approximates psi off S.
    """
    psi_probe = evaluate(f, probe)
    spans = _chain_spans(segs, probe, Fraction(1, 2))
    links, failures = [], []
    prev_z = None
    for n in range(2, depth + 1):
        limit = Fraction(1, n) if prev_z is None else min(Fraction(1, n), prev_z)
        clipped = [(min(b, limit), a) for a, b in spans if a < limit]
        if not clipped:
            failures.append(Witness(WitnessKind.QUANTITY, (probe, n), 0, 1, "no chain witness"))
            break
        top, a = max(clipped)
        z = (a + top) / 2
        y = probe - z
        gap = evaluate(f, y) + evaluate(f, z) - psi_probe
        if gap < 0:
            failures.append(Witness(WitnessKind.SUBADDITIVITY_PAIR, (y, z), gap + psi_probe, psi_probe,
                                    "chain subadditivity"))
        if gap > 2 * lip * z:
            failures.append(Witness(WitnessKind.QUANTITY, (y, z), gap, 2 * lip * z, "chain gap bound"))
        links.append((n, y, z, gap))
        prev_z = z
    return {"links": links, "failures": failures}
