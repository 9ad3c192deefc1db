"""The two-slope family psi_0, psi_1, ... built by segment replacement.

psi_0 is the GMI triangle peaking at (alpha, 1). Each step replaces every
maximal positive-slope segment [a, b] by an ascent, a short descent of
width eps centred at (a + b) / 2, and a second ascent; the descent has the
same slope -1/(1 - alpha) as the original final descent.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import DepthPolicyError, ScheduleError, StepError
from .pwl import (
    PwlFunction,
    SegmentTag,
    Sign,
    evaluate,
    normalize,
    scale,
)
from .rational import as_rational, format_rational, parse_rational
from .verify import Property, VerificationReport, Witness, WitnessKind

MAX_BUILD_DEPTH = 20


@dataclass(frozen=True)
class EpsilonSchedule:
    """alpha and the step sizes eps_1, eps_2, ...

    ``kind`` is ``"explicit"`` (finitely many ``epsilons``) or
    ``"geometric"`` (eps_i = base * ratio**i, requires 0 < 2*ratio < 1).
    Construction validates every invariant the family needs.
    """

    alpha: Fraction
    kind: str = "geometric"
    epsilons: tuple = ()
    base: Fraction | None = None
    ratio: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_rational(self.alpha))
        if not 0 < self.alpha < 1:
            raise ScheduleError(f"alpha must lie in ]0,1[, got {format_rational(self.alpha)}")
        if self.kind == "explicit":
            eps = tuple(as_rational(e) for e in self.epsilons)
            object.__setattr__(self, "epsilons", eps)
            if self.base is not None or self.ratio is not None:
                raise ScheduleError("explicit schedules take no base/ratio")
        elif self.kind == "geometric":
            if self.base is None or self.ratio is None:
                raise ScheduleError("geometric schedules need base and ratio")
            object.__setattr__(self, "base", as_rational(self.base))
            object.__setattr__(self, "ratio", as_rational(self.ratio))
            if self.epsilons:
                raise ScheduleError("geometric schedules take no explicit epsilons")
            if self.base <= 0:
                raise ScheduleError("base must be positive")
            if not (0 < self.ratio and 2 * self.ratio < 1):
                raise ScheduleError(f"ratio must satisfy 0 < ratio < 1/2, got {format_rational(self.ratio)}")
        else:
            raise ScheduleError(f"unknown schedule kind {self.kind!r}")
        self._validate()

    @classmethod
    def geometric(cls, alpha, base, ratio) -> "EpsilonSchedule":
        return cls(alpha, "geometric", (), base, ratio)

    @classmethod
    def explicit(cls, alpha, epsilons) -> "EpsilonSchedule":
        return cls(alpha, "explicit", tuple(epsilons))

    @property
    def length(self) -> int | None:
        """Number of available eps values (None when unbounded)."""
        return len(self.epsilons) if self.kind == "explicit" else None

    def supports(self, i: int) -> bool:
        return self.kind == "geometric" or i <= len(self.epsilons)

    def eps(self, i: int) -> Fraction:
        """eps_i, 1-based."""
        if i < 1:
            raise IndexError("eps is 1-based")
        if self.kind == "geometric":
            return self.base * self.ratio ** i
        if i > len(self.epsilons):
            raise ScheduleError(f"explicit schedule has only {len(self.epsilons)} epsilons, eps_{i} requested")
        return self.epsilons[i - 1]

    def series_total(self) -> Fraction:
        """sum of 2^(i-1) eps_i over the whole schedule."""
        if self.kind == "geometric":
            return self.base * self.ratio / (1 - 2 * self.ratio)
        return sum((2 ** (i - 1) * e for i, e in enumerate(self.epsilons, 1)), Fraction(0))

    def _validate(self):
        a = self.alpha
        if self.kind == "explicit":
            eps = self.epsilons
            for i, e in enumerate(eps, 1):
                if e <= 0:
                    raise ScheduleError(f"eps_{i} = {format_rational(e)} is not positive")
                if i > 1 and e > eps[i - 2]:
                    raise ScheduleError(f"schedule increases at eps_{i}")
        if self.supports(1):
            e1 = self.eps(1)
            if e1 > 1 - a:
                raise ScheduleError(f"eps_1 = {format_rational(e1)} exceeds 1 - alpha = {format_rational(1 - a)}")
        # partial sums grow with k, so checking the total covers every prefix
        total = self.series_total()
        if total >= a:
            raise ScheduleError(
                f"sum of 2^(i-1) eps_i = {format_rational(total)} is not below alpha = {format_rational(a)}"
            )

    def to_dict(self) -> dict:
        if self.kind == "geometric":
            return {"alpha": format_rational(self.alpha), "kind": "geometric",
                    "base": format_rational(self.base), "ratio": format_rational(self.ratio)}
        return {"alpha": format_rational(self.alpha), "kind": "explicit",
                "epsilons": [format_rational(e) for e in self.epsilons]}

    @classmethod
    def from_dict(cls, d: dict) -> "EpsilonSchedule":
        if not isinstance(d, dict):
            raise ScheduleError("schedule JSON must be an object")

        def q(key):
            if key not in d:
                raise ScheduleError(f"schedule is missing field {key!r}")
            try:
                return parse_rational(d[key], strict=False)
            except Exception as exc:
                raise ScheduleError(f"field {key!r}: {exc}") from None

        kind = d.get("kind")
        if kind == "geometric":
            return cls.geometric(q("alpha"), q("base"), q("ratio"))
        if kind == "explicit":
            eps = d.get("epsilons")
            if not isinstance(eps, list):
                raise ScheduleError("field 'epsilons' must be a list")
            try:
                vals = [parse_rational(e, strict=False) for e in eps]
            except Exception as exc:
                raise ScheduleError(f"field 'epsilons': {exc}") from None
            return cls.explicit(q("alpha"), vals)
        raise ScheduleError(f"field 'kind' must be 'geometric' or 'explicit', got {kind!r}")

    def dumps(self) -> str:
        return json.dumps(self.to_dict()) + "\n"


def standard_schedule() -> EpsilonSchedule:
    """alpha = 1/2 and eps_i = 2^(-2i-1)."""
    return EpsilonSchedule.geometric(Fraction(1, 2), Fraction(1, 2), Fraction(1, 4))


def gmi(alpha) -> PwlFunction:
    alpha = as_rational(alpha)
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in ]0,1[, got {format_rational(alpha)}")
    return PwlFunction(
        (0, alpha, 1), (0, 1, 0),
        (SegmentTag(Sign.POSITIVE, 0), SegmentTag(Sign.NEGATIVE, 0)),
    )


def _default_tags(f: PwlFunction) -> tuple:
    out = []
    for a, b, fa, fb in f.pieces():
        out.append(SegmentTag(Sign.POSITIVE if fb > fa else Sign.NEGATIVE, 0))
    return tuple(out)


def step(f: PwlFunction, alpha, eps_next) -> PwlFunction:
    """Replace every maximal positive-slope segment of f by three segments.

    Raises :class:`StepError` when eps_next does not fit strictly inside a
    positive segment.
    """
    alpha, eps = as_rational(alpha), as_rational(eps_next)
    if eps <= 0:
        raise StepError("eps must be positive")
    g = normalize(f if f.tags is not None else f.with_tags(_default_tags(f)))
    new_index = max(t.index for t in g.tags) + 1
    lift = eps / (2 * (1 - alpha))
    bps = [g.breakpoints[0]]
    vals = [g.values[0]]
    tags = []
    for (a, b, fa, fb), tag in zip(g.pieces(), g.tags):
        if fb > fa:
            if not eps < b - a:
                raise StepError(
                    f"eps = {format_rational(eps)} does not fit in positive segment "
                    f"[{format_rational(a)}, {format_rational(b)}]",
                    interval=(a, b),
                )
            mid_val = (fa + fb) / 2
            p = (a + b - eps) / 2
            q = (a + b + eps) / 2
            bps += [p, q]
            vals += [mid_val + lift, mid_val - lift]
            tags += [SegmentTag(Sign.POSITIVE, new_index), SegmentTag(Sign.NEGATIVE, new_index),
                     SegmentTag(Sign.POSITIVE, new_index)]
        else:
            tags.append(tag)
        bps.append(b)
        vals.append(fb)
    return PwlFunction(tuple(bps), tuple(vals), tuple(tags))


@lru_cache(maxsize=32)
def _ladder(schedule: EpsilonSchedule, depth: int) -> tuple:
    if depth == 0:
        return (gmi(schedule.alpha),)
    prev = _ladder(schedule, depth - 1)
    return prev + (step(prev[-1], schedule.alpha, schedule.eps(depth)),)


def ladder(schedule: EpsilonSchedule, depth: int) -> tuple:
    """(psi_0, ..., psi_depth), memoized per schedule."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if depth > MAX_BUILD_DEPTH:
        raise DepthPolicyError(f"full construction is capped at depth {MAX_BUILD_DEPTH}")
    if not schedule.supports(depth):
        raise ScheduleError(f"explicit schedule exhausted: depth {depth} needs {depth} epsilons, "
                            f"have {schedule.length}")
    return _ladder(schedule, depth)


def build(schedule: EpsilonSchedule, i: int) -> PwlFunction:
    return ladder(schedule, i)[-1]


def gamma_i(schedule: EpsilonSchedule, i: int) -> Fraction:
    """alpha - sum_{k<=i} 2^(k-1) eps_k: total positive-slope length of psi_i."""
    return schedule.alpha - sum((2 ** (k - 1) * schedule.eps(k) for k in range(1, i + 1)), Fraction(0))


def lambda_mu(alpha, eps1) -> tuple[Fraction, Fraction]:
    alpha, eps1 = as_rational(alpha), as_rational(eps1)
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in ]0,1[")
    if not 0 < eps1 <= 1 - alpha:
        raise ValueError(f"eps_1 must lie in ]0, 1 - alpha], got {format_rational(eps1)}")
    d = (alpha + eps1) * (1 - alpha)
    return (1 - alpha - eps1) / d, eps1 / d


def reduced_parameters(schedule: EpsilonSchedule) -> EpsilonSchedule:
    """Parameters of the rescaled copy of psi_{i-1} inside [0, alpha + eps_1]."""
    a = schedule.alpha
    e1 = schedule.eps(1)
    w = a + e1
    alpha2 = (a - e1) / w
    if schedule.kind == "geometric":
        return EpsilonSchedule.geometric(alpha2, 2 * schedule.base * schedule.ratio / w, schedule.ratio)
    return EpsilonSchedule.explicit(alpha2, [2 * e / w for e in schedule.epsilons[1:]])


def structure_report(f: PwlFunction, schedule: EpsilonSchedule, i: int) -> VerificationReport:
    """Check piece counts, lengths and slopes of f against psi_i's closed forms."""
    a = schedule.alpha
    g = normalize(f)
    gam = gamma_i(schedule, i)
    pos_len = gam / 2 ** i
    pos_slope = (1 - gam) / ((1 - a) * gam)
    neg_slope = -1 / (1 - a)
    expected_neg = Counter({1 - a: 1})
    for k in range(1, i + 1):
        expected_neg[schedule.eps(k)] += 2 ** (k - 1)

    witnesses = []
    pos, neg = [], []
    for lo, hi, flo, fhi in g.pieces():
        s = (fhi - flo) / (hi - lo)
        (pos if s > 0 else neg).append((lo, hi, s))

    def check(label, actual, expected, data=()):
        if actual != expected:
            witnesses.append(Witness(WitnessKind.QUANTITY, tuple(data), actual, expected, label))

    check("positive piece count", len(pos), 2 ** i)
    check("negative piece count", len(neg), 2 ** i)
    actual_neg = Counter(hi - lo for lo, hi, _ in neg)
    if actual_neg != expected_neg:
        witnesses.append(Witness(
            WitnessKind.QUANTITY, (),
            sorted(actual_neg.elements()), sorted(expected_neg.elements()),
            "negative piece lengths",
        ))
    for lo, hi, s in neg:
        check("negative slope", s, neg_slope, (lo, hi))
    for lo, hi, s in pos:
        check("positive length", hi - lo, pos_len, (lo, hi))
        check("positive slope", s, pos_slope, (lo, hi))
    summary = {
        "depth": i,
        "gamma": gam,
        "positive_length": pos_len,
        "positive_slope": pos_slope,
        "negative_slope": neg_slope,
        "positive_pieces": len(pos),
        "negative_pieces": len(neg),
    }
    return VerificationReport(Property.STRUCTURE, not witnesses, witnesses[:64], summary,
                              witness_count=len(witnesses))


def verify_recursive_decomposition(schedule: EpsilonSchedule, i: int) -> VerificationReport:
    """Compare psi_i on [0, alpha + eps_1] with lambda*x + mu*psi'_{i-1}(2x/(alpha + eps_1)),
    psi' built from the reduced parameters, on a grid holding the kinks of both sides."""
    if i < 1:
        raise ValueError("the decomposition needs i >= 1")
    a, e1 = schedule.alpha, schedule.eps(1)
    w = a + e1
    lam, mu = lambda_mu(a, e1)
    lhs = build(schedule, i)
    inner = build(reduced_parameters(schedule), i - 1)
    rhs_scaled = scale(inner, mu, 2 / w)
    grid = {b for b in lhs.breakpoints if b <= w}
    for b in inner.breakpoints:
        for k in (0, 1):
            x = w * b / 2 + k * w / 2
            if x <= w:
                grid.add(x)
    grid |= set(rhs_scaled.kinks_in(0, w))
    witnesses = []
    for x in sorted(grid):
        left = evaluate(lhs, x)
        right = lam * x + rhs_scaled(x)
        if left != right:
            witnesses.append(Witness(WitnessKind.POINT_VALUE, (x,), left, right, "psi_i = lambda x + mu psi'"))
    summary = {"depth": i, "lambda": lam, "mu": mu, "alpha_reduced": reduced_parameters(schedule).alpha,
               "grid_points": len(grid)}
    return VerificationReport(Property.RECURSIVE_DECOMPOSITION, not witnesses, witnesses[:64], summary,
                              witness_count=len(witnesses))

