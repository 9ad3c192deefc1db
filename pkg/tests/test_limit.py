import json
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from gjfacet.construct import EpsilonSchedule, gamma_i
from gjfacet.errors import DepthPolicyError, UnsupportedScheduleError
from gjfacet.limit import (
    LimitParams,
    convergence_constant,
    convergence_constant_from,
    density_gap,
    enclosure_depth,
    eval_depth,
    eval_limit,
    facet_evidence,
    gamma_limit,
    locate,
    negative_segments,
    non_pwl_evidence,
)
from gjfacet.pwl import Sign, evaluate, sup_diff_at_breakpoints

TOL = F(1, 10 ** 9)
interior = st.fractions(F(1, 10 ** 6), 1 - F(1, 10 ** 6), max_denominator=10 ** 6).filter(lambda x: 0 < x < 1)


# --- constants ----------------------------------------------------------

def test_gamma_limit(standard):
    assert gamma_limit(standard) == F(1, 4)
    wide = EpsilonSchedule.geometric(F(4, 5), F(4, 5), F(1, 4))
    assert gamma_limit(wide) == F(2, 5)
    for k in range(11):
        assert gamma_limit(standard) < gamma_i(standard, k)


def test_gamma_limit_needs_geometric():
    with pytest.raises(UnsupportedScheduleError):
        gamma_limit(EpsilonSchedule.explicit(F(1, 2), [F(1, 8)]))
    with pytest.raises(UnsupportedScheduleError):
        eval_limit(F(1, 3), TOL, EpsilonSchedule.explicit(F(1, 2), [F(1, 8)]))


def test_convergence_constant(standard, psi):
    assert convergence_constant(standard) == 3
    assert convergence_constant(LimitParams.from_schedule(standard)) == 3
    assert convergence_constant_from(F(2, 7), F(2, 7)) == 1
    for n in range(10):
        assert sup_diff_at_breakpoints(psi[n], psi[n + 1]) <= F(3, 2 ** n)


def test_enclosure_depth():
    assert enclosure_depth(F(3), F(6)) == 0
    assert enclosure_depth(F(3), F(3)) == 1
    assert enclosure_depth(F(3), F(2)) == 2
    d = enclosure_depth(F(3), TOL)
    assert F(3, 2 ** (d - 1)) <= TOL < F(3, 2 ** (d - 2))


# --- locate -------------------------------------------------------------

def test_locate_examples(standard):
    loc = locate(F(3, 4), 5, standard)
    assert (loc.sign, loc.interval, loc.depth) == (Sign.NEGATIVE, (F(1, 2), 1), 0)
    loc = locate(F(1, 4), 3, standard)
    assert (loc.sign, loc.interval, loc.depth) == (Sign.NEGATIVE, (F(3, 16), F(5, 16)), 1)
    loc = locate(F(1, 10), 1, standard)
    assert (loc.sign, loc.interval, loc.depth) == (Sign.POSITIVE, (0, F(3, 16)), 1)


@pytest.mark.parametrize("x", [0, 1, F(-1, 3), F(4, 3)])
def test_locate_rejects(standard, x):
    with pytest.raises(ValueError):
        locate(x, 3, standard)


@given(interior, st.integers(0, 12))
def test_locate_agrees_with_build(psi, standard, x, i):
    loc = locate(x, i, standard)
    f = psi[i]
    if loc.sign is Sign.POSITIVE:
        assert loc.right - loc.left == gamma_i(standard, i) / 2 ** i
        assert loc.left in f.breakpoints and loc.right in f.breakpoints
        k = f.breakpoints.index(loc.left)
        assert f.breakpoints[k + 1] == loc.right and f.values[k + 1] > f.values[k]
    else:
        assert (loc.left, loc.right, loc.depth) in {(s.left, s.right, s.index) for s in negative_segments(i, standard)}
    assert eval_depth(x, i, standard) == evaluate(f, x)


# --- eval_limit ---------------------------------------------------------

def test_eval_limit_examples(standard):
    e = eval_limit(F(1, 2), TOL, standard)
    assert (e.mode, e.value, e.depth) == ("exact", 1, 0)
    e = eval_limit(F(3, 16), F(1, 10), standard)
    assert (e.mode, e.value, e.depth) == ("exact", F(5, 8), 1)
    e = eval_limit(F(19, 16), TOL, standard)
    assert e.point == F(3, 16) and e.value == F(5, 8)
    assert eval_limit(0, TOL, standard).value == 0


def test_eval_limit_json(standard):
    d = json.loads(eval_limit(F(3, 16), TOL, standard).dumps())
    assert d == {"point": "3/16", "mode": "exact", "value": "5/8", "depth": 1}
    d = eval_limit(F(1, 3), TOL, standard).to_dict()
    assert list(d) == ["point", "mode", "lower", "upper", "depth"]


@pytest.mark.parametrize("tol", [0, F(-1, 10)])
def test_eval_limit_rejects_tol(standard, tol):
    with pytest.raises(ValueError):
        eval_limit(F(1, 3), tol, standard)


def test_eval_limit_refuses_floats(standard):
    with pytest.raises(TypeError):
        eval_limit(0.25, TOL, standard)


@given(interior)
def test_enclosure_width_and_nesting(standard, x):
    a = eval_limit(x, TOL, standard)
    b = eval_limit(x, F(1, 10 ** 12), standard)
    assert a.width() <= 2 * TOL
    if a.is_exact:
        assert b.is_exact and b.value == a.value
    elif b.is_exact:
        assert a.contains(b.value)
    else:
        assert a.lower <= b.lower <= b.upper <= a.upper


@given(interior)
def test_enclosure_sound_deeper(standard, x):
    e = eval_limit(x, F(1, 10 ** 4), standard)
    for d in range(e.depth, e.depth + 11):
        v = eval_depth(x, d, standard)
        assert e.contains(v)


@given(interior, st.integers(0, 10))
def test_persistence(psi, standard, x, i):
    loc = locate(x, i, standard)
    if loc.sign is Sign.NEGATIVE:
        v = evaluate(psi[i], x)
        for j in range(i, 13):
            assert evaluate(psi[j], x) == v
        assert eval_limit(x, TOL, standard).value == v


def test_limit_symmetry(standard):
    rng = random.Random(3)
    decided = 0
    for _ in range(2000):
        x = F(rng.randrange(1, 10 ** 6), 10 ** 6)
        a = eval_limit(x, TOL, standard)
        b = eval_limit(standard.alpha - x, TOL, standard)
        if a.is_exact and b.is_exact:
            decided += 1
            assert a.value + b.value == 1
    assert decided > 500


def test_limit_spot_subadditive(standard):
    rng = random.Random(11)
    decided = 0
    for _ in range(10 ** 4):
        x = F(rng.randrange(1, 10 ** 6), 10 ** 6)
        y = F(rng.randrange(1, 10 ** 6), 10 ** 6)
        e = [eval_limit(v, TOL, standard) for v in (x, y, x + y)]
        if all(v.is_exact for v in e):
            decided += 1
            assert e[0].value + e[1].value >= e[2].value
        else:
            # an enclosure pair can still refute: upper bounds on the left below the lower bound on the right
            hi = [v.value if v.is_exact else v.upper for v in e[:2]]
            lo = e[2].value if e[2].is_exact else e[2].lower
            assert sum(hi) >= lo
    assert decided > 3000


# --- segments and density -----------------------------------------------

def test_negative_segments_examples(standard):
    [s0] = negative_segments(0, standard)
    assert (s0.left, s0.right, s0.index) == (F(1, 2), 1, 0)
    assert [(s.left, s.right, s.index) for s in negative_segments(1, standard)] == [
        (F(3, 16), F(5, 16), 1), (F(1, 2), 1, 0)]
    for i in range(11):
        assert len(negative_segments(i, standard)) == 2 ** i


def test_density_gap(standard):
    assert density_gap(0, standard) == F(1, 2)
    assert density_gap(1, standard) == F(3, 16)
    assert density_gap(10, standard) < F(1, 2 ** 11)
    for i in range(13):
        assert density_gap(i, standard) == gamma_i(standard, i) / 2 ** i
    for i in range(12):
        ratio = density_gap(i + 1, standard) / density_gap(i, standard)
        assert ratio == gamma_i(standard, i + 1) / (2 * gamma_i(standard, i)) < F(1, 2)


def test_depth_policy(standard):
    with pytest.raises(DepthPolicyError):
        negative_segments(21, standard)


# --- evidence -----------------------------------------------------------

def test_non_pwl_examples(standard):
    r = non_pwl_evidence(1, standard)
    assert r.holds and r.witnesses[0].data == (F(3, 16), F(5, 16), 1)
    r = non_pwl_evidence(10, standard)
    assert r.holds
    a, b = r.summary["closest_segment"]
    assert 0 < a and b < F(1, 1024)
    assert r.summary["segment_counts"] == [2 ** d for d in range(11)]


def test_facet_evidence_depth_one(standard, psi):
    r = facet_evidence(1, standard)
    assert r.holds
    assert r.summary["midpoint_relations_checked"] == 1
    assert evaluate(psi[1], F(1, 4)) == F(1, 2)
    assert 2 * evaluate(psi[1], F(1, 4)) == evaluate(psi[1], F(1, 2))


def test_facet_evidence_rejects(standard):
    with pytest.raises(ValueError):
        facet_evidence(0, standard)
    with pytest.raises(ValueError):
        facet_evidence(3, standard, probes=(F(3, 2),))


@pytest.mark.parametrize("d", [2, 4, 6])
def test_facet_evidence_chains(standard, d):
    r = facet_evidence(d, standard, probes=(F(1, 3), F(2, 5)))
    assert r.holds
    lip = r.summary["lipschitz"]
    for links in r.summary["vanishing_chains"].values():
        zs = [z for _, z, _ in links]
        assert [n for n, _, _ in links] == list(range(2, d + 1))
        assert all(z1 > z2 for z1, z2 in zip(zs, zs[1:]))
        for n, z, gap in links:
            assert 0 < z < F(1, n) and 0 <= gap <= 2 * lip * z


def test_facet_evidence_other_schedule():
    s = EpsilonSchedule.geometric(F(2, 5), F(1, 5), F(1, 3))
    assert facet_evidence(5, s).holds
