"""The ten acceptance criteria, each at its stated tolerance.

Every test appends one "[PASS]" or "[FAIL]" line that the terminal summary
prints at the end of the run.
"""
import random
import time
from fractions import Fraction as F

import pytest

import conftest
from gjfacet.construct import EpsilonSchedule, build, gamma_i, lambda_mu, structure_report, \
    verify_recursive_decomposition
from gjfacet.limit import density_gap, eval_limit, facet_evidence, negative_segments, non_pwl_evidence
from gjfacet.pwl import PwlFunction, dumps_function, loads_function, sup_diff_at_breakpoints
from gjfacet.verify import WitnessKind, check_minimal, check_subadditive, check_two_slope_facet, reproduce
from oracles import IntegerSampler, scan_delta

pytestmark = pytest.mark.acceptance

HALF = F(1, 2)


def record(n, title, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] AC{n} {title}" + (f": {detail}" if detail else "")
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def bump(f, k, by):
    vals = list(f.values)
    vals[k] += by
    return PwlFunction(f.breakpoints, vals)


_facet_reports = {}


def test_ac1_facet_family(psi):
    t0 = time.perf_counter()
    bad = []
    for i in range(11):
        m = check_minimal(psi[i], HALF)
        r = check_two_slope_facet(psi[i], HALF)
        _facet_reports[i] = r
        if not (m.holds and r.holds):
            bad.append(i)
    dt = time.perf_counter() - t0
    vertices = check_subadditive(psi[10]).summary["vertex_count"]
    record(1, "facet family", not bad and dt <= 120,
           f"psi_0..psi_10 minimal and two-slope, failures {bad}, {dt:.1f}s <= 120s, "
           f"{vertices} vertices at i=10")


def test_ac2_structure(psi, standard):
    bad = [i for i in range(11) if not structure_report(psi[i], standard, i).holds]
    r1 = structure_report(psi[1], standard, 1).summary
    r2 = structure_report(psi[2], standard, 2).summary
    spots = (gamma_i(standard, 1), gamma_i(standard, 2), r1["positive_slope"], r2["positive_slope"])
    neg = {structure_report(psi[i], standard, i).summary["negative_slope"] for i in range(11)}
    ok = not bad and spots == (F(3, 8), F(5, 16), F(10, 3), F(22, 5)) and neg == {-2}
    record(2, "structure", ok, f"i=0..10 failures {bad}, gamma_1,gamma_2,s_1,s_2 = "
           f"{', '.join(map(str, spots))}, negative slopes {', '.join(map(str, sorted(neg)))}")


def test_ac3_recursion(standard):
    reports = [verify_recursive_decomposition(standard, i) for i in range(1, 9)]
    bad = [i for i, r in enumerate(reports, 1) if not r.holds]
    lm = {(r.summary["lambda"], r.summary["mu"]) for r in reports}
    ok = not bad and lm == {(F(6, 5), F(2, 5))} == {lambda_mu(HALF, F(1, 8))}
    record(3, "recursion", ok, f"i=1..8 failures {bad}, (lambda, mu) = {', '.join(map(str, lm.pop()))}")


def test_ac4_convergence(psi):
    diffs = [sup_diff_at_breakpoints(psi[n], psi[n + 1]) for n in range(10)]
    ok = all(0 < d <= F(3, 2 ** n) for n, d in enumerate(diffs))
    worst = max(d * 2 ** n for n, d in enumerate(diffs))
    record(4, "convergence", ok, f"0 < sup|psi_n - psi_n+1| <= 3/2^n for n=0..9, max 2^n*diff = {worst}")


def test_ac5_limit_evaluation(standard):
    a = eval_limit(HALF, F(1, 10 ** 9), standard)
    b = eval_limit(F(3, 16), F(1, 10 ** 9), standard)
    examples = (a.mode, a.value, a.depth, b.mode, b.value, b.depth) == ("exact", 1, 0, "exact", F(5, 8), 1)
    rng = random.Random(20240611)
    tol, fine = F(1, 10 ** 9), F(1, 10 ** 12)
    too_wide = slow = not_nested = exact = 0
    worst_ms = 0.0
    for _ in range(1000):
        q = rng.randrange(2, 10 ** 9)
        x = F(rng.randrange(1, q), q)
        t0 = time.perf_counter()
        e = eval_limit(x, tol, standard)
        ms = (time.perf_counter() - t0) * 1e3
        worst_ms = max(worst_ms, ms)
        slow += ms > 10
        exact += e.is_exact
        too_wide += e.width() > 2 * tol
        g = eval_limit(x, fine, standard)
        if e.is_exact:
            not_nested += not (g.is_exact and g.value == e.value)
        elif g.is_exact:
            not_nested += not e.contains(g.value)
        else:
            not_nested += not (e.lower <= g.lower <= g.upper <= e.upper)
    ok = examples and not (too_wide or slow or not_nested)
    record(5, "limit evaluation", ok,
           f"examples {'ok' if examples else 'wrong'}, 1000 points ({exact} exact): width violations {too_wide}, "
           f"over 10ms {slow} (worst {worst_ms:.2f}ms), refinement inconsistencies {not_nested}")


def test_ac6_density(standard):
    gaps = [density_gap(i, standard) == gamma_i(standard, i) / 2 ** i for i in range(13)]
    counts = [len(negative_segments(i, standard)) == 2 ** i for i in range(13)]
    r = non_pwl_evidence(12, standard)
    a, b = r.summary["closest_segment"]
    inside = 0 < a and b < F(1, 2 ** 12)
    ok = all(gaps) and all(counts) and r.holds and inside
    record(6, "density and non-PWL", ok, f"gap = gamma_i/2^i for i=0..12: {all(gaps)}, counts 2^i: {all(counts)}, "
           f"segment [{a}, {b}] inside ]0, 2^-12[: {inside}")


def test_ac7_facet_evidence(standard):
    r = facet_evidence(8, standard)
    s = r.summary
    chains = {p: len(v) for p, v in s["vanishing_chains"].items()}
    record(7, "facet evidence", r.holds and all(n == 7 for n in chains.values()),
           f"{s['interval_vertices_checked']} interval vertices, {s['midpoint_relations_checked']} midpoint "
           f"relations, chain lengths {chains}, failures {r.witness_count}")


def _corpus(psi):
    out = [(f"psi_{i}", psi[i]) for i in range(6)]
    p1 = psi[1]
    out += [
        ("psi_1 apex +1/100", bump(p1, 1, F(1, 100))),
        ("psi_1 valley lowered to 1/8", bump(p1, 2, F(1, 8) - p1.values[2])),
        ("psi_1 valley +1/1000", bump(p1, 2, F(1, 1000))),
        ("psi_2 apex +1/50", bump(psi[2], 3, F(1, 50))),
        ("psi_3 point -1/20", bump(psi[3], 4, F(-1, 20))),
        ("psi_4 point +1/1000", bump(psi[4], 7, F(1, 1000))),
        ("psi_5 point -1/4", bump(psi[5], 20, F(-1, 4))),
        ("psi_0 peak -1/3", bump(psi[0], 1, F(-1, 3))),
    ]
    rng = random.Random(7)
    while len(out) < 20:
        alpha = F(rng.randrange(2, 9), 10)
        eps, budget = [], alpha
        for i in range(rng.randrange(1, 4)):
            e = min(1 - alpha, budget / 2 ** i) * F(rng.randrange(1, 10), 10)
            e = min([e] + eps[-1:])
            eps.append(e)
            budget -= 2 ** i * e
        s = EpsilonSchedule.explicit(alpha, eps)
        out.append((f"random alpha={alpha} eps={'/'.join(map(str, eps))}", build(s, len(eps))))
    return out


def test_ac8_oracle_agreement(psi):
    disagreements = []
    violated = sampled_hits = 0
    corpus = _corpus(psi)
    for k, (name, f) in enumerate(corpus):
        verdict = check_subadditive(f).holds
        hit = IntegerSampler(f.breakpoints, f.values).find_violation(10 ** 5, seed=k)
        violated += not verdict
        if hit is not None:
            sampled_hits += 1
            assert scan_delta(f.breakpoints, f.values, *hit) < 0
            if verdict:
                disagreements.append(name)
    record(8, "oracle agreement", len(corpus) == 20 and not disagreements,
           f"20 functions x 10^5 sampled pairs, vertex scan rejects {violated}, sampling finds {sampled_hits}, "
           f"disagreements {disagreements}")


def test_ac9_mutation_sensitivity(psi):
    missed, unreproducible, total = [], 0, 0
    for i in range(6):
        f = psi[i]
        for k in range(1, len(f.breakpoints) - 1):
            total += 1
            g = bump(f, k, F(1, 1000))
            r = check_minimal(g, HALF)
            if r.holds or not r.witnesses:
                missed.append((i, k))
                continue
            for w in r.witnesses:
                lhs, rhs = reproduce(w, g, HALF)
                broken = lhs < rhs if w.kind is WitnessKind.SUBADDITIVITY_PAIR else lhs != rhs
                if (lhs, rhs) != (w.lhs, w.rhs) or not broken:
                    unreproducible += 1
    record(9, "mutation sensitivity", not missed and not unreproducible,
           f"{total} single-breakpoint raises by 1/1000 on psi_0..psi_5, undetected {missed}, "
           f"unreproducible witnesses {unreproducible}")


def test_ac10_serialization(psi):
    bad = []
    for i in range(11):
        text = dumps_function(psi[i])
        g = loads_function(text)
        r = _facet_reports.get(i) or check_two_slope_facet(psi[i], HALF)
        r2 = check_two_slope_facet(g, HALF)
        if not (g == psi[i] and dumps_function(g) == text and r2.dumps() == r.dumps()
                and r2.holds == r.holds):
            bad.append(i)
    record(10, "serialization", not bad, f"i=0..10 round trips, byte or verdict mismatches {bad}")
