"""Build psi_0..psi_N for a schedule and verify each one.

    python scripts/run_facet_family.py --depth 10
    python scripts/run_facet_family.py --alpha 4/5 --base 4/5 --ratio 1/4 --depth 8 --json family.json
"""
from __future__ import annotations

import argparse
import json
import time
from dataclasses import asdict, dataclass
from fractions import Fraction

from gjfacet import build, check_two_slope_facet, structure_report
from gjfacet.construct import EpsilonSchedule
from gjfacet.rational import format_rational, parse_rational


@dataclass
class FamilyConfig:
    alpha: Fraction = Fraction(1, 2)
    base: Fraction = Fraction(1, 2)
    ratio: Fraction = Fraction(1, 4)
    depth: int = 10
    threads: int = 1


@dataclass
class Row:
    i: int
    breakpoints: int
    vertices: int
    tight: int
    min_delta: str
    slopes: str
    structure: bool
    facet: bool
    seconds: float


def run(cfg: FamilyConfig) -> list[Row]:
    schedule = EpsilonSchedule.geometric(cfg.alpha, cfg.base, cfg.ratio)
    rows = []
    for i in range(cfg.depth + 1):
        t0 = time.perf_counter()
        f = build(schedule, i)
        r = check_two_slope_facet(f, cfg.alpha, threads=cfg.threads)
        sub = r.children[0].children[0]
        rows.append(Row(
            i, len(f.breakpoints), sub.summary["vertex_count"], sub.summary["tight_count"],
            format_rational(sub.summary["min_delta"]),
            f"{format_rational(r.summary.get('slope_min', 0))}, {format_rational(r.summary.get('slope_max', 0))}",
            structure_report(f, schedule, i).holds, r.holds, time.perf_counter() - t0,
        ))
    return rows


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    q = lambda s: parse_rational(s, strict=False)  # noqa: E731
    p.add_argument("--alpha", type=q, default=FamilyConfig.alpha)
    p.add_argument("--base", type=q, default=FamilyConfig.base)
    p.add_argument("--ratio", type=q, default=FamilyConfig.ratio)
    p.add_argument("--depth", type=int, default=FamilyConfig.depth)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--json", help="also write rows to this file")
    a = p.parse_args()
    cfg = FamilyConfig(a.alpha, a.base, a.ratio, a.depth, a.threads)
    rows = run(cfg)
    print(f"{'i':>3} {'bps':>6} {'vertices':>10} {'tight':>8} {'min':>4}  {'slopes':<14} struct facet   time")
    for r in rows:
        print(f"{r.i:>3} {r.breakpoints:>6} {r.vertices:>10} {r.tight:>8} {r.min_delta:>4}  {r.slopes:<14} "
              f"{str(r.structure):<6} {str(r.facet):<6} {r.seconds:6.2f}s")
    if a.json:
        with open(a.json, "w") as fh:
            json.dump({"config": {k: str(v) for k, v in asdict(cfg).items()},
                       "rows": [asdict(r) for r in rows]}, fh, indent=1)


if __name__ == "__main__":
    main()
