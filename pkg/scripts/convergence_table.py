"""Measured sup|psi_n - psi_(n+1)| against the bound C / 2^n, and the
density gap of the negative-slope set against gamma_n / 2^n.

    python scripts/convergence_table.py --depth 12
"""
from __future__ import annotations

import argparse
from dataclasses import dataclass
from fractions import Fraction

from gjfacet import convergence_constant, density_gap, gamma_i, ladder, sup_diff_at_breakpoints
from gjfacet.construct import EpsilonSchedule
from gjfacet.rational import parse_rational


@dataclass
class TableConfig:
    alpha: Fraction = Fraction(1, 2)
    base: Fraction = Fraction(1, 2)
    ratio: Fraction = Fraction(1, 4)
    depth: int = 12


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    q = lambda s: parse_rational(s, strict=False)  # noqa: E731
    p.add_argument("--alpha", type=q, default=TableConfig.alpha)
    p.add_argument("--base", type=q, default=TableConfig.base)
    p.add_argument("--ratio", type=q, default=TableConfig.ratio)
    p.add_argument("--depth", type=int, default=TableConfig.depth)
    a = p.parse_args()
    cfg = TableConfig(a.alpha, a.base, a.ratio, a.depth)
    s = EpsilonSchedule.geometric(cfg.alpha, cfg.base, cfg.ratio)
    C = convergence_constant(s)
    fs = ladder(s, cfg.depth)
    print(f"C = {C}")
    print(f"{'n':>3} {'sup diff':>14} {'C/2^n':>14} {'ratio':>7} {'gap':>14} {'gamma_n/2^n':>14}")
    for n in range(cfg.depth):
        d = sup_diff_at_breakpoints(fs[n], fs[n + 1])
        bound = C / 2 ** n
        gap = density_gap(n, s)
        print(f"{n:>3} {float(d):>14.6e} {float(bound):>14.6e} {float(d / bound):>7.4f} "
              f"{float(gap):>14.6e} {float(gamma_i(s, n) / 2 ** n):>14.6e}")


if __name__ == "__main__":
    main()
