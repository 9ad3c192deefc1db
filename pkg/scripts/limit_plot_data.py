"""Plot data for psi_0..psi_k and the limit psi, one CSV per curve.

Writes psi_<i>.csv (exact breakpoints, so a plotter draws the function
exactly) and limit.csv (sample midpoints of exact values or enclosures,
plus the enclosure bounds).

    python scripts/limit_plot_data.py --out plots --depths 0 1 2 3 --samples 2049
"""
from __future__ import annotations

import argparse
import csv
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from gjfacet import build, eval_limit
from gjfacet.construct import EpsilonSchedule
from gjfacet.rational import parse_rational


@dataclass
class PlotConfig:
    alpha: Fraction = Fraction(1, 2)
    base: Fraction = Fraction(1, 2)
    ratio: Fraction = Fraction(1, 4)
    depths: list[int] = field(default_factory=lambda: [0, 1, 2, 3])
    samples: int = 2049
    tol: Fraction = Fraction(1, 10 ** 6)
    out: Path = Path("plots")


def write(cfg: PlotConfig) -> list[Path]:
    schedule = EpsilonSchedule.geometric(cfg.alpha, cfg.base, cfg.ratio)
    cfg.out.mkdir(parents=True, exist_ok=True)
    written = []
    for i in cfg.depths:
        f = build(schedule, i)
        path = cfg.out / f"psi_{i}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y"])
            w.writerows((float(b), float(v)) for b, v in zip(f.breakpoints, f.values))
        written.append(path)
    path = cfg.out / "limit.csv"
    exact = 0
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "lower", "upper", "exact"])
        for k in range(cfg.samples):
            x = Fraction(k, cfg.samples - 1)
            e = eval_limit(x, cfg.tol, schedule)
            if e.is_exact:
                exact += 1
                lo = hi = e.value
            else:
                lo, hi = e.lower, e.upper
            w.writerow([float(x), float((lo + hi) / 2), float(lo), float(hi), int(e.is_exact)])
    written.append(path)
    print(f"limit: {exact}/{cfg.samples} samples exact, the rest within {float(cfg.tol):g}")
    return written


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    q = lambda s: parse_rational(s, strict=False)  # noqa: E731
    p.add_argument("--alpha", type=q, default=PlotConfig.alpha)
    p.add_argument("--base", type=q, default=PlotConfig.base)
    p.add_argument("--ratio", type=q, default=PlotConfig.ratio)
    p.add_argument("--depths", type=int, nargs="+", default=[0, 1, 2, 3])
    p.add_argument("--samples", type=int, default=PlotConfig.samples)
    p.add_argument("--tol", type=q, default=PlotConfig.tol)
    p.add_argument("--out", type=Path, default=PlotConfig.out)
    a = p.parse_args()
    for path in write(PlotConfig(a.alpha, a.base, a.ratio, a.depths, a.samples, a.tol, a.out)):
        print(path)


if __name__ == "__main__":
    main()
