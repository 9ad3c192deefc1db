"""Command-line front end.

Exit codes: 0 success / property holds, 1 property violated, 2 input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import construct, limit, verify
from .errors import GJFacetError
from .pwl import PwlFunction, dumps_function, evaluate, loads_function
from .rational import format_rational, parse_rational

EXIT_OK, EXIT_VIOLATED, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Bad user input; reported with the offending field."""


def _rational(field):
    def parse(text):
        try:
            return parse_rational(text, strict=False)
        except GJFacetError as exc:
            raise argparse.ArgumentTypeError(f"{field}: {exc}") from None
    parse.__name__ = field
    return parse


def _positive_int(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _add_schedule_flags(p):
    g = p.add_argument_group("schedule")
    g.add_argument("--alpha", type=_rational("--alpha"))
    g.add_argument("--geometric", nargs=2, metavar=("BASE", "RATIO"), type=_rational("--geometric"),
                   help="eps_i = BASE * RATIO**i")
    g.add_argument("--epsilons", nargs="+", metavar="EPS", type=_rational("--epsilons"))
    g.add_argument("--schedule", type=Path, help="schedule JSON file")


def _schedule(args) -> construct.EpsilonSchedule:
    if args.schedule is not None:
        if args.geometric or args.epsilons or args.alpha is not None:
            raise InputError("--schedule excludes --alpha/--geometric/--epsilons")
        d = _read_json(args.schedule, "--schedule")
        return construct.EpsilonSchedule.from_dict(d)
    if args.alpha is None:
        raise InputError("--alpha is required (or pass --schedule)")
    if bool(args.geometric) == bool(args.epsilons):
        raise InputError("give exactly one of --geometric BASE RATIO or --epsilons ...")
    if args.geometric:
        return construct.EpsilonSchedule.geometric(args.alpha, *args.geometric)
    return construct.EpsilonSchedule.explicit(args.alpha, args.epsilons)


def _read_json(path: Path, field: str):
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{field}: cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{field}: {path} is not valid JSON: {exc}") from None


def _function(args) -> PwlFunction:
    if getattr(args, "function", None) is not None:
        try:
            text = args.function.read_text()
        except OSError as exc:
            raise InputError(f"--function: cannot read {args.function}: {exc.strerror}") from None
        try:
            return loads_function(text)
        except GJFacetError as exc:
            raise InputError(f"--function: {exc}") from None
    if args.depth is None:
        raise InputError("pass --function FILE or schedule flags with --depth")
    return construct.build(_schedule(args), args.depth)


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def decimal_string(q: Fraction, digits: int) -> str:
    """Round-half-even decimal rendering with a fixed number of places."""
    scaled = round(q * 10 ** digits)
    sign = "-" if scaled < 0 else ""
    scaled = abs(scaled)
    if digits == 0:
        return f"{sign}{scaled}"
    s = str(scaled).rjust(digits + 1, "0")
    return f"{sign}{s[:-digits]}.{s[-digits:]}"


# --- subcommands ---------------------------------------------------------

def cmd_construct(args) -> int:
    f = construct.build(_schedule(args), args.depth)
    _emit(dumps_function(f), args.out)
    return EXIT_OK


_CHECKS = {
    "subadditive": lambda f, fp, a: verify.check_subadditive(f, cap=a.cap, threads=a.threads),
    "symmetric": lambda f, fp, a: verify.check_symmetric(f, fp, cap=a.cap),
    "minimal": lambda f, fp, a: verify.check_minimal(f, fp, cap=a.cap, threads=a.threads),
    "valid": lambda f, fp, a: verify.check_valid(f, fp, cap=a.cap, threads=a.threads),
    "two-slope-facet": lambda f, fp, a: verify.check_two_slope_facet(f, fp, cap=a.cap, threads=a.threads),
}


def cmd_verify(args) -> int:
    f = _function(args)
    fp = args.f
    if fp is None:
        if args.property == "subadditive":
            fp = Fraction(1, 2)
        else:
            raise InputError("--f is required for this property")
    report = _CHECKS[args.property](f, fp, args)
    _emit(report.dumps(), args.out)
    return EXIT_OK if report.holds else EXIT_VIOLATED


def cmd_eval(args) -> int:
    f = _function(args)
    rows = [{"point": format_rational(x), "value": format_rational(evaluate(f, x))} for x in args.x]
    _emit(json.dumps(rows[0] if len(rows) == 1 else rows) + "\n", args.out)
    return EXIT_OK


def cmd_limit(args) -> int:
    schedule = _schedule(args)
    results = [limit.eval_limit(x, args.tol, schedule).to_dict() for x in args.x]
    _emit(json.dumps(results[0] if len(results) == 1 else results) + "\n", args.out)
    return EXIT_OK


def cmd_evidence(args) -> int:
    schedule = _schedule(args)
    d = args.depth
    if args.kind == "structure":
        report = construct.structure_report(construct.build(schedule, d), schedule, d)
    elif args.kind == "recursion":
        report = construct.verify_recursive_decomposition(schedule, d)
    elif args.kind == "non-pwl":
        report = limit.non_pwl_evidence(d, schedule)
    elif args.kind == "facet":
        probes = tuple(args.probe) if args.probe else limit.DEFAULT_PROBES
        report = limit.facet_evidence(d, schedule, probes)
    else:  # density
        gap = limit.density_gap(d, schedule)
        expected = construct.gamma_i(schedule, d) / 2 ** d
        w = [] if gap == expected else [verify.Witness(verify.WitnessKind.QUANTITY, (), gap, expected,
                                                       "density gap")]
        report = verify.VerificationReport(verify.Property.NON_PWL_EVIDENCE, not w, w,
                                           {"depth": d, "density_gap": gap,
                                            "segment_count": len(limit.negative_segments(d, schedule))})
    _emit(report.dumps(), args.out)
    return EXIT_OK if report.holds else EXIT_VIOLATED


def cmd_export(args) -> int:
    if args.format == "json":
        _emit(dumps_function(_function(args)), args.out)
        return EXIT_OK
    n = args.resolution
    xs = [Fraction(k, n - 1) if n > 1 else Fraction(0) for k in range(n)]
    lines = ["x,y"]
    if args.target == "limit":
        schedule = _schedule(args)
        for x in xs:
            ev = limit.eval_limit(x, args.tol, schedule)
            y = ev.value if ev.is_exact else (ev.lower + ev.upper) / 2
            lines.append(f"{decimal_string(x, args.digits)},{decimal_string(y, args.digits)}")
    else:
        f = _function(args)
        for x in xs:
            y = f.values[-1] if x == 1 else evaluate(f, x)
            lines.append(f"{decimal_string(x, args.digits)},{decimal_string(y, args.digits)}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gjfacet", description=__doc__)
    parser.add_argument("--threads", type=_positive_int, default=None,
                        help="threads for the vertex scan (default: $GJFACET_THREADS or 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build psi_i and write it as JSON")
    _add_schedule_flags(p)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--out", type=Path)
    p.set_defaults(run=cmd_construct)

    p = sub.add_parser("verify", help="check a property of a function")
    p.add_argument("--function", type=Path)
    _add_schedule_flags(p)
    p.add_argument("--depth", type=int)
    p.add_argument("--f", type=_rational("--f"), help="the symmetry point f")
    p.add_argument("--property", choices=sorted(_CHECKS), default="two-slope-facet")
    p.add_argument("--cap", type=_positive_int, default=verify.DEFAULT_WITNESS_CAP)
    p.add_argument("--out", type=Path)
    p.set_defaults(run=cmd_verify)

    p = sub.add_parser("eval", help="evaluate a function exactly")
    p.add_argument("--function", type=Path)
    _add_schedule_flags(p)
    p.add_argument("--depth", type=int)
    p.add_argument("--x", type=_rational("--x"), nargs="+", required=True)
    p.add_argument("--out", type=Path)
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("limit", help="evaluate the limit function")
    _add_schedule_flags(p)
    p.add_argument("--x", type=_rational("--x"), nargs="+", required=True)
    p.add_argument("--tol", type=_rational("--tol"), default=Fraction(1, 10 ** 9))
    p.add_argument("--out", type=Path)
    p.set_defaults(run=cmd_limit)

    p = sub.add_parser("evidence", help="structure, recursion, density, non-PWL and facet evidence")
    _add_schedule_flags(p)
    p.add_argument("--kind", choices=["structure", "recursion", "density", "non-pwl", "facet"], required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--probe", type=_rational("--probe"), nargs="+")
    p.add_argument("--out", type=Path)
    p.set_defaults(run=cmd_evidence)

    p = sub.add_parser("export", help="plot data (CSV) or a serialized function (JSON)")
    p.add_argument("--function", type=Path)
    _add_schedule_flags(p)
    p.add_argument("--depth", type=int)
    p.add_argument("--target", choices=["psi", "limit"], default="psi")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--resolution", type=_positive_int, default=1025)
    p.add_argument("--digits", type=int, default=12)
    p.add_argument("--tol", type=_rational("--tol"), default=Fraction(1, 10 ** 6))
    p.add_argument("--out", type=Path)
    p.set_defaults(run=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_INPUT
    if getattr(args, "tol", None) is not None and args.tol <= 0:
        print("gjfacet: error: --tol must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.run(args)
    except (InputError, GJFacetError, ValueError) as exc:
        print(f"gjfacet: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
