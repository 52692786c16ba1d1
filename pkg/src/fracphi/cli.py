"""Command line front end: ``enumerate``, ``check`` and ``simulate``.

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from .errors import Blowup, FracPhiError, NotSubcritical
from .homogeneity import SKNumber

OUTPUT_ENV = "FRACPHI_OUTPUT_DIR"
SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


def _fraction(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational such as 9/10, got {text!r}") from None
    if "." in text or "e" in text.lower():
        raise argparse.ArgumentTypeError(f"give rationals as p/q, not decimals: {text!r}")
    return value


def _cutoff(text: str) -> SKNumber:
    try:
        return SKNumber.parse(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad homogeneity literal {text!r}: {exc}") from None


def _unit_interval(text: str) -> float:
    value = float(_fraction(text))
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"s must lie in (0, 1), got {text}")
    return value


def _destination(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    if not p.is_absolute() and os.environ.get(OUTPUT_ENV):
        p = Path(os.environ[OUTPUT_ENV]) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _emit(text: str, path: str | None) -> None:
    dest = _destination(path)
    if dest is None:
        sys.stdout.write(text)
    else:
        dest.write_text(text)


# ---------------------------------------------------------------- commands


def cmd_enumerate(args: argparse.Namespace) -> int:
    from .export import FIELDS, records_csv, tree_records
    from .rulegen import classify, generate

    ts = generate(args.s, args.cutoff, args.d)
    rows = tree_records(ts, classify(ts))
    if args.format == "csv":
        text = records_csv(rows)
    else:
        payload = {
            "schema": SCHEMA_VERSION,
            "s": str(args.s),
            "d": args.d,
            "cutoff": str(args.cutoff),
            "fields": FIELDS,
            "trees": rows,
        }
        text = json.dumps(payload, indent=1, default=str) + "\n"
    _emit(text, args.output)
    return 0


def _suite_kwargs(name: str, args: argparse.Namespace) -> dict:
    kw: dict = {}
    if args.s is not None and name not in ("symmetry", "alpha"):
        kw["s"] = args.s
    if args.s is not None and name == "alpha":
        kw["s_values"] = (args.s,)
    if args.gamma is not None:
        if name not in ("dpd", "lemma224"):
            raise UsageError(f"--gamma does not apply to suite {name!r}")
        kw["gamma"] = args.gamma
    if name in ("duality", "group", "symmetry", "lemma224"):
        if args.samples is not None:
            kw["samples"] = args.samples
        kw["seed"] = args.seed
    if args.cutoff is not None:
        if name not in ("duality", "coassociativity", "group", "morphism", "alpha", "trivial-action"):
            raise UsageError(f"--cutoff does not apply to suite {name!r}")
        kw["cutoff"] = args.cutoff
    return kw


def cmd_check(args: argparse.Namespace) -> int:
    from .checks import SUITES, run_suite

    names = list(SUITES) if args.suite == "all" else [args.suite]
    ok = True
    for name in names:
        result = run_suite(name, **_suite_kwargs(name, args))
        print(result.render(), flush=True)
        ok &= result.passed
    return 0 if ok else 1


def _cosine_data(amplitude: float, n: int):
    import numpy as np

    from .fracnum import Field

    return Field.from_function(lambda x: amplitude * (1 + 0.5 * np.cos(2 * np.pi * x)), n)


def cmd_simulate(args: argparse.Namespace) -> int:
    import numpy as np

    from .fracnum import Field, bound_check, compare_representations, solve_damped

    if args.fraclap_compare:
        rows = compare_representations(args.s_values or [0.5, 0.6, 0.8], n=args.n, R=args.radius)
        lines = ["s,fourier,singular,bochner"]
        lines += [f"{r['s']:g},{r['fourier']:.3e},{r['singular']:.3e},{r['bochner']:.3e}" for r in rows]
        _emit("\n".join(lines) + "\n", args.output)
        return 0
    s = args.s_values[0] if args.s_values else 0.8
    if args.zero:
        u0 = Field(np.zeros(args.n))
    else:
        u0 = _cosine_data(args.amplitude, args.n)
    g = Field(np.full(args.n, args.forcing)) if args.forcing else None
    traj = solve_damped(u0, g, s, args.T, args.dt, scheme=args.scheme)
    report = bound_check(traj, g)
    header = (f"# s={s:g} A={args.amplitude:g} scheme={traj.scheme} dt={args.dt:g} "
              f"max_ratio={report.max_ratio:.6f} c_star={report.c_star}\n")
    _emit(header + traj.to_csv(g.sup() if g is not None else 0.0), args.output)
    return 0


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    from .checks import SUITES
    from .fracnum import SCHEMES

    parser = argparse.ArgumentParser(prog="fracphi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="list the trees below a homogeneity cutoff")
    p.add_argument("--s", type=_fraction, required=True, help="rational s in (3/4, 1), e.g. 9/10")
    p.add_argument("--cutoff", type=_cutoff, default=SKNumber(0, 2, 0), help='homogeneity literal, default "2s"')
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", help=f"output file (relative paths resolve under ${OUTPUT_ENV})")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("check", help="run a verification suite")
    p.add_argument("--suite", choices=sorted(SUITES) + ["all"], required=True)
    p.add_argument("--s", type=_fraction)
    p.add_argument("--gamma", type=_cutoff)
    p.add_argument("--cutoff", type=_cutoff)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("simulate", help="damped cubic fractional heat flow and Laplacian comparisons")
    p.add_argument("--s", dest="s_values", type=_unit_interval, action="append",
                   help="s in (0, 1); repeat for the comparison table")
    p.add_argument("--amplitude", type=float, default=100.0, help="A in u0 = A (1 + cos(2 pi x) / 2)")
    p.add_argument("--forcing", type=float, default=0.0, help="constant forcing g")
    p.add_argument("--zero", action="store_true", help="start from the zero field")
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=1e-4)
    p.add_argument("--scheme", choices=SCHEMES, default="STRANG")
    p.add_argument("--radius", type=int, default=64, help="truncation radius of the singular route")
    p.add_argument("--fraclap-compare", action="store_true", help="print the three-way error table")
    p.add_argument("--output")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except NotSubcritical as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Blowup as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return 1
    except FracPhiError as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
