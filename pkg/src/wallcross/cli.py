"""Batch front end: delta tables, derivations, wall enumeration, crossing sums.

Subcommands::

    delta     print a difference term (published table or derived)
    derive    run one derivation pipeline, optionally with a staged trace
    walls     enumerate the walls a configured period segment crosses
    cross     full chamber-difference report (JSON, optional TSV)
    selftest  run the acceptance checks and print the erratum report

Exit codes: 0 success, 2 input error, 3 degenerate chamber, 4 selftest
failure.  Every rational in machine-readable output is exact.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .closed_forms import (
    SOURCE_DERIVED,
    SOURCE_PAPER,
    UnsupportedLevelError,
    closed_form_delta,
    printed_form,
)
from .config import ConfigError, RunOptions, apply_env_overrides, load_config
from .errata import build_erratum_report
from .geometry import (
    DIAGONAL,
    MATCHING_SUM,
    PERMUTATION_SUM,
    ArityError,
    GeometryError,
    ppoly_eval,
    ppoly_str,
)
from .instanton_link import EquivariantOptions
from .pipelines import (
    DerivationTrace,
    ParameterError,
    assemble_delta_r2,
    derive_r1,
    derive_r2_lower,
    derive_r2_upper,
)
from .walls import (
    DegenerateChamberError,
    WallError,
    chamber_difference,
    enumerate_walls,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_SELFTEST = 4

DISPLAY_CONVENTIONS = (PERMUTATION_SUM, MATCHING_SUM, DIAGONAL)


def _print_symform(form, convention: str, p_plus=None) -> None:
    meta = (
        f"r={form.r} d={form.d} l={form.l} m={form.m} "
        f"alpha^2={form.alpha_sq} obstruction={form.obstruction}"
    )
    print(meta)
    for k in form.q_powers():
        poly = form.coefficient_as(k, convention)
        if p_plus is None:
            text = ppoly_str(poly)
        else:
            text = str(ppoly_eval(poly, p_plus))
        print(f"  q^{k} alpha^{form.m - 2 * k}: {text}")
    if not form.q_powers():
        print("  0")


def cmd_delta(args) -> int:
    obstruction = args.obstruction
    form = closed_form_delta(args.r, args.d, args.l, obstruction, args.source)
    p_plus = Fraction(args.p_plus) if args.p_plus is not None else None
    _print_symform(form, args.display, p_plus)
    if args.source == SOURCE_PAPER:
        print("published display (verbatim slots):")
        for line in printed_form(args.r, args.d, args.l, obstruction).lines():
            print(f"  {line}")
    return EXIT_OK


def cmd_derive(args) -> int:
    trace = DerivationTrace() if args.emit_trace else None
    options = EquivariantOptions(kr_sign=args.kr_sign, cap_relation=args.cap_relation)
    if args.stratum == "r1":
        form = derive_r1(args.d, args.l, args.obstruction, trace=trace)
    elif args.stratum == "r2-upper":
        form = derive_r2_upper(args.d, args.l, args.obstruction, trace=trace)
    elif args.stratum == "r2-lower":
        form = derive_r2_lower(args.d, args.l, args.obstruction, options, trace=trace)
    else:
        form = assemble_delta_r2(args.d, args.l, args.obstruction, options)
    if trace is not None:
        print(trace.render())
    _print_symform(form, args.display)
    return EXIT_OK


def _load(args):
    config = load_config(args.config)
    options = apply_env_overrides(config.options)
    return config.problem, options


def cmd_walls(args) -> int:
    problem, options = _load(args)
    walls = enumerate_walls(problem, options.r_max)
    print(f"p1={problem.p1} d={problem.d} walls_crossed={len(walls)}")
    for wall in walls:
        tag = "" if wall.supported else "  [r=0: unsupported]"
        print(
            f"  alpha={wall.alpha} r={wall.r} alpha^2={wall.alpha_sq} "
            f"epsilon={wall.epsilon}{tag}"
        )
    return EXIT_OK


def cmd_cross(args) -> int:
    problem, options = _load(args)
    report = chamber_difference(
        problem,
        r_max=options.r_max,
        convention=options.convention,
        source=options.source,
        epsilon_rule=options.epsilon_rule,
    )
    payload = json.dumps(report.to_dict(), indent=2, sort_keys=True)
    if args.json is not None:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)
    if args.tsv is not None:
        with open(args.tsv, "w", encoding="utf-8") as fh:
            fh.write("\n".join(report.tsv_lines()) + "\n")
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_all

    options = apply_env_overrides(RunOptions())
    results = run_all(options)
    failed = 0
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        if not result.passed:
            failed += 1
        print(f"{status} {result.name}: {result.detail}")
    print()
    for line in build_erratum_report().lines():
        print(line)
    if failed:
        print(f"\n{failed} of {len(results)} checks failed")
        return EXIT_SELFTEST
    print(f"\nall {len(results)} checks passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wallcross",
        description="Exact wall-crossing difference-term calculator (b+ = 1).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    delta = sub.add_parser("delta", help="print a difference term")
    delta.add_argument("--r", type=int, required=True, help="level (1 or 2)")
    delta.add_argument("--d", type=int, required=True)
    delta.add_argument("--l", type=int, default=0)
    delta.add_argument("--obstruction", action="store_true")
    delta.add_argument(
        "--source", choices=(SOURCE_PAPER, SOURCE_DERIVED), default=SOURCE_DERIVED
    )
    delta.add_argument("--display", choices=DISPLAY_CONVENTIONS, default=PERMUTATION_SUM)
    delta.add_argument("--p-plus", dest="p_plus", help="substitute a rational for p_plus")
    delta.set_defaults(fn=cmd_delta)

    derive = sub.add_parser("derive", help="run one derivation pipeline")
    derive.add_argument(
        "--stratum", choices=("r1", "r2-upper", "r2-lower", "r2"), required=True
    )
    derive.add_argument("--d", type=int, required=True)
    derive.add_argument("--l", type=int, default=0)
    derive.add_argument("--obstruction", action="store_true")
    derive.add_argument("--emit-trace", action="store_true")
    derive.add_argument("--display", choices=DISPLAY_CONVENTIONS, default=PERMUTATION_SUM)
    derive.add_argument("--kr-sign", choices=("plus", "minus"), default="plus")
    derive.add_argument("--cap-relation", choices=("default", "alt"), default="default")
    derive.set_defaults(fn=cmd_derive)

    walls = sub.add_parser("walls", help="enumerate crossed walls")
    walls.add_argument("--config", required=True)
    walls.set_defaults(fn=cmd_walls)

    cross = sub.add_parser("cross", help="chamber-difference report")
    cross.add_argument("--config", required=True)
    cross.add_argument("--json", help="write the JSON report to this path")
    cross.add_argument("--tsv", help="write a TSV summary to this path")
    cross.set_defaults(fn=cmd_cross)

    selftest = sub.add_parser("selftest", help="run the acceptance checks")
    selftest.set_defaults(fn=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except DegenerateChamberError as exc:
        print(f"degenerate chamber: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (
        ConfigError,
        ParameterError,
        UnsupportedLevelError,
        ArityError,
        GeometryError,
        WallError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
