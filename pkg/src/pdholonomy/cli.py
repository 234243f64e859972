"""Command line entry point: ``pdholonomy <command> [options]``.

Exit codes: 0 success, 2 usage error, 3 resource budget exceeded,
4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .closure import DEFAULT_MAX_ELEMENTS, DEFAULT_TIMEOUT, ResourceError
from .model import LATTICE, DomainError
from .report import (RunConfig, UsageError, cmd_chain, cmd_decompose, cmd_equilibria, cmd_orbits,
                     cmd_regimes, cmd_table2, to_dot, to_json, to_text)
from .transform import WordError

EXIT_OK, EXIT_USAGE, EXIT_RESOURCE, EXIT_INVARIANT = 0, 2, 3, 4


def _cells(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(c) for c in text.replace(" ", "").split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad cell list {text!r}") from None


def _states(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(LATTICE.parse_state(s) for s in text.replace(" ", "").split(","))
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _range(text: str) -> tuple[str, str]:
    body = text.strip().strip("[]()")
    parts = [p.strip() for p in body.split(",")]
    if len(parts) != 2 or not all(parts):
        raise argparse.ArgumentTypeError(f"range must look like [3,6], got {text!r}")
    return parts[0], parts[1]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdholonomy",
        description="Holonomy decomposition of the 2x3 spatial prisoner's dilemma.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "dot", "text"), default="json")
    common.add_argument("--out", type=Path, help="write output here instead of stdout")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--b", default="7/2", help="temptation to defect, p/q or decimal")
    model.add_argument("--open", dest="open_cells", type=_cells, default=(),
                       help="open cells, e.g. 1,2,3")

    budget = argparse.ArgumentParser(add_help=False)
    budget.add_argument("--max-elements", type=int, default=DEFAULT_MAX_ELEMENTS)
    budget.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT, help="seconds")
    budget.add_argument("--workers", type=int, default=1)
    budget.add_argument("--timing", action="store_true", help="include wall-clock timings")

    p = sub.add_parser("regimes", parents=[common], help="regimes of b over a range")
    p.add_argument("range", nargs="?", type=_range, default=("3", "6"), help="[lo,hi]")

    sub.add_parser("decompose", parents=[common, model, budget], help="full decomposition")

    p = sub.add_parser("table2", parents=[common, budget], help="the nine open-cell layouts")
    p.add_argument("--no-refine", action="store_true", help="skip superset refinement")

    p = sub.add_parser("chain", parents=[common, model], help="subduction chain under t")
    p.add_argument("--exclude", type=_states, default=(), help="states left out, e.g. 63")

    p = sub.add_parser("orbits", parents=[common, model], help="orbits of a word")
    p.add_argument("--word", required=True)
    p.add_argument("--seeds", type=_states, default=())

    sub.add_parser("equilibria", parents=[common, model], help="fixed points of t")
    return parser


def run(args: argparse.Namespace) -> dict:
    cmd = args.command
    if cmd == "regimes":
        return cmd_regimes(*args.range)
    if cmd == "table2":
        return cmd_table2(refine=not args.no_refine, max_elements=args.max_elements,
                          timeout=args.timeout, workers=args.workers, timing=args.timing)
    kwargs = {"b": args.b, "open_cells": args.open_cells}
    if cmd == "decompose":
        kwargs.update(max_elements=args.max_elements, timeout=args.timeout,
                      workers=args.workers, timing=args.timing)
        return cmd_decompose(RunConfig(**kwargs))
    if cmd == "chain":
        return cmd_chain(RunConfig(exclude=args.exclude, **kwargs))
    if cmd == "orbits":
        return cmd_orbits(RunConfig(word=args.word, seeds=args.seeds, **kwargs))
    if cmd == "equilibria":
        return cmd_equilibria(RunConfig(**kwargs))
    raise UsageError(f"unknown command {cmd}")


def render(report: dict, fmt: str) -> str:
    if fmt == "dot":
        return to_dot(report)
    if fmt == "text":
        return to_text(report)
    return to_json(report)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        report = run(args)
        text = render(report, args.format)
    except (UsageError, DomainError, WordError) as exc:
        print(f"pdholonomy: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"pdholonomy: budget exceeded ({exc.limit}): {exc}", file=sys.stderr)
        print(json.dumps(exc.diagnostics, sort_keys=True, default=str), file=sys.stderr)
        return EXIT_RESOURCE
    except AssertionError as exc:
        print(f"pdholonomy: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    if args.out is not None:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
