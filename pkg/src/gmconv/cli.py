"""
Command-line interface: ``gmconv group-info | analyze | check | train``.

Results go to stdout as JSON, CSV or text; telemetry goes to stderr. Exit code
0 means success, 1 a failed property suite, 2 an input or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import sys
from collections.abc import Sequence
from dataclasses import asdict
from pathlib import Path
from typing import Any

import numpy as np

from gmconv.checks import SUITE_ALIASES, SUITES, CheckOptions, dump_counterexamples, run_suite
from gmconv.displacement import (
    BoundMode,
    ClassDimensionReport,
    ClassMode,
    check_class_dimensions,
    check_distance_bounds,
    displacement_dimension,
    displacement_of,
    distance_to_gm,
    ldr_class_basis,
    span_dimension,
)
from gmconv.exceptions import ConfigError, GMConvError
from gmconv.experiment import load_experiment, run_experiment
from gmconv.group_spec import parse_group
from gmconv.groups import FiniteGroup, make_cyclic, word_ball
from gmconv.matio import json_default, read_matrix
from gmconv.matrices import group_diagonal
from gmconv.telemetry import ConsoleSink, Recorder, set_recorder

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_ERROR = 2

# M kron M has |G|^2 rows; larger groups need an explicit partner matrix.
KRONECKER_SELF_MAX_ORDER = 32


def _emit(payload: dict[str, Any], fmt: str, rows: list[dict[str, Any]] | None = None) -> None:
    """Print ``payload`` as JSON or text; CSV prints ``rows`` (or the flat payload)."""
    if fmt == "json":
        print(json.dumps(payload, indent=2, default=json_default))
    elif fmt == "csv":
        rows = rows or [{k: v for k, v in payload.items() if not isinstance(v, dict | list)}]
        writer = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    else:
        for key, value in payload.items():
            if isinstance(value, dict | list):
                value = json.dumps(value, default=json_default)
            print(f"{key}: {value}")


def group_info(G: FiniteGroup) -> dict[str, Any]:
    """Order, generators, word-distance histogram and ball sizes of ``G``."""
    histogram = np.bincount(G.word_dist, minlength=G.diameter + 1)
    return {
        "group": G.name,
        "order": G.order,
        "abelian": G.is_abelian,
        "generators": [G.label(g) for g in G.generators],
        "diameter": G.diameter,
        "distance_histogram": [int(c) for c in histogram],
        "ball_sizes": G.ball_sizes(),
    }


def _class_basis(G: FiniteGroup, name: str) -> list[np.ndarray]:
    if name == "gm":
        return [group_diagonal(G, g).to_dense() for g in G.elements()]
    kind, _, rank = name.partition(":")
    if kind != "ldr" or not rank.isdigit():
        raise ConfigError(f"unknown class {name!r}; use gm or ldr:r")
    positions = word_ball(G, G.diameter)[: int(rank)]
    return ldr_class_basis(G, positions)


def _class_entry(report: ClassDimensionReport) -> dict[str, Any]:
    entry = asdict(report)
    entry["mode"] = str(report.mode)
    return entry


def analyze_matrix(
    M: np.ndarray,
    G: FiniteGroup,
    classes: Sequence[str],
    other_group: FiniteGroup | None = None,
    other_matrix: np.ndarray | None = None,
) -> dict[str, Any]:
    """
    Distance from the group matrices, projection coefficients, displacement rank,
    and the dimension of each declared class with M's membership in it.

    The distance bounds pair M with itself (transpose, product) and with a second
    matrix over ``other_group`` (kronecker; M itself over G when none is given).
    The class bounds cover each declared class transposed and combined with the
    group matrices of ``other_group``, plus the sum of every pair of classes.
    """
    H = other_group or make_cyclic(2)
    distance = distance_to_gm(M, G)
    displacement = displacement_of(M, G)
    report: dict[str, Any] = {
        "group": G.name,
        "other": H.name,
        "distance": distance.distance,
        "coefficients": [float(c) for c in distance.projection.coeffs],
        "displacement_rank": displacement.rank,
        "rank_tol": displacement.rank_tol,
        "classes": {},
        "distance_bounds": {},
        "class_bounds": {},
    }
    bases = {name: _class_basis(G, name) for name in classes}
    for name, basis in bases.items():
        span = span_dimension(basis)
        report["classes"][name] = {
            "dim_D": displacement_dimension(basis, G),
            "span": span,
            "contains_matrix": span_dimension([*basis, M]) == span,
        }

    for mode, other in ((BoundMode.TRANSPOSE, None), (BoundMode.PRODUCT, M)):
        check = check_distance_bounds(M, other, G, mode)
        report["distance_bounds"][str(mode)] = asdict(check) | {"mode": str(mode)}
    partner, partner_group = (other_matrix, H) if other_matrix is not None else (M, G)
    if other_matrix is None and G.order > KRONECKER_SELF_MAX_ORDER:
        kron: dict[str, Any] = {
            "skipped": f"M kron M needs |G| <= {KRONECKER_SELF_MAX_ORDER}; pass --other-matrix"
        }
    else:
        check = check_distance_bounds(M, partner, G, BoundMode.KRONECKER, partner_group)
        kron = asdict(check) | {"mode": "kronecker", "partner_group": partner_group.name}
    report["distance_bounds"]["kronecker"] = kron

    gm_h = _class_basis(H, "gm")
    for name, basis in bases.items():
        report["class_bounds"][name] = {
            "transpose": _class_entry(check_class_dimensions(ClassMode.TRANSPOSE, basis, G)),
            "kronecker": _class_entry(
                check_class_dimensions(ClassMode.KRONECKER, basis, G, gm_h, H)
            ),
        }
    for first, second in itertools.combinations(bases, 2):
        summed = check_class_dimensions(ClassMode.SUM, bases[first], G, bases[second])
        report["class_bounds"][f"{first}+{second}"] = {"sum": _class_entry(summed)}
    return report


def cmd_group_info(args: argparse.Namespace) -> int:
    info = group_info(parse_group(args.group))
    rows = [{"k": k, "ball_size": n} for k, n in enumerate(info["ball_sizes"])]
    _emit(info, args.format, rows)
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    G = parse_group(args.group)
    other = parse_group(args.other) if args.other else None
    partner = read_matrix(args.other_matrix) if args.other_matrix else None
    report = analyze_matrix(read_matrix(args.matrix), G, args.classes or ["gm"], other, partner)
    _emit(report, args.format)
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    options = CheckOptions(
        trials=args.trials,
        seed=args.seed,
        other=parse_group(args.other) if args.other else None,
        window=args.window,
        radius=args.radius,
        lattice_dim=args.lattice_dim,
    )
    result = run_suite(args.suite, parse_group(args.group), options)
    summary = result.summary()
    if not result.passed:
        written = dump_counterexamples(result, args.out)
        summary["counterexamples"] = [str(path.parent) for path in written]
    _emit(summary, args.format)
    return EXIT_OK if result.passed else EXIT_CHECK_FAILED


def cmd_train(args: argparse.Namespace) -> int:
    config = load_experiment(args.config).with_overrides(seed=args.seed, output_dir=args.out)
    report = run_experiment(config)
    rows = [{"name": report["name"], **report["final"]}]
    _emit(report, args.format, rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gmconv", description="Group-matrix convolutions and displacement analysis"
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv", "text"], default="json")
    subparsers = parser.add_subparsers(dest="command", required=True)

    info = subparsers.add_parser(
        "group-info", parents=[common], help="Order, generators and word balls of a group."
    )
    info.add_argument("--group", required=True, help="Group spec such as C8, D4, C4xC4, C3:inv:C2.")
    info.set_defaults(handler=cmd_group_info)

    analyze = subparsers.add_parser(
        "analyze", parents=[common], help="Displacement report for a matrix file."
    )
    analyze.add_argument("matrix", type=Path, help="CSV or GMAT matrix file.")
    analyze.add_argument("--group", required=True)
    analyze.add_argument(
        "--class",
        dest="classes",
        action="append",
        help="Class to measure: gm or ldr:r (repeatable).",
    )
    analyze.add_argument("--other", help="Second group for the Kronecker bounds (default C2).")
    analyze.add_argument(
        "--other-matrix",
        type=Path,
        help="Kronecker partner matrix over --other (default: the matrix itself).",
    )
    analyze.set_defaults(handler=cmd_analyze)

    check = subparsers.add_parser(
        "check", parents=[common], help="Run a randomized property suite."
    )
    check.add_argument("suite", choices=sorted([*SUITES, *SUITE_ALIASES]))
    check.add_argument("--group", default="C8")
    check.add_argument("--other", help="Second group for Kronecker checks (default C2).")
    check.add_argument("--trials", type=int, default=1000)
    check.add_argument("--seed", type=int, default=0)
    check.add_argument("--out", type=Path, default=Path("counterexamples"))
    check.add_argument("--window", type=int, default=8, help="Lattice window side (padding suite).")
    check.add_argument("--radius", type=int, default=1, help="Kernel radius (padding suite).")
    check.add_argument("--lattice-dim", type=int, choices=[1, 2], default=1)
    check.set_defaults(handler=cmd_check)

    train = subparsers.add_parser(
        "train", parents=[common], help="Train a network from an experiment config."
    )
    train.add_argument("config", type=Path)
    train.add_argument("--seed", type=int, default=None)
    train.add_argument("--out", type=Path, default=None)
    train.set_defaults(handler=cmd_train)
    return parser


def _cli_recorder() -> Recorder:
    """Environment-configured recorder with the console pinned to stderr."""
    recorder = Recorder()
    for sink in recorder.sinks:
        if isinstance(sink, ConsoleSink):
            sink.stream = sys.stderr
    return recorder


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        recorder = _cli_recorder()
    except ConfigError as exc:
        print(f"gmconv: {exc}", file=sys.stderr)
        return EXIT_ERROR
    set_recorder(recorder)
    try:
        with recorder:
            try:
                return args.handler(args)
            except GMConvError as exc:
                recorder.log_exception(f"{args.command} failed", exc, {"command": args.command})
                print(f"gmconv: {exc}", file=sys.stderr)
                return EXIT_ERROR
    finally:
        set_recorder(None)


if __name__ == "__main__":
    raise SystemExit(main())
