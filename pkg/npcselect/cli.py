from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, NoReturn, Optional, Sequence

from . import documents
from .barycenter import DEFAULT_MAX_ITERS, DEFAULT_TOL, center_of_mass
from .errors import (ConvergenceError, GeometryError, InputError, InvalidPointError,
                     UnresolvedClassificationError)
from .horosphere import (DEFAULT_CLASSIFY_TOL, DEFAULT_HORIZON, DEFAULT_SNAP_TOL, SelectOptions, classify_body,
                         first_horosphere, select)
from .lipschitz import (DEFAULT_EPSILON, DEFAULT_SAMPLES, DEFAULT_SCAN_TOL, LipschitzReport, ScanParams,
                        mass_shift_scan, point_shift_scan, selector_scan)
from .spaces import EuclideanSpace, HyperbolicSpace, Space
from .state import BarycenterResult, IdealPoint

logger = logging.getLogger(__name__)

SEED_ENV = "NPCSELECT_SEED"
COMMANDS = ("barycenter", "select", "classify", "scan-shift", "scan-mass", "scan-selector")
SCAN_COMMANDS = {"scan-shift", "scan-mass", "scan-selector"}
FORMATS = ("json", "csv")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERIC = 2


@dataclass(frozen=True)
class RunConfig:
    command: str
    space: Space
    input: Optional[Path] = None
    ideal_file: Optional[Path] = None
    format: str = "json"
    output: Optional[Path] = None
    seed: int = 0
    tol: float = DEFAULT_TOL
    max_iters: int = DEFAULT_MAX_ITERS
    samples: int = DEFAULT_SAMPLES
    epsilon: float = DEFAULT_EPSILON
    n_points: int = 3
    horizon: float = DEFAULT_HORIZON
    classify_tol: float = DEFAULT_CLASSIFY_TOL
    snap_tol: float = DEFAULT_SNAP_TOL
    smoothing: bool = True
    workers: int = 1

    def select_options(self) -> SelectOptions:
        return SelectOptions(horizon=self.horizon, classify_tol=self.classify_tol, snap_tol=self.snap_tol,
                             smoothing=self.smoothing, tol=self.tol, max_iters=self.max_iters)


class ArgumentParser(argparse.ArgumentParser):
    """
    Reports usage errors as InputError so they map to exit status 1 like any other bad input.
    """

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        raise InputError("arguments", message)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="npcselect",
        description="Barycenters, horosphere selection and Lipschitz scans in nonpositively curved model spaces.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  npcselect barycenter --space euclidean --dim 2 --input tri.json --tol 1e-8
  npcselect select --space-file tree.json --input body.json
  npcselect scan-shift --space hyperbolic --dim 2 --samples 500 --seed 7 --format csv --output shift.csv
        """,
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on standard error")

    space = parser.add_argument_group("space")
    space.add_argument("--space", choices=("euclidean", "hyperbolic"), help="inline space kind")
    space.add_argument("--dim", type=int, default=2, help="inline space dimension (default: 2)")
    space.add_argument("--space-file", type=Path, help="JSON space document (required for trees)")

    files = parser.add_argument_group("input and output")
    files.add_argument("--input", type=Path, help="JSON configuration or body document")
    files.add_argument("--ideal-file", type=Path, help="JSON ideal point document")
    files.add_argument("--format", choices=FORMATS, default="json")
    files.add_argument("--output", type=Path, help="write the artifact here instead of standard output")

    numeric = parser.add_argument_group("numerics")
    numeric.add_argument("--seed", type=int, default=None, help=f"base seed (default: ${SEED_ENV} or 0)")
    numeric.add_argument("--tol", type=float, default=None,
                         help=f"barycenter tolerance (default: {DEFAULT_TOL:g}, scans {DEFAULT_SCAN_TOL:g})")
    numeric.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    numeric.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    numeric.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, help="perturbation size")
    numeric.add_argument("--n-points", type=int, default=3, help="points per sampled configuration or body")
    numeric.add_argument("--horizon", type=float, default=DEFAULT_HORIZON, help="last ray probe time")
    numeric.add_argument("--classify-tol", type=float, default=DEFAULT_CLASSIFY_TOL)
    numeric.add_argument("--snap-tol", type=float, default=DEFAULT_SNAP_TOL)
    numeric.add_argument("--no-smoothing", dest="smoothing", action="store_false",
                         help="do not snap selections onto nearby branch vertices")
    numeric.add_argument("--workers", type=int, default=1, help="scan worker threads")
    return parser


def read_document(path: Path, field: str) -> Any:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise InputError(field, f"cannot read {path}: {err.strerror}") from err
    return documents.loads(text, field)


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError as err:
        raise InputError(SEED_ENV, f"expected an integer, got {raw!r}") from err


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.space_file is not None:
        space = documents.space_from_document(read_document(args.space_file, "space-file"))
    elif args.space == "euclidean":
        space = EuclideanSpace(args.dim)
    elif args.space == "hyperbolic":
        space = HyperbolicSpace(args.dim)
    else:
        raise InputError("space", "give --space euclidean|hyperbolic or --space-file")
    if args.command not in SCAN_COMMANDS and args.input is None:
        raise InputError("input", f"{args.command} needs --input")
    tol = args.tol if args.tol is not None else (DEFAULT_SCAN_TOL if args.command in SCAN_COMMANDS else DEFAULT_TOL)
    return RunConfig(
        command=args.command, space=space, input=args.input, ideal_file=args.ideal_file, format=args.format,
        output=args.output, seed=args.seed if args.seed is not None else default_seed(), tol=tol,
        max_iters=args.max_iters, samples=args.samples, epsilon=args.epsilon, n_points=args.n_points,
        horizon=args.horizon, classify_tol=args.classify_tol, snap_tol=args.snap_tol, smoothing=args.smoothing,
        workers=args.workers,
    )


def emit_trace(space: Space, result: BarycenterResult, fmt: str) -> str:
    if fmt == "csv":
        return documents.rows_to_csv(documents.trace_rows(result))
    return documents.dumps(documents.result_to_document(space, result))


def emit_report(report: LipschitzReport, fmt: str) -> str:
    if fmt == "csv":
        return documents.rows_to_csv(documents.report_rows(report))
    return documents.dumps(documents.report_to_document(report))


def write_artifact(config: RunConfig, text: str, summary: str) -> None:
    if config.output is None:
        sys.stdout.write(text)
        return
    try:
        config.output.write_text(text, encoding="utf-8")
    except OSError as err:
        raise InputError("output", f"cannot write {config.output}: {err.strerror}") from err
    print(summary)


def _ideal(config: RunConfig, inline: Optional[IdealPoint]) -> IdealPoint:
    if config.ideal_file is not None:
        return documents.ideal_from_document(config.space, read_document(config.ideal_file, "ideal-file"))
    if inline is not None:
        return inline
    return config.space.default_ideal()


def _json_only(config: RunConfig) -> None:
    if config.format != "json":
        raise InputError("format", f"{config.command} only emits json")


def run_barycenter(config: RunConfig) -> int:
    assert config.input is not None
    space = config.space
    X = documents.configuration_from_document(space, read_document(config.input, "input"))
    try:
        result = center_of_mass(space, X, config.tol, config.max_iters)
    except ConvergenceError as err:
        if err.result is not None:
            write_artifact(config, emit_trace(space, err.result, config.format), f"not converged: {err}")
        raise
    write_artifact(config, emit_trace(space, result, config.format),
                   f"center {documents.point_to_document(space, result.center)} "
                   f"after {result.iterations} iterations")
    return EXIT_OK


def run_select(config: RunConfig) -> int:
    assert config.input is not None
    _json_only(config)
    space = config.space
    body, inline = documents.body_from_document(space, read_document(config.input, "input"))
    xi = _ideal(config, inline)
    o = space.basepoint()
    chosen = select(space, body, xi, o, config.select_options())
    point = documents.point_to_document(space, chosen)
    write_artifact(config, documents.dumps({"selected": point}), f"selected {point}")
    return EXIT_OK


def run_classify(config: RunConfig) -> int:
    assert config.input is not None
    _json_only(config)
    space = config.space
    body, inline = documents.body_from_document(space, read_document(config.input, "input"))
    xi = _ideal(config, inline)
    o = space.basepoint()
    level, contact = first_horosphere(space, body, xi, o)
    shrink = classify_body(space, body, xi, config.horizon, config.classify_tol, o)
    doc = {
        "verdict": shrink.verdict.value,
        "max_limit_separation": shrink.max_limit_separation,
        "probe_horizon": shrink.probe_horizon,
        "level": level.level,
        "contact": [documents.point_to_document(space, g) for g in contact],
    }
    write_artifact(config, documents.dumps(doc), f"{shrink.verdict.value} "
                                                 f"(max limit separation {shrink.max_limit_separation:.3e})")
    return EXIT_OK


def run_scan(config: RunConfig) -> int:
    ideal = None
    if config.command == "scan-selector":
        ideal = _ideal(config, None)
    params = ScanParams(space=config.space, n_points=config.n_points, samples=config.samples,
                        epsilon=config.epsilon, seed=config.seed, tol=config.tol, max_iters=config.max_iters,
                        smoothing=config.smoothing, ideal=ideal, snap_tol=config.snap_tol, horizon=config.horizon,
                        classify_tol=config.classify_tol, workers=config.workers)
    scan = {"scan-shift": point_shift_scan, "scan-mass": mass_shift_scan, "scan-selector": selector_scan}
    report = scan[config.command](params)
    write_artifact(config, emit_report(report, config.format), report.summary())
    return EXIT_OK


def run(config: RunConfig) -> int:
    """
    Executes one command and returns the exit status: 0 on success, 1 on bad input and 2 when the numerics
    gave up (non-convergence or an unresolved classification).
    """
    handlers = {"barycenter": run_barycenter, "select": run_select, "classify": run_classify}
    handler = handlers.get(config.command, run_scan)
    try:
        return handler(config)
    except (InputError, InvalidPointError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except (ConvergenceError, UnresolvedClassificationError, GeometryError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERIC


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        config = config_from_args(args)
    except (InputError, InvalidPointError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    logger.debug("running %s in %r", config.command, config.space)
    return run(config)
