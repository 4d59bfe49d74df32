"""Command-line front end: ``prbox box|localpart|verify|snk``.

Exit codes are stable: 0 success, 1 a checked claim failed, 2 usage or invalid input,
3 a result could not be certified.
"""

from __future__ import annotations

import argparse
from collections.abc import Iterator
from collections.abc import Sequence
import contextlib
from dataclasses import dataclass
from dataclasses import replace
from fractions import Fraction
import logging
from pathlib import Path
import sys

from dask.distributed import Client

from prbox import config
from prbox.appendix import snk
from prbox.boxes import FAMILIES
from prbox.boxes import Box
from prbox.boxes import make_family
from prbox.boxes import negative_cell
from prbox.boxes import normalization_violation
from prbox.boxes import signalling_violation
from prbox.boxes import tensor
from prbox.claims import SUITES
from prbox.claims import appendix_claims
from prbox.claims import eq3_claims
from prbox.claims import eq5_claims
from prbox.claims import lemma3_claims
from prbox.claims import lemma_claims
from prbox.config import Settings
from prbox.decompositions import decomposition_from_certificate
from prbox.exceptions import BudgetExceededError
from prbox.exceptions import InvalidInputError
from prbox.exceptions import PRBoxError
from prbox.formats import CERTIFICATE_DIR
from prbox.formats import certificate_name
from prbox.formats import decomposition_report
from prbox.formats import read_box
from prbox.formats import read_certificate
from prbox.formats import snk_report
from prbox.formats import sweep_report
from prbox.formats import write_box
from prbox.formats import write_box_csv
from prbox.formats import write_certificate
from prbox.formats import write_json
from prbox.formats import write_sweep_csv
from prbox.localpart import biased_local_part
from prbox.localpart import local_part
from prbox.localpart import lose_all_cells
from prbox.localpart import lower_bound_isotropic
from prbox.localpart import pairing_lower_bound
from prbox.localpart import upper_bound_isotropic
from prbox.lp import LPProblem
from prbox.lp import verify
from prbox.managers import JobManager
from prbox.managers import create_manager
from prbox.numeric import format_scalar
from prbox.numeric import parse_rational
from prbox.strategies import DEPOLARIZATION_DEFINITION
from prbox.strategies import LocalDetStrategy
from prbox.strategies import max_weight
from prbox.sweep import parse_grid
from prbox.sweep import sweep
from prbox.terminal import Claim
from prbox.terminal import Terminal


_logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CLAIM_FAILED = 1
EXIT_USAGE = 2
EXIT_NOT_CERTIFIED = 3


@dataclass(frozen=True)
class RunConfig:
    """Global flags merged over the environment settings."""

    settings: Settings
    scheduler: str | None = None
    quiet: bool = False
    force: bool = False


def _parameter(args: argparse.Namespace) -> Fraction:
    text = args.delta if args.family == "biased" else args.eps
    if text is None:
        flag = "--delta" if args.family == "biased" else "--eps"
        raise InvalidInputError(f"The {args.family} family needs {flag}.")
    return parse_rational(text)


def _box_from_args(args: argparse.Namespace, run: RunConfig) -> Box:
    if getattr(args, "box", None):
        return read_box(args.box)
    if args.family is None or args.n is None:
        raise InvalidInputError("Give either --box or --family with --n.")
    return make_family(args.family, args.n, _parameter(args), force=run.force)


@contextlib.contextmanager
def _manager(run: RunConfig) -> Iterator[JobManager]:
    if run.scheduler is None:
        with create_manager(run.settings.threads) as manager:
            yield manager
        return
    with Client(run.scheduler) as client:
        yield create_manager(client=client)


def _print(run: RunConfig, text: str) -> None:
    if not run.quiet:
        print(text)


def _cmd_box_make(args: argparse.Namespace, run: RunConfig) -> int:
    box = _box_from_args(args, run)
    out = Path(args.out or f"{args.family}-n{args.n}.json")
    write_box(out, box)
    problem = signalling_violation(box) or normalization_violation(box)
    _print(run, f"wrote {out}")
    if problem is not None:
        _logger.error(f"Self-check failed: {problem}")
        return EXIT_CLAIM_FAILED
    return EXIT_OK


def _cmd_box_check(args: argparse.Namespace, run: RunConfig) -> int:
    box = read_box(args.path)
    signalling = signalling_violation(box)
    normalization = normalization_violation(box)
    negative = negative_cell(box)
    claims = [
        Claim("non-signalling", signalling is None, signalling or ""),
        Claim("normalised", normalization is None, normalization or ""),
        Claim("nonnegative", negative is None, "" if negative is None else str(negative)),
    ]
    return _report(run, f"checks of {args.path}", claims)


def _cmd_box_tensor(args: argparse.Namespace, run: RunConfig) -> int:
    result = tensor(read_box(args.first), read_box(args.second))
    write_box(args.out, result)
    _print(run, f"wrote {args.out}")
    return EXIT_OK


def _cmd_box_export(args: argparse.Namespace, run: RunConfig) -> int:
    out = Path(args.out or Path(args.path).with_suffix(".csv"))
    write_box_csv(out, read_box(args.path))
    _print(run, f"wrote {out}")
    return EXIT_OK


def _cmd_box_weight(args: argparse.Namespace, run: RunConfig) -> int:
    box = read_box(args.path)
    strategy = LocalDetStrategy.parse(args.strategy)
    weight = max_weight(strategy, box, run.settings.probe)
    _print(run, format_scalar(weight))
    return EXIT_OK


def _cmd_localpart_solve(args: argparse.Namespace, run: RunConfig) -> int:
    box = _box_from_args(args, run)
    _logger.info(DEPOLARIZATION_DEFINITION)
    try:
        with _manager(run) as manager:
            fraction, certificate = local_part(
                box, args.mode, manager=manager, budget=run.settings.budget
            )
    except BudgetExceededError as e:
        raise InvalidInputError(str(e)) from e
    out = Path(args.out or "certificate.json")
    write_certificate(out, certificate, box)
    if args.decomposition:
        decomposition = decomposition_from_certificate(certificate, box, name=box.name)
        write_json(args.decomposition, decomposition_report(decomposition))
    if not certificate.certified:
        mass = Fraction(box.mass)  # type: ignore[arg-type]
        upper = "unknown" if certificate.upper_bound is None else certificate.upper_bound / mass
        _print(run, f"{fraction} <= local part <= {upper} (not certified)")
        return EXIT_NOT_CERTIFIED
    _print(run, str(fraction))
    return EXIT_OK


def _cmd_localpart_bounds(args: argparse.Namespace, run: RunConfig) -> int:
    value = _parameter(args)
    n = args.n
    if n is None:
        raise InvalidInputError("Bounds need --n.")
    if args.family == "biased":
        box = make_family("biased", n, value, force=run.force)
        cells = lose_all_cells(box)
        rows = [
            ("local part", format_scalar(biased_local_part(n, value))),
            ("lose-all-rounds mass", format_scalar(cells.mass)),
            ("nonzero lose-all-rounds cells", str(cells.nonzero_cells)),
        ]
    else:
        rows = [
            ("upper bound", format_scalar(upper_bound_isotropic(n, value))),
            ("small-noise lower bound", format_scalar(lower_bound_isotropic(n, value))),
            ("pairing lower bound", format_scalar(pairing_lower_bound(n, value))),
        ]
    for label, text in rows:
        _print(run, f"{label}: {text}")
    return EXIT_OK


def _cmd_localpart_sweep(args: argparse.Namespace, run: RunConfig) -> int:
    grid = parse_grid(args.grid, args.family)
    out = Path(args.out_dir)
    _logger.info(DEPOLARIZATION_DEFINITION)
    with _manager(run) as manager:
        terminal = Terminal(not run.quiet, len(grid), f"Sweeping n={args.n}")
        try:
            result = sweep(
                args.n,
                grid,
                family=args.family,
                mode=args.mode,
                manager=manager,
                budget=run.settings.budget,
                refine=not args.no_refine,
                on_point=terminal.update_progress_bar,
            )
        finally:
            terminal.close_progress_bar()
    for sample in result.samples:
        assert sample.certificate is not None
        box = make_family(args.family, args.n, sample.parameter)
        name = certificate_name(args.family, args.n, sample.parameter)
        write_certificate(out / CERTIFICATE_DIR / name, sample.certificate, box)
    write_sweep_csv(out / "sweep.csv", result)
    write_json(out / "pieces.json", sweep_report(result))
    for index, piece in enumerate(result.pieces):
        _print(run, f"piece {index}: [{piece.lo}, {piece.hi}] {piece.poly}")
    return EXIT_NOT_CERTIFIED if result.excluded else EXIT_OK


def _cmd_localpart_audit(args: argparse.Namespace, run: RunConfig) -> int:
    certificate, box = read_certificate(args.path)
    with _manager(run) as manager:
        check = verify(certificate, LPProblem.local_part(box), manager=manager)
    claims = [Claim("certificate", bool(check), check.message)]
    return _report(run, f"audit of {args.path}", claims)


def _cmd_verify(args: argparse.Namespace, run: RunConfig) -> int:
    _logger.info(DEPOLARIZATION_DEFINITION)
    with _manager(run) as manager:
        if args.suite == "eq3":
            claims = eq3_claims()
        elif args.suite == "eq5":
            claims = eq5_claims()
        elif args.suite == "lemma3":
            claims = lemma3_claims()
        elif args.suite == "appendix":
            claims = appendix_claims(args.n or 2, manager)
        else:
            claims = lemma_claims(
                args.n or 3,
                samples=args.samples,
                seed=run.settings.seed,
                trials=args.trials,
                manager=manager,
            )
    return _report(run, f"verify {args.suite}", claims)


def _cmd_snk(args: argparse.Namespace, run: RunConfig) -> int:
    _logger.info(DEPOLARIZATION_DEFINITION)
    with _manager(run) as manager:
        report = snk(args.n, args.k, manager=manager)
    out = Path(args.out or f"snk-{args.n}-{args.k}.json")
    write_json(out, snk_report(report))
    certificate_path = out.with_name(f"{out.stem}-certificate.json")
    write_certificate(certificate_path, report.certificate, report.snk)
    label = " (exploratory)" if report.exploratory else ""
    _print(run, f"S({args.n},{args.k}){label}: {report.absolute} of mass {report.mass}")
    return EXIT_OK if report.certificate.certified else EXIT_NOT_CERTIFIED


def _report(run: RunConfig, title: str, claims: Sequence[Claim]) -> int:
    if not run.quiet:
        Terminal(False, 0).print_claims(title, claims)
    return EXIT_OK if all(c.passed for c in claims) else EXIT_CLAIM_FAILED


def _add_box_source(parser: argparse.ArgumentParser, with_file: bool) -> None:
    parser.add_argument("--family", choices=FAMILIES, default="isotropic")
    parser.add_argument("--n", type=int)
    parser.add_argument("--eps", help="isotropic noise as an exact rational, e.g. 1/8")
    parser.add_argument("--delta", help="biased noise as an exact rational, e.g. 1/10")
    if with_file:
        parser.add_argument("--box", help="read the box from a JSON file instead")


def _box_parsers(commands: argparse._SubParsersAction) -> None:
    box = commands.add_parser("box", help="build, check and export boxes")
    actions = box.add_subparsers(dest="action", required=True)

    make = actions.add_parser("make", help="write a box as JSON")
    _add_box_source(make, with_file=False)
    make.add_argument("--out")
    make.set_defaults(handler=_cmd_box_make)

    check = actions.add_parser("check", help="check a box file")
    check.add_argument("path")
    check.set_defaults(handler=_cmd_box_check)

    combine = actions.add_parser("tensor", help="tensor product of two box files")
    combine.add_argument("first")
    combine.add_argument("second")
    combine.add_argument("--out", required=True)
    combine.set_defaults(handler=_cmd_box_tensor)

    export = actions.add_parser("export", help="write a box file as plot-ready CSV")
    export.add_argument("path")
    export.add_argument("--out")
    export.set_defaults(handler=_cmd_box_export)

    weight = actions.add_parser("weight", help="largest weight of a strategy in a box")
    weight.add_argument("path")
    weight.add_argument("--strategy", required=True, help='e.g. "[0 0 0 1; 0 0 2 0]"')
    weight.set_defaults(handler=_cmd_box_weight)


def _localpart_parsers(commands: argparse._SubParsersAction) -> None:
    localpart = commands.add_parser("localpart", help="local parts, bounds and sweeps")
    actions = localpart.add_subparsers(dest="action", required=True)

    solve = actions.add_parser("solve", help="certified local part of one box")
    _add_box_source(solve, with_file=True)
    solve.add_argument("--mode", choices=("full", "colgen"), default="colgen")
    solve.add_argument("--out", help="certificate path")
    solve.add_argument("--decomposition", help="also write the local decomposition as JSON")
    solve.set_defaults(handler=_cmd_localpart_solve)

    bounds = actions.add_parser("bounds", help="closed-form envelopes")
    _add_box_source(bounds, with_file=False)
    bounds.set_defaults(handler=_cmd_localpart_bounds)

    scan = actions.add_parser("sweep", help="piecewise polynomial local part along a grid")
    scan.add_argument("--family", choices=FAMILIES, default="isotropic")
    scan.add_argument("--n", type=int, required=True)
    scan.add_argument("--grid", default="1/64", help="step or comma separated points")
    scan.add_argument("--mode", choices=("full", "colgen"), default="colgen")
    scan.add_argument("--out-dir", default="sweep")
    scan.add_argument("--no-refine", action="store_true")
    scan.set_defaults(handler=_cmd_localpart_sweep)

    audit = actions.add_parser("audit", help="re-verify a certificate file")
    audit.add_argument("path")
    audit.set_defaults(handler=_cmd_localpart_audit)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prbox", description="Exact local parts of noisy PR boxes."
    )
    parser.add_argument("--threads", type=int, help="worker processes (PRBOX_THREADS)")
    parser.add_argument("--scheduler", help="address of a Dask scheduler to run jobs on")
    parser.add_argument("--seed", type=int, help="seed for sampling and searches (PRBOX_SEED)")
    parser.add_argument("--budget", type=int, help="enumeration budget (PRBOX_BUDGET)")
    parser.add_argument("--quiet", action="store_true", help="only log warnings")
    parser.add_argument("--force", action="store_true", help="accept parameters out of range")
    commands = parser.add_subparsers(dest="command", required=True)

    _box_parsers(commands)
    _localpart_parsers(commands)

    check = commands.add_parser("verify", help="run a claim suite")
    check.add_argument("suite", choices=SUITES)
    check.add_argument("--n", type=int)
    check.add_argument("--samples", type=int, default=10**6)
    check.add_argument("--trials", type=int, default=200)
    check.set_defaults(handler=_cmd_verify)

    words = commands.add_parser("snk", help="local part of the k-of-n word sum")
    words.add_argument("--n", type=int, required=True)
    words.add_argument("--k", type=int, required=True)
    words.add_argument("--out")
    words.set_defaults(handler=_cmd_snk)
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    settings = Settings.from_env()
    overrides = {
        key: getattr(args, key)
        for key in ("threads", "seed", "budget")
        if getattr(args, key) is not None
    }
    return RunConfig(replace(settings, **overrides), args.scheduler, args.quiet, args.force)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        run = _run_config(args)
        if run.quiet:
            config.set_verbosity(logging.WARNING)
        _logger.info(f"Seed in effect: {run.settings.seed}.")
        return int(args.handler(args, run))
    except InvalidInputError as e:
        _logger.error(str(e))
        return EXIT_USAGE
    except PRBoxError as e:
        _logger.error(f"{type(e).__name__}: {e}")
        return EXIT_CLAIM_FAILED


if __name__ == "__main__":
    sys.exit(main())
