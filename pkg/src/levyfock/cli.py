"""
Command line entry point.

Subcommands write one table each to the output directory::

    levyfock coeffs      coeffs.csv      n, aₙ, bₙ
    levyfock quadrature  quadrature.csv  i, node sᵢ, weight wᵢ
    levyfock gram        gram.csv        composition α, weight n(α), size |α|, K_α
    levyfock moments     moments.csv     vacuum moments in both representations and the oracle
    levyfock verify      verify.json     property suite report (and moments.csv)

Exit codes: 0 on success, 1 if a check or a moment comparison fails, 2 on an invalid config.

The image of the n-th level of the extended Fock space under the unitary map onto the
symmetric Fock space is not the n-particle subspace; only vacuum moments are compared.
"""

import argparse
import csv
import logging
import sys
from collections.abc import Iterable, Sequence
from pathlib import Path

from levyfock import __version__
from levyfock.config import ExperimentConfig, parse_config, validate, with_overrides
from levyfock.constants import CSV_PRECISION
from levyfock.exceptions import ConfigError, LevyFockError
from levyfock.experiment import Experiment
from levyfock.settings import configure_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2


def _format(value: float) -> str:
    return f"{value:.{CSV_PRECISION}g}"


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format(cell) if isinstance(cell, float) else cell for cell in row])
    logger.info("Wrote %s", path)


def cmd_coeffs(experiment: Experiment, out: Path) -> int:
    _write_csv(out / "coeffs.csv", ("n", "a_n", "b_n"), experiment.coefficient_table())
    return EXIT_OK


def cmd_quadrature(experiment: Experiment, out: Path) -> int:
    quadrature = experiment.quadrature()
    rows = ((i, s, w) for i, (s, w) in enumerate(quadrature.pairs()))
    _write_csv(out / "quadrature.csv", ("i", "node", "weight"), rows)
    return EXIT_OK


def cmd_gram(experiment: Experiment, out: Path) -> int:
    rows = ((str(alpha), alpha.weight, alpha.size, k) for alpha, k in experiment.gram_table())
    _write_csv(out / "gram.csv", ("composition", "weight", "size", "k_alpha"), rows)
    return EXIT_OK


def _write_moments(experiment: Experiment, out: Path) -> bool:
    table = experiment.moment_table()
    rows = (
        (name, r.order, r.extended, r.standard, r.oracle, r.max_rel_deviation)
        for name, reports in table.items()
        for r in reports
    )
    header = ("function", "k", "extended_fock", "standard_fock", "cumulant_oracle", "max_rel_deviation")
    _write_csv(out / "moments.csv", header, rows)
    tolerances = experiment.config.tolerances
    return all(r.agrees(tolerances) for reports in table.values() for r in reports)


def cmd_moments(experiment: Experiment, out: Path) -> int:
    agree = _write_moments(experiment, out)
    print(f"moments: {'agree' if agree else 'DISAGREE'} up to order {experiment.n_max}")
    return EXIT_OK if agree else EXIT_CHECK_FAILED


def cmd_verify(experiment: Experiment, out: Path) -> int:
    report = experiment.verify()
    path = out / "verify.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.to_json() + "\n", encoding="utf-8")
    logger.info("Wrote %s", path)
    _write_moments(experiment, out)
    failed = report.failures
    print(f"verify: {len(report.checks) - len(failed)}/{len(report.checks)} checks passed")
    for check in failed:
        print(f"  FAILED {check.name}: deviation {check.deviation:.3e} > {check.threshold:.1e}")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


COMMANDS = {
    "coeffs": (cmd_coeffs, "recurrence coefficients of the jump measure"),
    "quadrature": (cmd_quadrature, "Gauss nodes and weights of the truncated Jacobi matrix"),
    "gram": (cmd_gram, "composition weights of the extended Fock scalar product"),
    "moments": (cmd_moments, "vacuum moments in both representations and from cumulants"),
    "verify": (cmd_verify, "run the property suite"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="XML experiment config")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--levels", type=int, help="Fock level truncation n_max")
    common.add_argument("--jacobi-trunc", type=int, help="number N of recurrence levels")
    common.add_argument("--ell-trunc", type=int, help="ℓ₂ truncation K")
    common.add_argument("--tol", type=float, help="relative tolerance")
    common.add_argument("--seed", type=int, help="seed of random test functions and trials")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug output")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings only")

    parser = argparse.ArgumentParser(
        prog="levyfock", description="Jacobi fields of Lévy processes in truncated Fock spaces."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        subparsers.add_parser(name, parents=[common], help=help_text)
    return parser


def _load(args: argparse.Namespace) -> ExperimentConfig:
    config = parse_config(args.config) if args.config is not None else validate(ExperimentConfig())
    return with_overrides(
        config,
        levels=args.levels,
        jacobi=args.jacobi_trunc,
        ell=args.ell_trunc,
        relative=args.tol,
        seed=args.seed,
        output_dir=args.out,
    )


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        configure_logging(logging.DEBUG)
    elif args.quiet:
        configure_logging(logging.WARNING)
    else:
        configure_logging(logging.INFO)

    try:
        config = _load(args)
        experiment = Experiment(config)
    except ConfigError as e:
        logger.error("Invalid config: %s", e)
        return EXIT_CONFIG_ERROR
    except OSError as e:
        logger.error("Cannot read config: %s", e)
        return EXIT_CONFIG_ERROR
    except LevyFockError as e:
        logger.error("%s", e)
        return EXIT_CONFIG_ERROR

    command, _ = COMMANDS[args.command]
    try:
        return command(experiment, config.output_dir)
    except LevyFockError as e:
        logger.error("%s", e)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
