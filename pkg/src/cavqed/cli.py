"""Command-line interface.

Subcommands: run, compare, sweep, derive-effective, list-scenarios.
Exit codes: 0 success, 1 configuration problem, 2 regime-validity
violation (without --force), 3 numerical failure (including a failed
comparison tolerance or a blown-up sweep).
"""

import argparse
import sys

import numpy as np

from .errors import (AmbiguousResonanceError, CavqedError, ConfigurationError,
                     NumericalFailure, RegimeValidityError)
from .runner import (compare_runs, convergence_sweep, derive_effective_report,
                     run_scenario, write_csv)
from .scenarios import describe_scenarios, load_scenario

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_REGIME = 2
EXIT_NUMERICAL = 3


def _exit_code(exc):
    if isinstance(exc, RegimeValidityError):
        return EXIT_REGIME
    if isinstance(exc, (NumericalFailure, AmbiguousResonanceError)):
        return EXIT_NUMERICAL
    return EXIT_CONFIG


def _parser():
    p = argparse.ArgumentParser(
        prog="cavqed",
        description="Driven cavity-QED simulations: engineered effective "
                    "interactions, closed and open dynamics, squeezing "
                    "readout.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="propagate a scenario and write its CSV")
    run.add_argument("--config", required=True,
                     help="built-in scenario name or INI file path")
    run.add_argument("--out", default=None,
                     help="CSV output path (default: <scenario>.csv)")
    run.add_argument("--force", action="store_true",
                     help="downgrade regime-validity violations to warnings")

    cmp_ = sub.add_parser("compare", help="deviation between two run CSVs")
    cmp_.add_argument("--a", required=True, help="first CSV")
    cmp_.add_argument("--b", required=True, help="second CSV")
    cmp_.add_argument("--column", required=True, help="column to compare")
    cmp_.add_argument("--tol", type=float, default=None,
                      help="max relative deviation for PASS/FAIL")

    swp = sub.add_parser("sweep", help="convergence sweep over Fock cutoffs")
    swp.add_argument("--config", required=True)
    swp.add_argument("--cutoffs", required=True,
                     help="comma-separated increasing cutoffs, e.g. 20,25,30")
    swp.add_argument("--tol", type=float, default=1e-5,
                     help="convergence tolerance on endpoint var_x_min")

    der = sub.add_parser("derive-effective",
                         help="numeric second-order generator vs closed form")
    der.add_argument("--config", required=True)
    der.add_argument("--window", type=float, default=200.0,
                     help="averaging window for the residue estimate")

    sub.add_parser("list-scenarios", help="names of the built-in scenarios")
    return p


def _cmd_run(args):
    cfg = load_scenario(args.config)
    result = run_scenario(cfg, force=args.force)
    out = args.out or cfg.output_path or (cfg.name + ".csv")
    write_csv(out, result)
    table = result.table
    tail = np.nanmax(table["tail_weight"])
    print(f"scenario {cfg.name}: {table['time'].size} samples -> {out}")
    print(f"  frame: {result.trajectory.frame}")
    print(f"  max trace error: {np.nanmax(table['trace_error']):.3e}")
    print(f"  max truncation tail: {tail:.3e}")
    print(f"  final var_x_min: {table['var_x_min'][-1]:.6g} "
          f"(degree {table['squeezing_degree'][-1]:.4g}%)")
    for note in result.notes:
        print(f"  note: {note}")
    return EXIT_OK


def _cmd_compare(args):
    report = compare_runs(args.a, args.b, args.column, tol=args.tol)
    print(report.text())
    if report.passed is False:
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_sweep(args):
    cfg = load_scenario(args.config)
    try:
        cutoffs = [int(c) for c in args.cutoffs.split(",") if c.strip()]
    except ValueError:
        raise ConfigurationError(f"bad cutoff list {args.cutoffs!r}") from None
    report = convergence_sweep(cfg, cutoffs, tol=args.tol)
    print(report.text())
    if report.failure:
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_derive(args):
    cfg = load_scenario(args.config)
    try:
        print(derive_effective_report(cfg, window=args.window))
    except AmbiguousResonanceError as exc:
        print(f"ambiguous resonance: {exc}", file=sys.stderr)
        print("guidance: widen --window so that 10/window falls below the "
              "smallest nonzero pair frequency, or adjust detunings away "
              "from near-resonance", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_list(_args):
    for name, description in describe_scenarios():
        print(f"{name:24s} {description}")
    return EXIT_OK


def main(argv=None):
    args = _parser().parse_args(argv)
    handlers = {"run": _cmd_run, "compare": _cmd_compare, "sweep": _cmd_sweep,
                "derive-effective": _cmd_derive, "list-scenarios": _cmd_list}
    try:
        return handlers[args.command](args)
    except CavqedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
