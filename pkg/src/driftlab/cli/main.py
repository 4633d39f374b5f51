"""Command line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 infeasible experiment. Every failure also prints one structured
``driftlab: error: <class>: <message>`` block to standard error.
"""
from __future__ import annotations

import argparse
import os
import sys

from ..errors import ConfigError, DriftlabError, InfeasibleError, NumericalError
from . import config as cfgmod
from . import runner

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_INFEASIBLE = 4


def exit_code_for(exc: DriftlabError) -> int:
    if isinstance(exc, InfeasibleError):
        return EXIT_INFEASIBLE
    if isinstance(exc, NumericalError):
        return EXIT_NUMERICAL
    return EXIT_CONFIG


def _report_error(exc: Exception) -> None:
    name = type(exc).__name__
    for line in str(exc).splitlines() or [""]:
        print(f"driftlab: error: {name}: {line}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="driftlab",
        description="driven stochastic dynamics experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="TOML experiment file")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            dest="sets",
            help="override a config key (dotted path, repeatable)",
        )
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument(
            "--seed", type=int, default=None, help="master seed override"
        )

    p_run = sub.add_parser("run", help="run an experiment")
    add_common(p_run)
    p_run.add_argument(
        "--workers", type=int, default=1, help="worker thread budget"
    )
    p_run.add_argument(
        "--single-thread",
        action="store_true",
        help="force sequential execution regardless of --workers",
    )

    p_val = sub.add_parser(
        "validate", help="check a config without running anything"
    )
    add_common(p_val)

    sub.add_parser("version", help="print the tool version")
    return parser


def _load(args) -> tuple[cfgmod.ExperimentConfig, list[str], list[str]]:
    raw = cfgmod.load_raw(args.config)
    raw = cfgmod.apply_overrides(raw, args.sets)
    if args.seed is not None:
        raw["seed"] = args.seed
    base_dir = os.path.dirname(os.path.abspath(args.config))
    return cfgmod.resolve_config(raw, base_dir=base_dir)


def cmd_run(args) -> int:
    try:
        cfg, errors, _ = _load(args)
        if errors:
            raise ConfigError("\n".join(errors))
        plan = cfgmod.build_plan(cfg)
        outdir = runner.resolve_outdir(cfg, args.out, args.config)
        workers = 1 if args.single_thread else max(1, args.workers)
        written = runner.execute(cfg, plan, outdir, workers=workers)
    except DriftlabError as exc:
        _report_error(exc)
        return exit_code_for(exc)
    if cfg.verbosity >= 1:
        for warning in cfg.warnings:
            print(f"warning: {warning}")
        for name in written:
            print(f"wrote {os.path.join(outdir, name)}")
    return EXIT_OK


def cmd_validate(args) -> int:
    problems: list[str] = []
    warnings: list[str] = []
    cfg = None
    try:
        cfg, errors, warnings = _load(args)
        problems.extend(errors)
    except DriftlabError as exc:
        problems.extend(str(exc).splitlines())
    if cfg is not None:
        try:
            cfgmod.build_plan(cfg)
        except DriftlabError as exc:
            problems.extend(str(exc).splitlines())
        outdir = runner.resolve_outdir(cfg, args.out, args.config)
        issue = runner.check_outdir_writable(outdir)
        if issue:
            problems.append(issue)
    for warning in warnings:
        print(f"warning: {warning}")
    if problems:
        for line in problems:
            print(f"error: {line}", file=sys.stderr)
        print(f"invalid: {len(problems)} problem(s)", file=sys.stderr)
        return EXIT_CONFIG
    print("OK")
    for line in cfgmod.resolved_lines(cfg):
        print(line)
    return EXIT_OK


def cmd_version() -> int:
    from .. import __version__

    print(f"driftlab {__version__}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    if args.command == "validate":
        return cmd_validate(args)
    return cmd_version()


if __name__ == "__main__":
    sys.exit(main())
