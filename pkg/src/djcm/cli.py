"""``djcm run|validate|sweep`` command-line driver.

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 numeric failure (truncation, convergence, eigensolver).
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys

from . import acceptance, runner
from .errors import ConfigError, DJCMError
from .observables import OBSERVABLE_NAMES
from .runner import RunConfig


def _csv_list(text: str) -> list[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _add_run_options(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--config", metavar="PATH", help="flat JSON object with RunConfig fields")
    ap.add_argument("--out", metavar="DIR", default="djcm-out", help="output directory (default: %(default)s)")
    ap.add_argument("--mode", choices=runner.MODES)
    ap.add_argument("--engine", choices=runner.ENGINES)
    ap.add_argument("--dim", type=int, metavar="N", help="field truncation (default: automatic)")
    for name in ("omega_c", "omega_eg", "g", "zeta", "xi", "omega_0", "beta_re", "beta_im", "phi", "t_max"):
        ap.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float)
    ap.add_argument("--steps", type=int)
    ap.add_argument("--observables", type=_csv_list, metavar="LIST",
                    help=f"comma-separated subset of {', '.join(OBSERVABLE_NAMES)}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="djcm", description="Driven Jaynes-Cummings dynamics")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment and write CSV plus manifest")
    _add_run_options(run)

    sweep = sub.add_parser("sweep", help="repeat a run over values of one parameter")
    _add_run_options(sweep)
    sweep.add_argument("--param", required=True, help=f"one of {', '.join(runner.SWEEPABLE)}")
    sweep.add_argument("--values", required=True, type=_csv_list, help="comma-separated values")
    sweep.add_argument("--jobs", type=int, default=None, metavar="K",
                       help="worker processes (default: $DJCM_JOBS or 1)")

    val = sub.add_parser("validate", help="run the acceptance criteria")
    val.add_argument("--quick", action="store_true", help="skip the two slowest criteria")
    val.add_argument("--dim", type=int, metavar="N", help="force the field truncation")
    return ap


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    overrides = {
        f.name: getattr(args, f.name)
        for f in dataclasses.fields(RunConfig)
        if getattr(args, f.name, None) is not None
    }
    return dataclasses.replace(cfg, **overrides)


def _jobs(args) -> int:
    if args.jobs is not None:
        jobs = args.jobs
    else:
        try:
            jobs = int(os.environ.get("DJCM_JOBS", "1"))
        except ValueError as exc:
            raise ConfigError("DJCM_JOBS must be an integer") from exc
    if jobs < 1:
        raise ConfigError("jobs must be ≥ 1")
    return jobs


def cmd_run(args) -> int:
    manifest = runner.execute(config_from_args(args), args.out)
    print(f"wrote {', '.join(manifest['files'])} and manifest.json to {args.out}")
    return 0


def cmd_sweep(args) -> int:
    try:
        values = [float(v) for v in args.values]
    except ValueError as exc:
        raise ConfigError(f"sweep values must be numbers: {exc}") from exc
    index = runner.sweep(config_from_args(args), args.param, values, args.out, jobs=_jobs(args))
    for entry in index["runs"]:
        print(f"{args.param}={entry['value']:g}: {entry['status']}" + (f" ({entry['error']})" if "error" in entry else ""))
    return 0


def cmd_validate(args) -> int:
    if args.dim is not None and args.dim < 2:
        raise ConfigError("dim must be an integer ≥ 2")
    results = acceptance.run_criteria(quick=args.quick, dim=args.dim, report=lambda r: print(r.line(), flush=True))
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} passed")
    return 1 if failed else 0


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "validate": cmd_validate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (DJCMError, TypeError) as exc:
        if isinstance(exc, TypeError):
            exc = ConfigError(f"invalid config: {exc}")
        print(f"djcm: error: {exc}", file=sys.stderr)
        return runner.exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
