"""Command-line interface.

Subcommands: ``run`` (Monte Carlo replicates of one configuration),
``table`` (re-run the published table), ``bounds`` (evaluate the
sample-complexity calculators), ``verify`` (event-probability checks).
Exit codes: 0 success, 1 validation/usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import bounds as bounds_mod
from . import harness
from .errors import DomainError
from .families import parse_family
from .reservoirs import parse_reservoir


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with code 2
        raise _UsageError(f"{message}\n{self.format_usage()}")


_DEFAULTS = {
    "reservoir": "beta:1,1,0.95",
    "family": "bernoulli",
    "alpha": 0.05,
    "epsilon": 0.05,
    "delta": 0.05,
    "gamma": 1.2,
    "k1": 12.5,
    "runs": 100,
    "seed": 0,
    "max_samples": 10_000_000,
    "format": "csv",
    "jobs": 1,
    "trials": 10_000,
    "run_trials": 0,
}


def _add_common(parser: _Parser, *names: str) -> None:
    specs = {
        "reservoir": (str, "reservoir spec: beta:a,b[,cap] | discrete:t1;t2;... | dirac:t0,t1,w | uniform:lo,hi"),
        "family": (str, "family spec: bernoulli | gaussian[:sigma2] | poisson | exponential"),
        "alpha": (float, "top fraction targeted"),
        "epsilon": (float, "mean slack below the top-alpha quantile"),
        "delta": (float, "failure probability budget"),
        "gamma": (float, "exploration-rate exponent (> 1)"),
        "k1": (float, "exploration-rate constant"),
        "runs": (int, "number of replicates"),
        "seed": (int, "master seed"),
        "max_samples": (int, "per-run sampling budget cap"),
        "format": (str, "output format: csv | json"),
        "jobs": (int, "parallel worker processes"),
        "trials": (int, "Monte Carlo initializations for event checks"),
        "run_trials": (int, "full runs for the event-B check (0 to skip)"),
    }
    for name in names:
        typ, help_text = specs[name]
        flag = "--" + name.replace("_", "-")
        kwargs = {"type": typ, "default": None, "help": help_text}
        if name == "format":
            kwargs["choices"] = ("csv", "json")
        parser.add_argument(flag, **kwargs)
    parser.add_argument("--out", type=str, default=None, help="output file (default: stdout)")
    parser.add_argument("--config", type=str, default=None, help="key=value config file; explicit flags win")


def build_parser() -> _Parser:
    parser = _Parser(prog="reservoir-bandits", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_run = sub.add_parser("run", help="run seeded replicates of one configuration")
    _add_common(
        p_run,
        "reservoir", "family", "alpha", "epsilon", "delta", "gamma", "k1",
        "runs", "seed", "max_samples", "format", "jobs",
    )

    p_table = sub.add_parser("table", help="re-run the published table rows")
    _add_common(p_table, "runs", "seed", "max_samples", "format", "jobs")
    p_table.add_argument("--filter", type=str, default=None, help='row filter, e.g. "Beta(1,1)"')

    p_bounds = sub.add_parser("bounds", help="evaluate the sample-complexity bounds")
    _add_common(p_bounds, "reservoir", "family", "alpha", "epsilon", "delta", "gamma", "k1")

    p_verify = sub.add_parser("verify", help="Monte Carlo event-probability checks")
    _add_common(
        p_verify,
        "reservoir", "family", "alpha", "epsilon", "delta", "gamma", "k1",
        "seed", "trials", "run_trials", "max_samples",
    )
    return parser


def _load_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise DomainError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise DomainError(f"{path}:{lineno}: expected key=value, got {line!r}")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _resolve(args: argparse.Namespace, name: str):
    """Precedence: explicit flag, then config file, then built-in default."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    file_values = getattr(args, "_file_values", {})
    if name in file_values:
        caster = type(_DEFAULTS[name]) if name in _DEFAULTS else str
        return caster(file_values[name])
    return _DEFAULTS.get(name)


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_run(args) -> int:
    cfg = harness.ExperimentConfig(
        reservoir=_resolve(args, "reservoir"),
        family=_resolve(args, "family"),
        alpha=_resolve(args, "alpha"),
        epsilon=_resolve(args, "epsilon"),
        delta=_resolve(args, "delta"),
        gamma=_resolve(args, "gamma"),
        k1=_resolve(args, "k1"),
        runs=_resolve(args, "runs"),
        master_seed=_resolve(args, "seed"),
        max_samples=_resolve(args, "max_samples"),
        output_format=_resolve(args, "format"),
        jobs=_resolve(args, "jobs"),
    )
    summary, records = harness.run_experiment(cfg)
    if cfg.output_format == "json":
        _emit(harness.experiment_to_json(cfg, summary, records), args.out)
    else:
        _emit(harness.records_to_csv(records), args.out)
    return 0


def _cmd_table(args) -> int:
    rows = harness.reproduce_table(
        row_filter=args.filter,
        runs=_resolve(args, "runs"),
        master_seed=_resolve(args, "seed"),
        jobs=_resolve(args, "jobs"),
        max_samples=_resolve(args, "max_samples"),
    )
    if _resolve(args, "format") == "json":
        _emit(json.dumps([r.to_dict() for r in rows], indent=2) + "\n", args.out)
    else:
        _emit(harness.summaries_to_csv(rows), args.out)
    return 0


def _cmd_bounds(args) -> int:
    report = bounds_mod.compare_report(
        parse_reservoir(_resolve(args, "reservoir")),
        parse_family(_resolve(args, "family")),
        alpha=_resolve(args, "alpha"),
        epsilon=_resolve(args, "epsilon"),
        delta=_resolve(args, "delta"),
        gamma=_resolve(args, "gamma"),
        k1=_resolve(args, "k1"),
    )
    _emit(json.dumps(report.to_dict(), indent=2) + "\n", args.out)
    return 0


def _cmd_verify(args) -> int:
    cfg = harness.ExperimentConfig(
        reservoir=_resolve(args, "reservoir"),
        family=_resolve(args, "family"),
        alpha=_resolve(args, "alpha"),
        epsilon=_resolve(args, "epsilon"),
        delta=_resolve(args, "delta"),
        gamma=_resolve(args, "gamma"),
        k1=_resolve(args, "k1"),
        master_seed=_resolve(args, "seed"),
        max_samples=_resolve(args, "max_samples"),
    )
    report = harness.verify_events(cfg, trials=_resolve(args, "trials"), run_trials=_resolve(args, "run_trials"))
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "table": _cmd_table,
    "bounds": _cmd_bounds,
    "verify": _cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            args._file_values = _load_config_file(args.config)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except Exception as exc:  # runtime failure (including output I/O)
        sys.stderr.write(f"runtime error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
