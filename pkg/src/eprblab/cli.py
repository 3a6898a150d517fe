"""Command line: ``eprblab run | analyze | oracle``.

Exit codes: 0 success, 1 configuration or argument error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, analysis, oracles
from .config import build_run_config, config_digest, load_config
from .core import validate_log
from .logfile import LogFormatError, read_log, write_log
from .runner import ConfigError, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 1, 2


class DataError(Exception):
    pass


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _load_valid_log(path):
    try:
        log = read_log(path)
    except OSError as exc:
        raise DataError(f"cannot read log {path}: {exc.strerror}") from None
    except LogFormatError as exc:
        raise DataError(str(exc)) from None
    problems = validate_log(log)
    if problems:
        raise DataError(f"invalid log {path}: {problems[0]}" + (f" (+{len(problems) - 1} more)" if len(problems) > 1 else ""))
    return log


def cmd_run(args) -> int:
    resolved = load_config(args.config, args.override, seed=args.seed)
    cfg = build_run_config(resolved)
    log = run_experiment(cfg, workers=args.workers)
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path, side_path = write_log(log, out_dir / f"{args.name}.csv")
    manifest_path = out_dir / f"{args.name}.manifest.json"
    manifest = {
        "config_digest": config_digest(resolved),
        "tool_version": __version__,
        "seed": cfg.seed,
        "workers": args.workers,
        "resolved_config": resolved,
        "outputs": {"log": str(csv_path), "sidecar": str(side_path), "manifest": str(manifest_path)},
    }
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _emit(manifest)
    return EXIT_OK


def cmd_analyze(args) -> int:
    log = _load_valid_log(args.log)
    try:
        report = analysis.analysis_report(log, window=args.window, eq3=args.eq3)
    except analysis.MissingDelayError as exc:
        raise DataError(f"cannot apply coincidence window: {exc}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    _emit(report)
    return EXIT_OK


def oracle_report(args) -> dict:
    name = args.oracle
    if name in ("bell-bound", "eq3-bound"):
        rep = oracles.enumerate_bell_bound() if name == "bell-bound" else oracles.enumerate_eq3_bound()
        return {
            "oracle": name,
            "max": rep.max_value,
            "min": rep.min_value,
            "variables": list(rep.variables),
            "attaining": [list(a) for a in rep.attaining_assignments],
            "minimizing": [list(a) for a in rep.minimizing_assignments],
            "evaluated": rep.evaluated,
        }
    if name == "count":
        if args.model == "independent":
            if len(args.values) != 3:
                raise ConfigError("count independent takes N_ab N_ac N_bc")
            rep = oracles.count_reachable_independent(*args.values, exhaustive=not args.formula_only)
        else:
            if len(args.values) != 1:
                raise ConfigError("count counterfactual takes M")
            rep = oracles.count_reachable_counterfactual(args.values[0], four_setting=args.four_setting)
        return {
            "oracle": "count",
            "model": rep.model,
            "exact_count": rep.exact_count,
            "formula_value": rep.formula_value,
            "independent_count": rep.independent_count,
            "strict_subset": rep.strict_subset,
            "bounds_satisfied": rep.bounds_satisfied,
            "reachable": None if rep.reachable is None else sorted(list(r) for r in rep.reachable),
        }
    if name == "feasibility":
        try:
            res = oracles.boole_feasibility(*args.correlations)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        witness = None
        if res.witness is not None:
            witness = {",".join(f"{x:+d}" for x in atom): str(w) for atom, w in res.witness.items()}
        return {
            "oracle": "feasibility",
            "correlations": [str(oracles.exact(e)) for e in args.correlations],
            "feasible": res.feasible,
            "closed_form_feasible": res.closed_form,
            "conditions": [str(c) for c in res.conditions],
            "witness": witness,
        }
    log = _load_valid_log(args.log)
    if log.M < 1:
        raise DataError("prob-space needs a log with at least one trial")
    masses = oracles.product_space_impossible_mass(log)
    return {
        "oracle": "prob-space",
        "M": log.M,
        "impossible_mass": {side: {"fraction": str(m), "value": float(m)} for side, m in masses.items()},
    }


def cmd_oracle(args) -> int:
    try:
        report = oracle_report(args)
    except oracles.CapExceeded as exc:
        raise ConfigError(f"enumeration cap exceeded: {exc}") from None
    _emit(report)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _global_flags(parser: argparse.ArgumentParser, default) -> None:
    parser.add_argument("--seed", type=int, default=default(None), help="override the configured seed")
    parser.add_argument("--workers", type=int, default=default(1), help="parallel trial generation")
    parser.add_argument("--output-dir", default=default("."), help="where run writes its files")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eprblab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, lambda v: v)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, lambda v: argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="simulate an experiment and write its log")
    run.add_argument("config", help="INI run configuration")
    run.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                     help="override a config value, e.g. trials=1000 or settings.b=45")
    run.add_argument("--name", default="run", help="basename of the written files")
    run.set_defaults(func=cmd_run)

    an = sub.add_parser("analyze", parents=[common], help="statistics of a CSV log as JSON")
    an.add_argument("log")
    an.add_argument("--window", type=float, default=None, help="coincidence window, in delay units")
    an.add_argument("--eq3", action="store_true", help="include the time-indexed triple scan")
    an.set_defaults(func=cmd_analyze)

    orc = sub.add_parser("oracle", parents=[common], help="exact combinatorial checks")
    osub = orc.add_subparsers(dest="oracle", required=True)
    osub.add_parser("bell-bound", help="extrema of the three-setting combination")
    osub.add_parser("eq3-bound", help="extrema with six time-indexed variables")
    count = osub.add_parser("count", help="reachable pair-sum vectors")
    count.add_argument("model", choices=["independent", "counterfactual"])
    count.add_argument("values", type=int, nargs="+", help="N_ab N_ac N_bc, or M")
    count.add_argument("--four-setting", action="store_true")
    count.add_argument("--formula-only", action="store_true")
    feas = osub.add_parser("feasibility", help="joint distribution for three pair correlations")
    feas.add_argument("correlations", type=float, nargs=3, metavar="E")
    ps = osub.add_parser("prob-space", help="product-measure mass of impossible (setting, tick) events")
    ps.add_argument("log")
    orc.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.workers < 1:
        parser.error("--workers must be >= 1")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"eprblab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"eprblab: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
