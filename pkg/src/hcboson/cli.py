"""Command line entry point: ``hcboson run|sweep|fit|resume``.

Exit codes: 0 success, 1 usage or config error, 2 integrity failure,
3 non-convergence.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import analysis, config as cfgmod, scenarios
from .errors import CapacityError, ConfigError, ConvergenceError, EngineDomainError, IntegrityError, QuenchError
from .observables import melt_time, series_from_csv

EXIT_OK, EXIT_USAGE, EXIT_INTEGRITY, EXIT_CONVERGENCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _window(text):
    try:
        a, b = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must be 'a,b', got {text!r}") from None
    if not a < b:
        raise argparse.ArgumentTypeError(f"window needs a < b, got {text!r}")
    return (a, b)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hcboson", description="Sudden-expansion simulator for hard-core bosons.")
    p.add_argument("-q", "--quiet", action="store_true", help="only print errors")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run one mi-expansion or gs-quench config")
    r.add_argument("config")
    r.add_argument("--stop-at", type=float, default=None, help="stop (with a checkpoint) at this time")

    s = sub.add_parser("sweep", help="run every point of a sweep config and aggregate")
    s.add_argument("config")

    f = sub.add_parser("fit", help="refit a series CSV and print a key = value report")
    f.add_argument("csv")
    f.add_argument("--window", type=_window, default=None, help="fit window 'a,b' (default: from the CSV header)")
    f.add_argument("--threshold", type=float, default=None, help="melt-time density threshold")

    c = sub.add_parser("resume", help="continue a run from its checkpoint")
    c.add_argument("checkpoint")
    c.add_argument("--stop-at", type=float, default=None)
    return p


def _print_report(rep: dict, path=None):
    if path:
        print(f"report = {path}")
    for k, v in rep.items():
        print(f"{k} = {scenarios._fmt(v)}")


def _cmd_run(args):
    cfg = cfgmod.load(args.config)
    if cfg.scenario == "sweep":
        raise ConfigError("this is a sweep config; use 'hcboson sweep'")
    res = scenarios.run_scenario(cfg, stop_at=args.stop_at)
    _print_report(res.report, res.report_path)
    return EXIT_OK


def _cmd_resume(args):
    res = scenarios.resume(args.checkpoint, stop_at=args.stop_at)
    _print_report(res.report, res.report_path)
    return EXIT_OK


def _cmd_sweep(args):
    cfg = cfgmod.load(args.config)
    if cfg.scenario != "sweep":
        raise ConfigError("'hcboson sweep' needs scenario = \"sweep\"")
    res = scenarios.run_sweep(cfg)
    _print_report(res.report, res.report_path)
    if not res.partial:
        return EXIT_OK
    for row in res.points:
        if row["status"] != "ok":
            logging.error("point L=%d N=%d W=%g: %s %s", row["L"], row["N"], row["W"], row["status"], row["error"])
    return EXIT_CONVERGENCE if res.failures == {"non-convergence"} else EXIT_INTEGRITY


def _cmd_fit(args):
    try:
        series = series_from_csv(args.csv)
    except (OSError, ValueError, IndexError) as exc:
        raise ConfigError(f"cannot read series {args.csv}: {exc}") from None
    cfg = cfgmod.from_header(series.meta)
    window = args.window or (cfg.fit_window if cfg else (2.0, 10.0))
    threshold = args.threshold or (cfg.melt_threshold if cfg else 0.5)
    rep = {"source": args.csv}
    rep.update(scenarios.fit_report(series, window))
    if rep.get("velocity") is None:
        raise analysis.FitError(rep["fit_error"])
    rep["melt_threshold"] = threshold
    rep["melt_time"] = melt_time(series, threshold)
    _print_report(rep)
    return EXIT_OK


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "fit": _cmd_fit, "resume": _cmd_resume}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"hcboson: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.ERROR if args.quiet else logging.INFO,
        format="hcboson: %(levelname)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, CapacityError, EngineDomainError, analysis.FitError) as exc:
        print(f"hcboson: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IntegrityError, QuenchError) as exc:
        print(f"hcboson: integrity failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except ConvergenceError as exc:
        print(f"hcboson: not converged: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
