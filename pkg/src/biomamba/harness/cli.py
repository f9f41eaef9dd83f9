"""Command-line front door.

    biomamba train --config run.yaml --out runs/copy [--resume ckpt]
    biomamba verify [--suite rtrl|stdp|pruning|all]
    biomamba probe-stdp --config run.yaml --grid=-40,-20,-5,5,20,40
    biomamba report --run runs/copy

Exit codes: 0 success, 1 config error, 2 numeric divergence,
3 verification failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from ..errors import ConfigError, ContractViolation, FormatError
from .config import RunConfig
from .energy import energy_report
from .probe import format_probe, probe_stdp_window
from .train import Diverged, read_metrics, train_online
from .verify import SUITES, TABLE_HEADER, run_suite

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_VERIFY = 0, 1, 2, 3

log = logging.getLogger("biomamba")


def _train(args) -> int:
    cfg = RunConfig.load(args.config)
    result = train_online(cfg, out_dir=args.out, resume=args.resume)
    if result.records:
        last = result.records[-1]
        log.info("finished step %d: loss %.4f accuracy %.4f sparsity %.3f",
                 last.step, last.loss, last.accuracy, last.sparsity)
    print(result.checkpoint)
    return EXIT_OK


def _verify(args) -> int:
    suites = SUITES if args.suite == "all" else (args.suite,)
    print(TABLE_HEADER)
    ok = True
    for suite in suites:
        for res in run_suite(suite):
            print(res.line(), flush=True)
            ok &= res.passed
    return EXIT_OK if ok else EXIT_VERIFY


def _parse_grid(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --grid {text!r}: {exc}") from exc


def _probe(args) -> int:
    cfg = RunConfig.load(args.config)
    try:
        table = probe_stdp_window(cfg.stdp(), cfg.hybrid(), _parse_grid(args.grid), cfg.dt)
    except ContractViolation as exc:
        raise ConfigError(str(exc)) from exc
    text = format_probe(table)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _report(args) -> int:
    path = Path(args.run) / "metrics.csv"
    try:
        summary = energy_report(read_metrics(path))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot summarize {path}: {exc}") from exc
    print(json.dumps(asdict(summary), indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="biomamba", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="run online training")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--resume", default=None, help="checkpoint to continue from")
    p.set_defaults(func=_train)

    p = sub.add_parser("verify", help="run oracle comparison suites")
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.set_defaults(func=_verify)

    p = sub.add_parser("probe-stdp", help="measure dw against spike lag")
    p.add_argument("--config", required=True)
    p.add_argument("--grid", required=True, help="comma-separated lags in ms")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_probe)

    p = sub.add_parser("report", help="energy summary of a finished run")
    p.add_argument("--run", required=True)
    p.set_defaults(func=_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Diverged as exc:
        print(f"diverged: {exc}; diagnostic checkpoint: {exc.checkpoint}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
