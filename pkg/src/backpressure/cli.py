"""Command line entry point: ``bpsim {run,sweep,mobility,lemma1}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, load_config
from .experiments import (
    MOBILITY_COLUMNS,
    SWEEP_COLUMNS,
    ExperimentConfig,
    mobility_experiment,
    run_sweep,
    single_run,
)
from .lemma1 import lemma1_check
from .simulation import KNOWN_SCHEMES, ContractViolation

RUN_COLUMNS = ["scheme", "nodes", "packets", "delivered", "mean_delay", "delivery_rate"]
LEMMA_COLUMNS = ["check", "passed"]


def _fmt(v):
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return v


def render(rows, columns, fmt: str, extra: dict | None = None) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in columns])
        return buf.getvalue()
    doc = {"columns": columns, "rows": [{c: r[c] for c in columns} for r in rows]}
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=1, allow_nan=True) + "\n"


def write_output(text: str, out: str | None) -> None:
    """Write to ``out`` atomically (or stdout); never leaves a partial file."""
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _config(args, default: ExperimentConfig) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else default
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def cmd_run(args) -> int:
    default = ExperimentConfig(nodes=[30], networks=1, realizations=1, schemes=list(KNOWN_SCHEMES))
    cfg = _config(args, default)
    rows, traces = single_run(cfg, trace=args.trace)
    extra = {"records": traces} if args.trace else None
    write_output(render(rows, RUN_COLUMNS, args.format, extra), args.out)
    return 0


def cmd_sweep(args) -> int:
    cfg = _config(args, ExperimentConfig())
    rows, failures = run_sweep(cfg)
    for f in failures:
        print(f"instance failed: {f}", file=sys.stderr)
    write_output(render(rows, SWEEP_COLUMNS, args.format, {"failures": failures}), args.out)
    return 0


def cmd_mobility(args) -> int:
    default = ExperimentConfig(nodes=[100], schemes=["EDR-rbar", "SP-rbar/(xr)"])
    cfg = _config(args, default)
    rows, failures = mobility_experiment(cfg)
    for f in failures:
        print(f"instance failed: {f}", file=sys.stderr)
    write_output(render(rows, MOBILITY_COLUMNS, args.format, {"failures": failures}), args.out)
    return 0


def cmd_lemma1(args) -> int:
    rep = lemma1_check(q=args.q, rate=args.rate)
    rows = [{"check": name, "passed": ok} for name, ok in rep.checks()]
    extra = {
        "biased_moves": rep.biased.moves,
        "unbiased_moves": rep.unbiased.moves,
    }
    write_output(render(rows, LEMMA_COLUMNS, args.format, extra), args.out)
    if args.out is not None:
        for r in rows:
            print(f"{'PASS' if r['passed'] else 'FAIL'}  {r['check']}", file=sys.stderr)
    return 0 if rep.passed else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bpsim", description="Backpressure routing simulator")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", help="YAML experiment config")
            sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")

    sp = sub.add_parser("run", help="all configured schemes on one instance")
    common(sp)
    sp.add_argument("--trace", action="store_true", help="include per-packet records (json)")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="delay/delivery over a grid of network sizes")
    common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("mobility", help="ideal vs neighbour bias maintenance under mobility")
    common(sp)
    sp.set_defaults(func=cmd_mobility)

    sp = sub.add_parser("lemma1", help="four-node last-packets scenario")
    common(sp, config=False)
    sp.add_argument("--q", type=int, default=26, help="packets at the source node")
    sp.add_argument("--rate", type=int, default=26, help="uniform link rate")
    sp.set_defaults(func=cmd_lemma1)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "trace", False) and args.format != "json":
        print("bpsim: --trace needs --format json", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"bpsim: config error: {exc}", file=sys.stderr)
        return 2
    except (ContractViolation, ValueError) as exc:
        print(f"bpsim: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
