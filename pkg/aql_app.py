"""
Adaptive Q-Learning - Command Line
==================================
Sub-commands:
    run             --config PATH [--seed N] [--out DIR]
    sweep           --config PATH --param NAME --values v1,v2,... [--out DIR] [--workers N]
    oracle          --config PATH [--resolution M] --out FILE
    check           --run DIR [--size-constant C]
    dump-partition  --run DIR --step H [--csv FILE]

Exit codes: 0 success, 1 failed check, 2 invalid input or protocol error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from harness import settings

settings.fix_console_encoding()

from core.errors import AdaptiveQLError, InvalidInputError
from core.partition import partition_frame
from harness.audit import RunAuditor, load_partitions
from harness.config import load_config, parse_sweep_values, with_overrides
from harness.oracle import compute_oracle
from harness.runner import build_environment, run_experiment, sweep

logger = logging.getLogger("aql_app")


# =============================================================================
# Commands
# =============================================================================

def cmd_run(args: argparse.Namespace) -> int:
    cfg = with_overrides(load_config(args.config), seed=args.seed)
    record = run_experiment(cfg, out_dir=args.out)
    print(json.dumps(record.summary(), indent=2))
    print(f"[OK] artifacts in {record.output_dir}")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    values = parse_sweep_values(args.param, args.values)
    records = sweep(cfg, args.param, values, out_root=args.out, workers=args.workers)
    print(f"[OK] {len(records)}/{len(values)} runs completed")
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    m = args.resolution or settings.oracle_resolution()
    oracle = compute_oracle(build_environment(cfg), cfg.H, m, settings.quadrature_nodes())
    path = oracle.save(args.out)
    print(f"[OK] oracle (H={cfg.H}, m={m}) saved to {path}")
    return 0


def cmd_check(args: argparse.Namespace) -> int:
    auditor = RunAuditor(args.run, size_constant=args.size_constant)
    return 0 if auditor.run() else 1


def cmd_dump_partition(args: argparse.Namespace) -> int:
    trees = {tree.step: tree for tree in load_partitions(args.run)}
    if args.step not in trees:
        raise InvalidInputError(f"no partition dump for step {args.step} in {args.run}")
    tree = trees[args.step]
    if args.csv:
        partition_frame(tree).to_csv(args.csv, index=False, float_format="%.17g")
        print(f"[OK] {tree.leaf_count} leaves written to {args.csv}")
    else:
        print(json.dumps(tree.to_records(), indent=2))
    return 0


# =============================================================================
# Entry point
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aql_app", description="Adaptive Q-Learning experiment harness.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run one experiment.")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--seed", type=int, default=None, help="Override the config seed.")
    run.add_argument("--out", type=Path, default=None, help="Run directory.")
    run.set_defaults(func=cmd_run)

    sw = sub.add_parser("sweep", help="Repeat a run over values of one parameter.")
    sw.add_argument("--config", required=True, type=Path)
    sw.add_argument("--param", required=True)
    sw.add_argument("--values", required=True, help="Comma-separated values (may be empty).")
    sw.add_argument("--out", type=Path, default=None, help="Sweep root directory.")
    sw.add_argument("--workers", type=int, default=None, help="Process pool size (default AQL_WORKERS).")
    sw.set_defaults(func=cmd_sweep)

    orc = sub.add_parser("oracle", help="Compute the value-iteration oracle.")
    orc.add_argument("--config", required=True, type=Path)
    orc.add_argument("--resolution", type=int, default=None)
    orc.add_argument("--out", required=True, type=Path)
    orc.set_defaults(func=cmd_oracle)

    chk = sub.add_parser("check", help="Audit a run directory.")
    chk.add_argument("--run", required=True, type=Path)
    chk.add_argument("--size-constant", type=float, default=None,
                     help="Constant C for the partition-size condition (skipped when omitted).")
    chk.set_defaults(func=cmd_check)

    dump = sub.add_parser("dump-partition", help="Print one step's partition.")
    dump.add_argument("--run", required=True, type=Path)
    dump.add_argument("--step", required=True, type=int)
    dump.add_argument("--csv", type=Path, default=None, help="Write a leaf table instead of JSON.")
    dump.set_defaults(func=cmd_dump_partition)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    settings.configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AdaptiveQLError as e:
        print(f"[ERROR] {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
