"""
Run Audit
=========
Re-checks a finished run from its artifacts alone: reward table shape and
range, then every partition invariant on the dumped trees. Results are
collected as passed / failed / warnings and saved to <run dir>/audit.json.

``PhasedValidator`` carries the report bookkeeping shared with the
acceptance scripts under scripts/.
"""

import json
import logging
from datetime import datetime
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import pandas as pd

from core.errors import InvalidInputError
from core.invariants import CheckReport, check_blackbox_conditions, check_partition_invariants, check_visit_bounds
from core.metric import SpaceDescriptor
from core.partition import StepPartition
from harness.config import ExperimentConfig, load_config

logger = logging.getLogger(__name__)

REWARD_COLUMNS = ["episode", "reward", "cum_regret"]


def load_partitions(run_dir: Union[str, Path], space: Optional[SpaceDescriptor] = None) -> List[StepPartition]:
    """Rebuild every partition_h{h}.json of a run, ordered by step."""
    run_dir = Path(run_dir)
    space = space or SpaceDescriptor()
    paths = sorted(run_dir.glob("partition_h*.json"), key=lambda p: int(p.stem.split("_h")[1]))
    trees = []
    for path in paths:
        with open(path, "r", encoding="utf-8") as f:
            trees.append(StepPartition.from_records(json.load(f), space))
    return trees


class PhasedValidator:
    """Phase-by-phase validation with a passed / failed / warnings ledger."""

    def __init__(self, verbose: bool = True, **context):
        self.verbose = verbose
        self.validation_results = {
            'timestamp': datetime.now().isoformat(),
            **context,
            'passed': [],
            'failed': [],
            'warnings': [],
            'reports': [],
        }

    def _print(self, message: str = "") -> None:
        if self.verbose:
            print(message)

    def _phase(self, title: str) -> None:
        self._print("\n" + "="*60)
        self._print(title)
        self._print("="*60)

    def passed(self, message: str) -> None:
        self.validation_results['passed'].append(message)
        self._print(f"[OK] {message}")

    def failed(self, message: str) -> None:
        self.validation_results['failed'].append(message)
        self._print(f"[X] {message}")

    def warn(self, message: str) -> None:
        self.validation_results['warnings'].append(message)
        self._print(f"[WARN] {message}")

    def expect(self, condition: bool, message: str) -> bool:
        (self.passed if condition else self.failed)(message)
        return bool(condition)

    def _absorb(self, report: CheckReport) -> None:
        self.validation_results['passed'].extend(f"{report.name}: {m}" for m in report.passed)
        self.validation_results['failed'].extend(f"{report.name}: {m}" for m in report.failed)
        self.validation_results['warnings'].extend(f"{report.name}: {m}" for m in report.warnings)
        self.validation_results['reports'].append(report.to_dict())
        marker = "[OK]" if report.ok else "[X]"
        self._print(f"{marker} {report.name}: {len(report.passed)} passed, {len(report.failed)} failed")
        for failure in report.failed[:5]:
            self._print(f"  - {failure}")

    def generate_report(self, report_path: Path, title: str = "SUMMARY") -> bool:
        self._phase(title)
        passed = len(self.validation_results['passed'])
        failed = len(self.validation_results['failed'])
        warnings = len(self.validation_results['warnings'])
        self._print(f"\n[OK] Passed: {passed}")
        self._print(f"[WARN] Warnings: {warnings}")
        self._print(f"[X] Failed: {failed}")

        report_path = Path(report_path)
        report_path.parent.mkdir(parents=True, exist_ok=True)
        with open(report_path, 'w', encoding='utf-8') as f:
            json.dump(self.validation_results, f, indent=2, default=str)
        self._print(f"\n[REPORT] Detailed results saved to: {report_path}")
        logger.info("%s: %d passed, %d failed", report_path, passed, failed)
        return failed == 0


class RunAuditor(PhasedValidator):
    """Validates one run directory."""

    def __init__(self, run_dir: Union[str, Path], size_constant: Optional[float] = None, verbose: bool = True):
        self.run_dir = Path(run_dir)
        super().__init__(verbose=verbose, run_dir=str(self.run_dir))
        self.size_constant = size_constant
        self.config: Optional[ExperimentConfig] = None

    def load_run_config(self) -> bool:
        self._phase("PHASE 1: Run Configuration")
        path = self.run_dir / "config.json"
        if not path.exists():
            self.failed(f"config.json missing in {self.run_dir}")
            return False
        self.config = load_config(path)
        self._print(f"{self.config.agent} agent on {self.config.env_kind}, K={self.config.K}, H={self.config.H}")
        self.passed("config.json loads and validates")
        return True

    def validate_rewards(self) -> None:
        self._phase("PHASE 2: Reward Table")
        path = self.run_dir / "rewards.csv"
        if not path.exists():
            self.failed("rewards.csv missing")
            return
        frame = pd.read_csv(path)
        if list(frame.columns) != REWARD_COLUMNS:
            self.failed(f"rewards.csv header {list(frame.columns)} != {REWARD_COLUMNS}")
            return
        K, H = self.config.K, self.config.H
        self.expect(len(frame) == K, f"rewards.csv has {len(frame)} rows for K={K}")
        if not np.array_equal(frame["episode"].to_numpy(), np.arange(1, len(frame) + 1)):
            self.failed("episode column is not 1..K")
        rewards = frame["reward"].to_numpy()
        self.expect(bool(np.all((rewards >= 0) & (rewards <= H))), f"episode rewards within [0, {H}]")
        cum = frame["cum_regret"].to_numpy()
        if np.min(np.diff(cum), initial=0.0) < -1e-9 * max(1.0, float(np.abs(cum).max(initial=0.0))):
            self.warn("cumulative regret decreases somewhere (negative per-episode terms)")

    def validate_partitions(self) -> None:
        self._phase("PHASE 3: Partition Invariants")
        trees = load_partitions(self.run_dir)
        if not trees:
            if self.config.agent == "adaptive":
                self.failed("no partition dumps for an adaptive run")
            else:
                self._print(f"{self.config.agent} agent keeps no partition")
            return
        if len(trees) != self.config.H:
            self.failed(f"{len(trees)} partition dumps, expected H={self.config.H}")
        d_max = SpaceDescriptor().d_max
        for tree in trees:
            self._absorb(check_partition_invariants(tree))
            self._absorb(check_visit_bounds(tree, d_max))
        d_c = float(SpaceDescriptor().dims)
        self._absorb(check_blackbox_conditions(
            trees, self.config.K, d_c, c1=d_max / 2, c2=d_max, size_constant=self.size_constant,
        ))

    def run(self) -> bool:
        if not self.run_dir.is_dir():
            raise InvalidInputError(f"run directory not found: {self.run_dir}")
        if self.load_run_config():
            self.validate_rewards()
            self.validate_partitions()
        return self.generate_report(self.run_dir / "audit.json", "AUDIT SUMMARY")
