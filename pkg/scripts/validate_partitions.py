"""
Partition Invariant Validation Script
=====================================
Runs the adaptive learner on every benchmark family at full scale and checks
the final partition trees: exact covering, separation, nestedness, visit
bounds and the single-visit root split.

Usage:
    python scripts/validate_partitions.py [--seeds 5] [--report runs/validate_partitions.json]
"""

import argparse
import sys
import time
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from harness import settings

settings.fix_console_encoding()

from core.invariants import check_blackbox_conditions, check_partition_invariants, check_visit_bounds
from harness.audit import PhasedValidator
from harness.config import load_config, with_overrides
from harness.runner import run_experiment

CONFIG_DIR = Path(__file__).parent.parent / "configs"
FAMILIES = [
    "oil_laplace_lam1",
    "oil_laplace_lam10",
    "oil_laplace_lam50",
    "ambulance_beta_c025",
    "ambulance_uniform_c025",
]


class PartitionValidator(PhasedValidator):
    """Full-run partition checks across environment families and seeds"""

    def __init__(self, seeds: int):
        super().__init__(families=FAMILIES, seeds=seeds)
        self.seeds = seeds
        self.runs = []

    def run_families(self):
        """Train one adaptive learner per (family, seed)"""
        self._phase("PHASE 1: Full Runs")
        for family in FAMILIES:
            base = load_config(CONFIG_DIR / f"{family}.json")
            for seed in range(self.seeds):
                started = time.perf_counter()
                record = run_experiment(with_overrides(base, seed=seed, initial_state="uniform"),
                                        write=False, keep_agent=True)
                self.runs.append((family, seed, record))
                self._print(f"  {family} seed={seed}: leaves {record.agent.partition_sizes()} "
                            f"({time.perf_counter() - started:.1f}s)")

    def validate_trees(self):
        """Covering, separation and visit bounds on every final tree"""
        self._phase("PHASE 2: Covering, Separation, Visit Bounds")
        for family, seed, record in self.runs:
            trees = record.agent.trees
            failures = []
            for tree in trees:
                for report in (check_partition_invariants(tree), check_visit_bounds(tree, 1.0)):
                    failures.extend(report.failed)
            blackbox = check_blackbox_conditions(trees, record.K, d_c=2.0, c1=0.5, c2=1.0)
            failures.extend(blackbox.failed)
            if failures:
                self.failed(f"{family} seed={seed}: {len(failures)} violations, first: {failures[0]}")
            else:
                self.passed(f"{family} seed={seed}: all {len(trees)} trees satisfy the invariants")

    def validate_root_split(self):
        """Every root is split after its first visit"""
        self._phase("PHASE 3: Root Split Timing")
        bad = [
            (family, seed, tree.step)
            for family, seed, record in self.runs
            for tree in record.agent.trees
            if tree.root.own_visits != 1 or tree.root.split_visits != 1
        ]
        self.expect(not bad, f"root split at one visit in {len(self.runs)} runs"
                    + (f" (violations: {bad[:5]})" if bad else ""))


def main():
    """Main execution"""
    parser = argparse.ArgumentParser(description="Validate adaptive partitions after full runs.")
    parser.add_argument("--seeds", type=int, default=5)
    parser.add_argument("--report", type=Path, default=settings.output_root() / "validate_partitions.json")
    args = parser.parse_args()
    settings.configure_logging()

    print("""
================================================================
ADAPTIVE PARTITION INVARIANT VALIDATION
================================================================
""")
    validator = PartitionValidator(args.seeds)
    validator.run_families()
    validator.validate_trees()
    validator.validate_root_split()
    success = validator.generate_report(args.report, "VALIDATION SUMMARY")
    sys.exit(0 if success else 1)


if __name__ == "__main__":
    main()
