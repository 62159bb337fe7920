"""
Partition Growth Check
======================
Sweeps the episode count on the oil Laplace benchmark (tuned bonus scales)
and verifies that every step's partition grows sublinearly: |P_h^K| / sqrt(K)
may not exceed 1.5 times its value at the smallest K.

Usage:
    python scripts/partition_growth.py [--k-values 500,1000,2000,4000] [--seed 0]
"""

import argparse
import sys
from pathlib import Path

import numpy as np
import pandas as pd

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from harness import settings

settings.fix_console_encoding()

from harness.audit import PhasedValidator
from harness.config import load_config, parse_sweep_values, with_overrides
from harness.diagnostics import fit_exponent
from harness.runner import run_experiment

CONFIG_PATH = Path(__file__).parent.parent / "configs" / "oil_laplace_lam1_tuned.json"
GROWTH_SLACK = 1.5


class GrowthValidator(PhasedValidator):

    def __init__(self, k_values, seed: int, verbose: bool = True):
        super().__init__(verbose=verbose, k_values=list(k_values), seed=seed)
        self.k_values = sorted(k_values)
        self.seed = seed
        self.table = None

    def run_sweep(self):
        self._phase("PHASE 1: Episode Sweep")
        base = with_overrides(load_config(CONFIG_PATH), seed=self.seed, initial_state="uniform")
        rows = []
        for K in self.k_values:
            record = run_experiment(with_overrides(base, K=K), write=False)
            for h, size in enumerate(record.partition_sizes[-1], start=1):
                rows.append({"K": K, "h": h, "leaves": int(size), "ratio": size / np.sqrt(K)})
            self._print(f"  K={K}: leaves {record.partition_sizes[-1].tolist()}")
        self.table = pd.DataFrame(rows)

    def validate_growth(self):
        self._phase("PHASE 2: Sublinear Growth")
        first = self.k_values[0]
        for h, group in self.table.groupby("h"):
            limit = GROWTH_SLACK * group.loc[group["K"] == first, "ratio"].iloc[0]
            worst = group["ratio"].max()
            self.expect(worst <= limit, f"h={h}: max |P|/sqrt(K) = {worst:.3f} (limit {limit:.3f})")
        totals = self.table.groupby("K")["leaves"].sum()
        if len(totals) >= 2:
            exponent = fit_exponent(totals.index.to_numpy(), totals.to_numpy())
            self.validation_results['fitted_exponent'] = exponent
            self._print(f"  fitted growth exponent of total leaves: {exponent:.3f}")
            if exponent > 0.5:
                self.warn(f"total leaf count grows like K^{exponent:.3f}, above K^0.5")


def main():
    parser = argparse.ArgumentParser(description="Check sublinear growth of the adaptive partition.")
    parser.add_argument("--k-values", default="500,1000,2000,4000")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--report", type=Path, default=settings.output_root() / "partition_growth.json")
    args = parser.parse_args()
    settings.configure_logging()

    print("="*60)
    print("PARTITION GROWTH CHECK")
    print("="*60)
    validator = GrowthValidator(parse_sweep_values("K", args.k_values), args.seed)
    validator.run_sweep()
    validator.validate_growth()
    success = validator.generate_report(args.report, "GROWTH SUMMARY")
    sys.exit(0 if success else 1)


if __name__ == "__main__":
    main()
