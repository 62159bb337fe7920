"""
Baseline Comparison Script
==========================
Reproduces the learning-curve trends of the evaluation:

    PHASE 1  oil Laplace (lambda = 1): adaptive matches the net-based learner
             on late-episode reward with at most half its table size
    PHASE 2  oil quadratic (lambda = 50): the fixed net pays a discretization
             error the adaptive partition avoids
    PHASE 3  ambulance Beta(5, 2), c = 1: adaptive converges to the
             No Movement heuristic, which is optimal there

Every run draws its initial state uniformly so seeds produce distinct runs.
Both learners of a phase share one set of bonus scales: those of the phase's preset by
default, or the single value given with --bonus-scale.

Usage:
    python scripts/compare_baselines.py [--seeds 10] [--bonus-scale 0.005] [--out runs/compare_baselines]
"""

import argparse
import sys
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from harness import settings

settings.fix_console_encoding()

from harness.audit import PhasedValidator
from harness.config import load_config, with_overrides
from harness.runner import export_summary, run_experiment

CONFIG_DIR = Path(__file__).parent.parent / "configs"

LAPLACE_PRESET = "oil_laplace_lam1_tuned"
QUADRATIC_PRESET = "oil_quadratic_lam50"
HEURISTIC_PRESET = "ambulance_beta_c1_tuned"

REWARD_MARGIN = 0.02
SIZE_FRACTION = 0.5
DISCRETIZATION_GAP = 0.05
DISCRETIZATION_MIN_SEEDS = 7
HEURISTIC_TOLERANCE = 0.05


def tail_mean(rewards: np.ndarray, window: int) -> float:
    return float(np.mean(rewards[-window:]))


class BaselineComparison(PhasedValidator):

    def __init__(self, seeds: int, out_dir: Path, bonus_scale: Optional[float] = None, verbose: bool = True):
        super().__init__(verbose=verbose, seeds=seeds, bonus_scale=bonus_scale)
        self.seeds = seeds
        self.out_dir = out_dir
        self.bonus_scale = bonus_scale
        self.rows = []

    def _config(self, preset: str, seed: int, **overrides):
        cfg = with_overrides(load_config(CONFIG_DIR / f"{preset}.json"),
                             seed=seed, initial_state="uniform", **overrides)
        if self.bonus_scale is not None:
            cfg = with_overrides(cfg, bonus_scale_stochastic=self.bonus_scale,
                                 bonus_scale_metric=self.bonus_scale)
        return cfg

    def _pair(self, preset: str, seed: int, window: int):
        base = self._config(preset, seed)
        results = {}
        for agent in ("adaptive", "net"):
            record = run_experiment(with_overrides(base, agent=agent), write=False)
            results[agent] = record
            self.rows.append({
                "experiment": preset,
                "agent": agent,
                "seed": seed,
                "K": record.K,
                "bonus_scale_stochastic": base.bonus_scale_stochastic,
                "bonus_scale_metric": base.bonus_scale_metric,
                "tail_mean_reward": tail_mean(record.rewards, window),
                "total_size": int(record.partition_sizes[-1].sum()),
                "total_regret": float(record.cum_regret[-1]),
            })
        return results["adaptive"], results["net"]

    def compare_laplace(self):
        self._phase("PHASE 1: Oil Laplace, lambda = 1")
        gaps, size_ratios = [], []
        for seed in range(self.seeds):
            adaptive, net = self._pair(LAPLACE_PRESET, seed, 200)
            gaps.append(tail_mean(adaptive.rewards, 200) - tail_mean(net.rewards, 200))
            size_ratios.append(adaptive.partition_sizes[-1].sum() / net.partition_sizes[-1].sum())
            self._print(f"  seed={seed}: gap {gaps[-1]:+.4f}, leaf ratio {size_ratios[-1]:.2f}")
        mean_gap = float(np.mean(gaps))
        self.expect(mean_gap >= -REWARD_MARGIN,
                    f"adaptive minus net late reward {mean_gap:+.4f} (floor {-REWARD_MARGIN})")
        worst = float(np.max(size_ratios))
        self.expect(worst <= SIZE_FRACTION,
                    f"adaptive leaves at most {worst:.0%} of the net table (limit {SIZE_FRACTION:.0%})")

    def compare_quadratic(self):
        self._phase("PHASE 2: Oil Quadratic, lambda = 50")
        wins = 0
        for seed in range(self.seeds):
            adaptive, net = self._pair(QUADRATIC_PRESET, seed, 200)
            gap = tail_mean(adaptive.rewards, 200) - tail_mean(net.rewards, 200)
            wins += gap >= DISCRETIZATION_GAP
            self._print(f"  seed={seed}: gap {gap:+.4f}")
        needed = int(np.ceil(DISCRETIZATION_MIN_SEEDS * self.seeds / 10))
        self.expect(wins >= needed,
                    f"adaptive beats net by >= {DISCRETIZATION_GAP} on {wins}/{self.seeds} seeds (need {needed})")

    def compare_heuristic(self, K: int = 5000):
        self._phase(f"PHASE 3: Ambulance Beta(5, 2), c = 1, K = {K}")
        adaptive_means, stay_means = [], []
        for seed in range(self.seeds):
            base = self._config(HEURISTIC_PRESET, seed, K=K)
            adaptive = run_experiment(base, write=False)
            stay = run_experiment(with_overrides(base, agent="no-movement"), write=False)
            adaptive_means.append(tail_mean(adaptive.rewards, 500))
            stay_means.append(tail_mean(stay.rewards, 500))
            self._print(f"  seed={seed}: no-movement minus adaptive {stay_means[-1] - adaptive_means[-1]:+.4f}")
        gap = abs(float(np.mean(stay_means)) - float(np.mean(adaptive_means)))
        self.expect(gap <= HEURISTIC_TOLERANCE,
                    f"adaptive mean within {gap:.4f} of No Movement (tolerance {HEURISTIC_TOLERANCE})")
        worst = float(np.max(np.abs(np.subtract(stay_means, adaptive_means))))
        if worst > HEURISTIC_TOLERANCE:
            self.warn(f"largest single-seed gap to No Movement is {worst:.4f}")

    def export(self):
        if self.rows:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            export_summary(pd.DataFrame(self.rows), self.out_dir)


def main():
    parser = argparse.ArgumentParser(description="Compare the adaptive learner with its baselines.")
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--bonus-scale", type=float, default=None,
                        help="One bonus scale for both learners in every phase (default: tuned presets)")
    parser.add_argument("--out", type=Path, default=settings.output_root() / "compare_baselines")
    args = parser.parse_args()
    settings.configure_logging()

    print("""
================================================================
ADAPTIVE VS BASELINE COMPARISON
================================================================
""")
    comparison = BaselineComparison(args.seeds, args.out, args.bonus_scale)
    comparison.compare_laplace()
    comparison.compare_quadratic()
    comparison.compare_heuristic()
    comparison.export()
    success = comparison.generate_report(args.out / "comparison.json", "COMPARISON SUMMARY")
    sys.exit(0 if success else 1)


if __name__ == "__main__":
    main()
