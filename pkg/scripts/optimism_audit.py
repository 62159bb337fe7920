"""
Optimism Audit
==============
Checks that the learner's value estimates stay above V* along visited states,
then tracks the averaged regret of frozen policy snapshots.

A (k, h) pair violates optimism when V_hat_h^k(x) < V*_h(x) - tol, with tol
the oracle's grid error H / (m - 1).

Usage:
    python scripts/optimism_audit.py [--seeds 20] [--resolution 401]
"""

import argparse
import sys
from pathlib import Path

import numpy as np

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from harness import settings

settings.fix_console_encoding()

from harness.audit import PhasedValidator
from harness.config import load_config, with_overrides
from harness.diagnostics import averaged_regret, optimism_violations
from harness.oracle import compute_oracle
from harness.runner import build_environment, run_experiment

CONFIG_PATH = Path(__file__).parent.parent / "configs" / "oil_laplace_lam1.json"
DELTA = 0.1
ROLLOUTS = 1


class OptimismAudit(PhasedValidator):

    def __init__(self, seeds: int, resolution: int, verbose: bool = True):
        super().__init__(verbose=verbose, seeds=seeds, resolution=resolution, delta=DELTA)
        self.seeds = seeds
        self.resolution = resolution
        self.base = with_overrides(
            load_config(CONFIG_PATH),
            delta=DELTA,
            initial_state="uniform",
            bonus_scale_stochastic=1.0,
            bonus_scale_metric=1.0,
        )
        self.env = build_environment(self.base)
        self.oracle = compute_oracle(self.env, self.base.H, resolution, settings.quadrature_nodes())
        self.tolerance = self.base.H / (resolution - 1)

    def audit_optimism(self):
        self._phase("PHASE 1: Optimism of Value Estimates")
        fractions = []
        for seed in range(self.seeds):
            record = run_experiment(with_overrides(self.base, seed=seed), write=False,
                                    oracle_resolution=self.resolution)
            fraction = optimism_violations(record.value_estimates, record.step_states, self.oracle, self.tolerance)
            fractions.append(fraction)
            self._print(f"  seed={seed}: violation fraction {fraction:.4f}")
        self.validation_results['violation_fractions'] = fractions
        worst = float(np.max(fractions))
        self.expect(worst <= DELTA, f"worst violation fraction {worst:.4f} (limit delta = {DELTA})")

    def audit_snapshots(self):
        self._phase("PHASE 2: Averaged Regret of Policy Snapshots")
        K = self.base.K
        schedule = [1, K // 4, K // 2, K]
        cfg = with_overrides(self.base, seed=0, snapshots=schedule)
        record = run_experiment(cfg, write=False, keep_agent=True, oracle_resolution=self.resolution)
        rng = np.random.default_rng(cfg.seed)
        gaps = averaged_regret(record.agent.policy_log, self.env, self.oracle,
                               self.env.default_initial_state, cfg.H, ROLLOUTS, rng)
        for k, gap in gaps.items():
            self._print(f"  episode {k}: V* - V^pi = {gap:.4f}")
        self.validation_results['snapshot_regret'] = gaps
        if gaps[max(gaps)] > gaps[min(gaps)]:
            self.warn("the last snapshot is worse than the first")
        else:
            self.passed("policy snapshots improve over training")


def main():
    parser = argparse.ArgumentParser(description="Audit optimism of the adaptive value estimates.")
    parser.add_argument("--seeds", type=int, default=20)
    parser.add_argument("--resolution", type=int, default=401)
    parser.add_argument("--report", type=Path, default=settings.output_root() / "optimism_audit.json")
    args = parser.parse_args()
    settings.configure_logging()

    print("="*60)
    print("OPTIMISM AUDIT")
    print("="*60)
    audit = OptimismAudit(args.seeds, args.resolution)
    audit.audit_optimism()
    audit.audit_snapshots()
    success = audit.generate_report(args.report, "AUDIT SUMMARY")
    sys.exit(0 if success else 1)


if __name__ == "__main__":
    main()
