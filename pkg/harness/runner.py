"""
Experiment Runner
=================
Builds the environment and agent from an ExperimentConfig, plays K seeded
episodes, scores them against the oracle and writes the run artifacts:

    <run dir>/config.json
    <run dir>/rewards.csv          episode,reward,cum_regret
    <run dir>/partition_h{h}.json  adaptive agent only
    <run dir>/summary.json

``sweep`` repeats a run over the values of one parameter, optionally in a
process pool, and writes sweep_summary.csv / sweep_summary.xlsx.
"""

import hashlib
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from core.baselines import MedianAgent, NetConfig, NetQLearner, NoMovementAgent
from core.episode import EpisodicAgent, SplitEvent
from core.errors import AdaptiveQLError
from core.learner import AdaptiveQLearner, LearnerConfig
from environments import AmbulanceEnvironment, Environment, OilEnvironment
from harness import settings
from harness.config import ExperimentConfig, config_dict, config_hash, with_parameter
from harness.diagnostics import per_episode_regret
from harness.oracle import compute_oracle

logger = logging.getLogger(__name__)

REWARD_FORMAT = "%.17g"
SUMMARY_WINDOW = 200


@dataclass
class RunRecord:
    """Everything one experiment produced."""
    config: ExperimentConfig
    config_hash: str
    rewards: np.ndarray
    initial_states: np.ndarray
    partition_sizes: np.ndarray
    step_states: np.ndarray
    value_estimates: np.ndarray
    split_events: List[SplitEvent] = field(default_factory=list)
    per_episode_regret: Optional[np.ndarray] = None
    cum_regret: Optional[np.ndarray] = None
    oracle_resolution: Optional[int] = None
    wall_clock: float = 0.0
    output_dir: Optional[Path] = None
    agent: Optional[EpisodicAgent] = None

    @property
    def K(self) -> int:
        return len(self.rewards)

    def digest(self) -> str:
        """Content hash of the numeric outputs (rewards, sizes, splits)."""
        h = hashlib.sha1()
        h.update(self.config_hash.encode())
        h.update(np.ascontiguousarray(self.rewards, dtype=np.float64).tobytes())
        h.update(np.ascontiguousarray(self.partition_sizes, dtype=np.int64).tobytes())
        for e in self.split_events:
            h.update(f"{e.episode},{e.step},{e.ball_id},{e.depth},{e.visits};".encode())
        return h.hexdigest()

    def summary(self) -> Dict[str, Any]:
        window = min(SUMMARY_WINDOW, self.K)
        final_sizes = self.partition_sizes[-1].tolist() if self.partition_sizes.size else []
        return {
            "config_hash": self.config_hash,
            "digest": self.digest(),
            "agent": self.config.agent,
            "environment": self.config.env_kind,
            "K": self.K,
            "H": self.config.H,
            "seed": self.config.seed,
            "mean_reward": float(np.mean(self.rewards)),
            "last_window": window,
            "last_window_mean_reward": float(np.mean(self.rewards[-window:])),
            "total_regret": float(self.cum_regret[-1]) if self.cum_regret is not None else None,
            "oracle_resolution": self.oracle_resolution,
            "final_partition_sizes": final_sizes,
            "splits": len(self.split_events),
            "wall_clock_seconds": self.wall_clock,
        }


# =============================================================================
# Construction
# =============================================================================

def build_environment(cfg: ExperimentConfig) -> Environment:
    if cfg.env_kind == "oil":
        env = OilEnvironment(cfg.environment.to_config())
    else:
        env = AmbulanceEnvironment(cfg.environment.to_config())
    env.validate_horizon(cfg.H)
    return env


def build_agent(cfg: ExperimentConfig) -> EpisodicAgent:
    if cfg.agent == "adaptive":
        return AdaptiveQLearner(
            LearnerConfig(
                H=cfg.H,
                K=cfg.K,
                delta=cfg.delta,
                lipschitz_L=cfg.lipschitz_L,
                bonus_scale_stochastic=cfg.bonus_scale_stochastic,
                bonus_scale_metric=cfg.bonus_scale_metric,
                bonus_form=cfg.bonus_form,
            ),
            snapshots=cfg.snapshots,
        )
    if cfg.agent == "net":
        return NetQLearner(NetConfig(
            H=cfg.H,
            K=cfg.K,
            delta=cfg.delta,
            lipschitz_L=cfg.lipschitz_L,
            bonus_scale_stochastic=cfg.bonus_scale_stochastic,
            bonus_scale_metric=cfg.bonus_scale_metric,
            bonus_form=cfg.bonus_form,
            epsilon=cfg.epsilon,
        ))
    if cfg.agent == "no-movement":
        return NoMovementAgent(H=cfg.H, K=cfg.K)
    return MedianAgent(H=cfg.H, K=cfg.K)


def draw_initial_state(cfg: ExperimentConfig, env: Environment, rng: np.random.Generator) -> float:
    if cfg.initial_state == "uniform":
        return float(rng.random())
    if cfg.initial_state is None:
        return env.default_initial_state
    return float(cfg.initial_state)


def run_directory(cfg: ExperimentConfig, out_dir: Optional[Union[str, Path]] = None) -> Path:
    if out_dir is not None:
        return Path(out_dir)
    if cfg.output_dir is not None:
        return Path(cfg.output_dir)
    label = cfg.name or f"{cfg.env_kind}_{cfg.agent}"
    return settings.output_root() / f"{label}_seed{cfg.seed}_{config_hash(cfg)[:8]}"


# =============================================================================
# Running
# =============================================================================

def run_experiment(
    cfg: ExperimentConfig,
    out_dir: Optional[Union[str, Path]] = None,
    write: bool = True,
    oracle_resolution: Optional[int] = None,
    keep_agent: bool = False,
) -> RunRecord:
    """Play K episodes; fully determined by the config and its seed."""
    env = build_environment(cfg)
    agent = build_agent(cfg)
    rng = np.random.default_rng(cfg.seed)
    digest = config_hash(cfg)
    logger.info("run %s: %s agent on %s, K=%d, H=%d, seed=%d",
                digest[:8], cfg.agent, env.name, cfg.K, cfg.H, cfg.seed)

    rewards = np.zeros(cfg.K)
    starts = np.zeros(cfg.K)
    sizes = np.zeros((cfg.K, cfg.H), dtype=np.int64)
    states = np.zeros((cfg.K, cfg.H))
    estimates = np.full((cfg.K, cfg.H), np.nan)
    splits: List[SplitEvent] = []

    started = time.perf_counter()
    episodes = tqdm(range(cfg.K), desc=f"{cfg.agent}/{env.name}", disable=not settings.progress_enabled())
    for k in episodes:
        x1 = draw_initial_state(cfg, env, rng)
        trace = agent.run_episode(env, x1, rng)
        rewards[k] = trace.total_reward
        starts[k] = x1
        states[k] = [s[0] for s in trace.states]
        estimates[k] = trace.value_estimates
        if trace.partition_sizes:
            sizes[k] = trace.partition_sizes
        splits.extend(trace.splits)
    elapsed = time.perf_counter() - started

    m = oracle_resolution or settings.oracle_resolution()
    oracle = compute_oracle(env, cfg.H, m, settings.quadrature_nodes())
    regret = per_episode_regret(rewards, oracle, starts)

    record = RunRecord(
        config=cfg,
        config_hash=digest,
        rewards=rewards,
        initial_states=starts,
        partition_sizes=sizes,
        step_states=states,
        value_estimates=estimates,
        split_events=splits,
        per_episode_regret=regret.per_episode,
        cum_regret=regret.cumulative,
        oracle_resolution=m,
        wall_clock=elapsed,
        agent=agent if keep_agent else None,
    )
    if write:
        record.output_dir = write_artifacts(record, agent, run_directory(cfg, out_dir))
    logger.info("run %s finished in %.2fs: mean reward %.4f, total regret %.2f",
                digest[:8], elapsed, float(rewards.mean()), regret.total)
    return record


def write_artifacts(record: RunRecord, agent: EpisodicAgent, directory: Path) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "config.json", "w", encoding="utf-8") as f:
        json.dump(config_dict(record.config), f, indent=2, sort_keys=True)

    frame = pd.DataFrame({
        "episode": np.arange(1, record.K + 1),
        "reward": record.rewards,
        "cum_regret": record.cum_regret,
    })
    frame.to_csv(directory / "rewards.csv", index=False, float_format=REWARD_FORMAT)

    if isinstance(agent, AdaptiveQLearner):
        for tree in agent.trees:
            with open(directory / f"partition_h{tree.step}.json", "w", encoding="utf-8") as f:
                json.dump(tree.to_records(), f)

    with open(directory / "summary.json", "w", encoding="utf-8") as f:
        json.dump(record.summary(), f, indent=2)
    logger.info("artifacts written to %s", directory)
    return directory


# =============================================================================
# Sweeps
# =============================================================================

def _sweep_task(task: Tuple[ExperimentConfig, Path, Optional[int]]) -> RunRecord:
    cfg, directory, m = task
    return run_experiment(cfg, out_dir=directory, oracle_resolution=m)


def _summary_row(param: str, value, record: Optional[RunRecord], error: Optional[str], directory: Path) -> Dict[str, Any]:
    row = {"param": param, "value": value, "run_dir": str(directory)}
    if record is None:
        row.update({"status": "failed", "error": error})
        return row
    summary = record.summary()
    row.update({
        "status": "ok",
        "error": None,
        "config_hash": record.config_hash,
        "mean_reward": summary["mean_reward"],
        "last_window_mean_reward": summary["last_window_mean_reward"],
        "total_regret": summary["total_regret"],
        "final_leaves_total": int(sum(summary["final_partition_sizes"])),
        "final_leaves_max": int(max(summary["final_partition_sizes"], default=0)),
        "wall_clock_seconds": record.wall_clock,
    })
    return row


def sweep(
    base: ExperimentConfig,
    param: str,
    values: Sequence,
    out_root: Optional[Union[str, Path]] = None,
    workers: Optional[int] = None,
    oracle_resolution: Optional[int] = None,
) -> List[RunRecord]:
    """One independent run per value; failures are logged and tabulated, siblings continue."""
    root = Path(out_root) if out_root is not None else run_directory(base).with_name(
        f"sweep_{param}_{config_hash(base)[:8]}")
    if not values:
        logger.info("sweep over %s: no values given", param)
        return []
    root.mkdir(parents=True, exist_ok=True)
    workers = workers or settings.workers()

    tasks, rows = [], {}
    for i, value in enumerate(values):
        directory = root / f"{param}={value}"
        try:
            tasks.append((i, value, (with_parameter(base, param, value), directory, oracle_resolution)))
        except AdaptiveQLError as e:
            logger.warning("sweep %s=%s rejected: %s", param, value, e)
            rows[i] = _summary_row(param, value, None, str(e), directory)

    results: Dict[int, RunRecord] = {}
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {i: (value, task, pool.submit(_sweep_task, task)) for i, value, task in tasks}
            for i, (value, task, future) in futures.items():
                try:
                    results[i] = future.result()
                except Exception as e:
                    logger.warning("sweep %s=%s failed: %s", param, value, e)
                    rows[i] = _summary_row(param, value, None, str(e), task[1])
    else:
        for i, value, task in tasks:
            try:
                results[i] = _sweep_task(task)
            except Exception as e:
                logger.warning("sweep %s=%s failed: %s", param, value, e)
                rows[i] = _summary_row(param, value, None, str(e), task[1])

    for i, value, task in tasks:
        if i in results:
            rows[i] = _summary_row(param, value, results[i], None, task[1])

    table = pd.DataFrame([rows[i] for i in sorted(rows)])
    export_summary(table, root)
    return [results[i] for i in sorted(results)]


def export_summary(table: pd.DataFrame, root: Path) -> Path:
    """Write sweep_summary.csv and sweep_summary.xlsx (sheet 'Results')."""
    table.to_csv(root / "sweep_summary.csv", index=False)
    with pd.ExcelWriter(root / "sweep_summary.xlsx", engine='openpyxl') as writer:
        table.to_excel(writer, index=False, sheet_name='Results')
    logger.info("sweep summary written to %s", root)
    return root
