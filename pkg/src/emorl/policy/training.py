"""Training loop: collect rollouts, update, record the learning curve.

Each step samples a scenario batch, rolls out episodes (with groups when
GRPO asks for them), assembles a trajectory batch and applies one gradient
step. Curve records land in a line-delimited metrics file plus two plot-data
CSVs (emotion and output length over steps); snapshots carry the parameters,
the baseline state, and a config hash that resumption must match.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from ..rollout.engine import RolloutConfig, run_batch
from ..seeding import derive_seed, derived_rng
from .optim import (
    OptimizerConfig,
    StateBaseline,
    assemble_batch,
    grpo_update,
    ppo_update,
)
from .toy import ToyPolicy

log = logging.getLogger(__name__)

ALGOS = ("ppo", "grpo")


def config_hash(algo: str, rollout_cfg: RolloutConfig, opt_cfg: OptimizerConfig) -> str:
    body = json.dumps(
        {"algo": algo, "rollout": asdict(rollout_cfg), "optimizer": asdict(opt_cfg)},
        sort_keys=True,
    )
    return hashlib.sha256(body.encode("utf-8")).hexdigest()[:16]


def save_snapshot(
    path: Path,
    policy: ToyPolicy,
    baseline: StateBaseline,
    step: int,
    cfg_hash: str,
    algo: str,
) -> None:
    np.savez(
        path,
        theta=policy.theta,
        baseline_sums=baseline.sums,
        baseline_counts=baseline.counts,
        step=np.array([step]),
        meta=np.array(
            [json.dumps({"snapshot_id": policy.snapshot_id, "config_hash": cfg_hash, "algo": algo})]
        ),
    )


def load_snapshot(path: Path) -> dict:
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"][0]))
        return {
            "policy": ToyPolicy(data["theta"]),
            "baseline_sums": data["baseline_sums"],
            "baseline_counts": data["baseline_counts"],
            "step": int(data["step"][0]),
            **meta,
        }


def _mean_output_tokens(transcripts) -> float:
    counts = [
        len(t.text.split())
        for tr in transcripts
        for t in tr.turns
        if t.speaker == "model"
    ]
    return float(np.mean(counts)) if counts else 0.0


@dataclass
class TrainResult:
    policy: ToyPolicy
    curve: list[dict]
    baseline: StateBaseline
    aborted: bool = False
    final_snapshot: Path | None = None


def train(
    scenarios,
    algo: str,
    engine,
    rollout_cfg: RolloutConfig,
    opt_cfg: OptimizerConfig,
    steps: int,
    master_seed: int,
    out_dir: Path | None = None,
    snapshot_every: int = 0,
    resume_from: Path | None = None,
) -> TrainResult:
    if algo not in ALGOS:
        raise ConfigError(f"unknown algorithm {algo!r}; expected one of {ALGOS}")
    if algo == "grpo" and opt_cfg.group_size < 2:
        raise ConfigError("GRPO needs group_size >= 2 for within-group normalization")
    group_size = opt_cfg.group_size if algo == "grpo" else 1
    rollout_cfg = replace(rollout_cfg, group_size=group_size)
    n_scenarios_per_step = max(1, opt_cfg.batch_size // group_size)
    cfg_hash = config_hash(algo, rollout_cfg, opt_cfg)

    policy = ToyPolicy()
    baseline = StateBaseline()
    start_step = 0
    if resume_from is not None:
        snap = load_snapshot(resume_from)
        if snap["config_hash"] != cfg_hash:
            raise ConfigError(
                f"snapshot {resume_from} has config hash {snap['config_hash']}, "
                f"current configuration hashes to {cfg_hash}; refusing to resume"
            )
        policy = snap["policy"]
        baseline.load_state(snap["baseline_sums"], snap["baseline_counts"])
        start_step = snap["step"] + 1

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

    curve: list[dict] = []
    aborted = False
    last_good = policy
    for step in range(start_step, start_step + steps):
        scen_rng = derived_rng(master_seed, "scenarios", step)
        picks = scen_rng.integers(0, len(scenarios), size=n_scenarios_per_step)
        sampled = [scenarios[int(i)] for i in picks]
        batch_seed = derive_seed(master_seed, "step", step)
        transcripts = run_batch(sampled, policy, engine, rollout_cfg, batch_seed)
        usable = [t for t in transcripts if t.status == "complete"]
        aborted_count = len(transcripts) - len(usable)
        if not usable:
            log.warning("step %d: every episode aborted; skipping update", step)
            continue
        batch = assemble_batch(transcripts, policy, group_size=group_size)
        if algo == "ppo":
            policy, stats = ppo_update(policy, batch, opt_cfg, step=step, baseline=baseline)
        else:
            policy, stats = grpo_update(policy, batch, opt_cfg, step=step)

        rewards = np.array([t.reward for t in usable])
        emotions = np.array([min(t.e_T, 100.0) for t in usable])
        record = {
            "step": step,
            "mean_emotion": float(emotions.mean()),
            "mean_reward": float(rewards.mean()),
            "clip_fraction": float(stats.get("clip_fraction", 0.0)),
            "entropy": float(stats.get("entropy", 0.0)),
            "mean_turns": float(np.mean([len(t.model_turns()) for t in usable])),
            "mean_output_length": _mean_output_tokens(usable),
            "loss": float(stats.get("loss", 0.0)),
            "lr": float(stats["lr"]),
            "aborted_episodes": aborted_count,
        }
        curve.append(record)

        finite = all(
            np.isfinite(v) for k, v in record.items() if isinstance(v, float)
        )
        if not finite or stats.get("skipped"):
            if not finite:
                log.error("step %d: non-finite statistics; stopping with last good snapshot", step)
                aborted = True
                policy = last_good
                break
        else:
            last_good = policy

        if out_dir is not None and snapshot_every and (step + 1) % snapshot_every == 0:
            save_snapshot(
                out_dir / f"snapshot_{step + 1:05d}.npz", policy, baseline, step, cfg_hash, algo
            )

    final_snapshot = None
    if out_dir is not None:
        final_snapshot = out_dir / "snapshot_final.npz"
        save_snapshot(final_snapshot, policy, baseline,
                      start_step + len(curve) - 1 if curve else start_step, cfg_hash, algo)
        write_metrics(out_dir / "metrics.jsonl", curve)
        write_plot_data(out_dir, curve)
    return TrainResult(
        policy=policy, curve=curve, baseline=baseline, aborted=aborted,
        final_snapshot=final_snapshot,
    )


def write_metrics(path: Path, curve: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in curve:
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def write_plot_data(out_dir: Path, curve: list[dict]) -> None:
    """Figure-shaped CSVs: emotion score and output length against steps."""
    out_dir = Path(out_dir)
    with open(out_dir / "plot_emotion.csv", "w", encoding="utf-8") as fh:
        fh.write("step,mean_emotion\n")
        for r in curve:
            fh.write(f"{r['step']},{r['mean_emotion']:.4f}\n")
    with open(out_dir / "plot_output_length.csv", "w", encoding="utf-8") as fh:
        fh.write("step,mean_output_length\n")
        for r in curve:
            fh.write(f"{r['step']},{r['mean_output_length']:.4f}\n")
