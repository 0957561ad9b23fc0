"""PPO and GRPO updates for the toy policy.

Both share the clipped-surrogate objective with entropy regularization and
a reward-weighted imitation term; they differ in where advantages come from.
PPO subtracts a per-state running-mean reward baseline (optionally plus a KL
penalty against the sampling snapshot); GRPO normalizes terminal rewards
within groups of rollouts sharing a scenario and uses no baseline and no KL.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, StaleBatchError
from .kernels import loss_and_grad
from .toy import NUM_STATES, ToyPolicy

log = logging.getLogger(__name__)

ADVANTAGE_MODES = ("terminal_broadcast", "per_turn_delta")

_STD_FLOOR = 1e-8


@dataclass(frozen=True)
class OptimizerConfig:
    # The loss is a mean over batch steps, so a tabular state only receives
    # its visit share of the gradient; the default step size accounts for
    # that. See the learning-rate notes in the README.
    learning_rate: float = 100.0
    clip_eps: float = 0.2
    entropy_coef: float = 0.01
    imitation_coef: float = 0.1
    kl_coef: float = 0.0
    warmup_steps: int = 50
    batch_size: int = 32
    group_size: int = 4
    advantage_mode: str = "terminal_broadcast"

    def __post_init__(self):
        if self.clip_eps <= 0:
            raise ConfigError(f"clip_eps must be positive, got {self.clip_eps}")
        if self.learning_rate < 0:
            raise ConfigError("learning_rate must be >= 0")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.warmup_steps < 0:
            raise ConfigError("warmup_steps must be >= 0")
        if self.advantage_mode not in ADVANTAGE_MODES:
            raise ConfigError(
                f"advantage_mode must be one of {ADVANTAGE_MODES}, got {self.advantage_mode!r}"
            )


@dataclass(frozen=True)
class EpisodeSteps:
    states: np.ndarray
    actions: np.ndarray
    logps: np.ndarray
    deltas: np.ndarray
    reward: float
    group: int


@dataclass(frozen=True)
class TrajectoryBatch:
    snapshot_id: str
    episodes: tuple[EpisodeSteps, ...]

    def __post_init__(self):
        if not self.episodes:
            raise ConfigError("empty trajectory batch")

    @property
    def rewards(self) -> np.ndarray:
        return np.array([ep.reward for ep in self.episodes])

    def flat(self):
        states = np.concatenate([ep.states for ep in self.episodes])
        actions = np.concatenate([ep.actions for ep in self.episodes])
        logps = np.concatenate([ep.logps for ep in self.episodes])
        return states, actions, logps


def assemble_batch(transcripts, policy: ToyPolicy, group_size: int = 1) -> TrajectoryBatch:
    """Build a trajectory batch from rollout output (order-preserving).

    Transcripts must be in ``run_batch`` order; group membership is
    positional (chunks of ``group_size``). Aborted episodes are dropped, and
    any transcript produced by a different snapshot rejects the whole batch.
    """
    episodes = []
    for i, tr in enumerate(transcripts):
        if tr.status != "complete":
            continue
        if tr.policy_version != policy.snapshot_id:
            raise StaleBatchError(
                f"transcript {tr.transcript_id} was sampled by {tr.policy_version}, "
                f"but the current snapshot is {policy.snapshot_id}"
            )
        model_turns = [t for t in tr.turns if t.speaker == "model" and t.meta]
        if not model_turns:
            continue
        episodes.append(
            EpisodeSteps(
                states=np.array([t.meta["state"] for t in model_turns], dtype=np.int64),
                actions=np.array([t.meta["action"] for t in model_turns], dtype=np.int64),
                logps=np.array([t.meta["logp"] for t in model_turns]),
                deltas=np.array([t.delta for t in model_turns]),
                reward=float(tr.reward),
                group=i // group_size,
            )
        )
    return TrajectoryBatch(snapshot_id=policy.snapshot_id, episodes=tuple(episodes))


def advantage_broadcast(terminal_reward: float, deltas, mode: str) -> np.ndarray:
    """Per-step learning signal before any centering.

    terminal_broadcast repeats the episode reward on every step;
    per_turn_delta uses each step's emotion change on the reward scale.
    """
    deltas = np.asarray(deltas, dtype=np.float64)
    if mode == "terminal_broadcast":
        return np.full(deltas.shape[0], float(terminal_reward))
    if mode == "per_turn_delta":
        return deltas / 100.0
    raise ConfigError(f"unknown advantage mode {mode!r}")


def grpo_advantages(groups):
    """Group-relative advantages: (r - mean) / std with ddof=1.

    Accepts either one flat group of rewards (returns one array) or a list
    of groups (returns a list of arrays). The std is floored at 1e-8, so a
    zero-variance group yields exact zeros. Groups need >= 2 members.
    """
    groups = list(groups)
    single = bool(groups) and not hasattr(groups[0], "__len__")
    group_list = [groups] if single else groups
    out = []
    for g in group_list:
        arr = np.asarray(g, dtype=np.float64)
        if arr.size < 2:
            raise ConfigError(
                "GRPO needs groups of at least 2 rollouts per scenario to normalize"
            )
        centered = arr - arr.mean()
        out.append(centered / max(arr.std(ddof=1), _STD_FLOOR))
    return out[0] if single else out


def imitation_weights(rewards: np.ndarray) -> np.ndarray:
    """w(r) = max(r - mean, 0): only above-average episodes get imitated."""
    return np.maximum(rewards - rewards.mean(), 0.0)


def imitation_loss(batch: TrajectoryBatch, cfg: OptimizerConfig) -> float:
    """-mean over steps of w(r) * log pi(a|s), at the sampling snapshot."""
    rewards = batch.rewards
    weights = imitation_weights(rewards)
    terms = []
    for ep, w in zip(batch.episodes, weights):
        terms.append(w * ep.logps)
    flat = np.concatenate(terms)
    return float(-flat.mean())


class StateBaseline:
    """Per-state running mean of episode rewards, with a neutral prior."""

    def __init__(self, num_states: int = NUM_STATES, prior: float = 0.5, prior_weight: float = 1.0):
        self.sums = np.zeros(num_states)
        self.counts = np.zeros(num_states)
        self.prior = prior
        self.prior_weight = prior_weight

    def values(self, states: np.ndarray) -> np.ndarray:
        return (self.prior * self.prior_weight + self.sums[states]) / (
            self.prior_weight + self.counts[states]
        )

    def update(self, states: np.ndarray, rewards: np.ndarray) -> None:
        np.add.at(self.sums, states, rewards)
        np.add.at(self.counts, states, 1.0)

    def state_dict(self) -> dict:
        return {"sums": self.sums, "counts": self.counts}

    def load_state(self, sums: np.ndarray, counts: np.ndarray) -> None:
        self.sums = np.array(sums, dtype=np.float64)
        self.counts = np.array(counts, dtype=np.float64)


def effective_lr(cfg: OptimizerConfig, step: int) -> float:
    if cfg.warmup_steps <= 0 or step >= cfg.warmup_steps:
        return cfg.learning_rate
    return cfg.learning_rate * (step + 1) / cfg.warmup_steps


def _old_logp_all(policy: ToyPolicy, states: np.ndarray) -> np.ndarray:
    rows = policy.theta[states]
    shifted = rows - rows.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def _apply(policy, states, actions, logps, adv, weights, cfg, step, kl_coef):
    old_all = _old_logp_all(policy, states)
    loss, grad, stats = loss_and_grad(
        policy.theta, states, actions, logps, adv, weights, old_all,
        cfg.clip_eps, cfg.entropy_coef, cfg.imitation_coef, kl_coef,
    )
    stats["loss"] = loss
    stats["lr"] = effective_lr(cfg, step)
    stats["n_steps"] = int(states.shape[0])
    if not (np.isfinite(loss) and np.isfinite(grad).all()):
        log.warning("non-finite loss/gradient at step %d; update skipped", step)
        stats["skipped"] = True
        return policy, stats
    stats["skipped"] = False
    new_theta = policy.theta - stats["lr"] * grad
    return policy.with_theta(new_theta), stats


def ppo_update(
    policy: ToyPolicy,
    batch: TrajectoryBatch,
    cfg: OptimizerConfig,
    step: int = 0,
    baseline: StateBaseline | None = None,
):
    """One clipped-surrogate gradient step; returns (new policy, stats)."""
    if batch.snapshot_id != policy.snapshot_id:
        raise StaleBatchError(
            f"batch from snapshot {batch.snapshot_id} is stale for {policy.snapshot_id}"
        )
    if baseline is None:
        baseline = StateBaseline()
    rewards = batch.rewards
    weights_ep = imitation_weights(rewards)
    adv_parts, w_parts = [], []
    for ep, w in zip(batch.episodes, weights_ep):
        base = advantage_broadcast(ep.reward, ep.deltas, cfg.advantage_mode)
        if cfg.advantage_mode == "terminal_broadcast":
            base = base - baseline.values(ep.states)
        adv_parts.append(base)
        w_parts.append(np.full(ep.states.shape[0], w))
    states, actions, logps = batch.flat()
    policy, stats = _apply(
        policy, states, actions, logps,
        np.concatenate(adv_parts), np.concatenate(w_parts),
        cfg, step, cfg.kl_coef,
    )
    for ep in batch.episodes:
        baseline.update(ep.states, np.full(ep.states.shape[0], ep.reward))
    return policy, stats


def grpo_update(
    policy: ToyPolicy,
    batch: TrajectoryBatch,
    cfg: OptimizerConfig,
    step: int = 0,
):
    """GRPO step: group-normalized terminal advantages, no baseline, no KL."""
    if batch.snapshot_id != policy.snapshot_id:
        raise StaleBatchError(
            f"batch from snapshot {batch.snapshot_id} is stale for {policy.snapshot_id}"
        )
    if cfg.group_size < 2:
        raise ConfigError("GRPO needs group_size >= 2 for within-group normalization")
    by_group: dict[int, list] = {}
    for ep in batch.episodes:
        by_group.setdefault(ep.group, []).append(ep)
    kept = []
    for gid, eps in sorted(by_group.items()):
        if len(eps) < 2:
            log.warning("dropping group %d: only %d usable episode(s)", gid, len(eps))
            continue
        advs = grpo_advantages([ep.reward for ep in eps])
        kept.extend(zip(eps, advs))
    if not kept:
        return policy, {"skipped": True, "reason": "no usable groups", "lr": effective_lr(cfg, step)}
    rewards = batch.rewards
    weights_ep = imitation_weights(rewards)
    weight_by_id = {id(ep): w for ep, w in zip(batch.episodes, weights_ep)}
    states = np.concatenate([ep.states for ep, _ in kept])
    actions = np.concatenate([ep.actions for ep, _ in kept])
    logps = np.concatenate([ep.logps for ep, _ in kept])
    adv = np.concatenate([np.full(ep.states.shape[0], a) for ep, a in kept])
    weights = np.concatenate(
        [np.full(ep.states.shape[0], weight_by_id[id(ep)]) for ep, _ in kept]
    )
    return _apply(policy, states, actions, logps, adv, weights, cfg, step, 0.0)
