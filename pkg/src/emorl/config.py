"""Run configuration: defaults, config file, and flag overrides.

Precedence is command line > config file > built-in defaults. Validation
collects every problem it can find and reports them all at once.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .emotion import RewardSpec
from .errors import ConfigError
from .policy.optim import ADVANTAGE_MODES, OptimizerConfig
from .rollout.engine import RolloutConfig
from .scenarios import DIFFICULTIES

ENGINES = ("scripted", "llm")
POLICIES = ("toy", "llm", "replay")
ALGOS = ("ppo", "grpo")
GATEWAY_MODES = ("live", "record", "replay")

DEFAULTS: dict = {
    "engine": "scripted",
    "policy": "toy",
    "scenarios": None,
    "output_dir": "runs",
    "seed": None,
    "difficulty": None,
    "algo": "ppo",
    "steps": 300,
    "snapshot_every": 50,
    "replay_source": None,
    "rollout": {
        "max_turns": 8,
        "group_size": 1,
        "thinking_mode": True,
        "temperature": 1.0,
        "delta_clamp": 10.0,
        "parallelism": 1,
    },
    "reward": {
        "mode": "terminal",
        "format_gate": True,
        "success_threshold": 100.0,
        "failure_threshold_train": 0.0,
        "failure_threshold_eval": 10.0,
    },
    "optimizer": {
        "learning_rate": 100.0,
        "clip_eps": 0.2,
        "entropy_coef": 0.01,
        "imitation_coef": 0.1,
        "kl_coef": 0.0,
        "warmup_steps": 50,
        "batch_size": 32,
        "group_size": 4,
        "advantage_mode": "terminal_broadcast",
    },
    "gateway": {
        "profiles": None,
        "cache_dir": None,
        "mode": "live",
        "simulator_profile": "simulator",
        "judge_profile": "judge",
        "policy_profile": "policy",
    },
}

# Flat override name -> (section path, leaf). group_size fans out to both the
# rollout and the optimizer: it is one knob (episodes per scenario).
_OVERRIDE_PATHS: dict[str, tuple[tuple[str, ...], ...]] = {
    "engine": (("engine",),),
    "policy": (("policy",),),
    "scenarios": (("scenarios",),),
    "output_dir": (("output_dir",),),
    "seed": (("seed",),),
    "difficulty": (("difficulty",),),
    "algo": (("algo",),),
    "steps": (("steps",),),
    "snapshot_every": (("snapshot_every",),),
    "replay_source": (("replay_source",),),
    "max_turns": (("rollout", "max_turns"),),
    "group_size": (("rollout", "group_size"), ("optimizer", "group_size")),
    "thinking_mode": (("rollout", "thinking_mode"),),
    "temperature": (("rollout", "temperature"),),
    "delta_clamp": (("rollout", "delta_clamp"),),
    "parallelism": (("rollout", "parallelism"),),
    "reward_mode": (("reward", "mode"),),
    "format_gate": (("reward", "format_gate"),),
    "success_threshold": (("reward", "success_threshold"),),
    "failure_threshold_train": (("reward", "failure_threshold_train"),),
    "failure_threshold_eval": (("reward", "failure_threshold_eval"),),
    "learning_rate": (("optimizer", "learning_rate"),),
    "clip_eps": (("optimizer", "clip_eps"),),
    "entropy_coef": (("optimizer", "entropy_coef"),),
    "imitation_coef": (("optimizer", "imitation_coef"),),
    "kl_coef": (("optimizer", "kl_coef"),),
    "warmup_steps": (("optimizer", "warmup_steps"),),
    "batch_size": (("optimizer", "batch_size"),),
    "advantage_mode": (("optimizer", "advantage_mode"),),
    "gateway_mode": (("gateway", "mode"),),
    "profiles": (("gateway", "profiles"),),
    "cache_dir": (("gateway", "cache_dir"),),
}


@dataclass(frozen=True)
class GatewaySettings:
    profiles: str | None = None
    cache_dir: str | None = None
    mode: str = "live"
    simulator_profile: str = "simulator"
    judge_profile: str = "judge"
    policy_profile: str = "policy"


@dataclass(frozen=True)
class RunConfig:
    engine: str
    policy: str
    scenarios: str | None
    output_dir: str
    seed: int | None
    difficulty: str | None
    algo: str
    steps: int
    snapshot_every: int
    replay_source: str | None
    rollout: RolloutConfig
    optimizer: OptimizerConfig
    gateway: GatewaySettings
    doc: dict = field(repr=False, default_factory=dict)

    def config_hash(self) -> str:
        body = json.dumps(self.doc, sort_keys=True, default=str)
        return hashlib.sha256(body.encode("utf-8")).hexdigest()[:16]


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def _apply_overrides(doc: dict, overrides: dict) -> dict:
    unknown = set(overrides) - set(_OVERRIDE_PATHS)
    if unknown:
        raise ConfigError(f"unknown override(s): {sorted(unknown)}")
    out = copy.deepcopy(doc)
    for name, value in overrides.items():
        if value is None:
            continue
        for path in _OVERRIDE_PATHS[name]:
            node = out
            for part in path[:-1]:
                node = node.setdefault(part, {})
            node[path[-1]] = value
    return out


def _validate(doc: dict, require_seed: bool) -> list[str]:
    errors = []
    if doc["engine"] not in ENGINES:
        errors.append(f"engine must be one of {ENGINES}, got {doc['engine']!r}")
    if doc["policy"] not in POLICIES:
        errors.append(f"policy must be one of {POLICIES}, got {doc['policy']!r}")
    if doc["algo"] not in ALGOS:
        errors.append(f"algo must be one of {ALGOS}, got {doc['algo']!r}")
    if doc["difficulty"] is not None and doc["difficulty"] not in DIFFICULTIES:
        errors.append(f"difficulty must be one of {DIFFICULTIES}, got {doc['difficulty']!r}")
    if require_seed and doc["seed"] is None:
        errors.append("seed is required (rollout and training must be reproducible)")
    if doc["scenarios"] is not None and not Path(doc["scenarios"]).exists():
        errors.append(f"scenario path does not exist: {doc['scenarios']}")
    if doc["steps"] < 1:
        errors.append(f"steps must be >= 1, got {doc['steps']}")
    if doc["snapshot_every"] < 0:
        errors.append("snapshot_every must be >= 0")
    if doc["algo"] == "grpo" and doc["optimizer"]["group_size"] < 2:
        errors.append(
            "GRPO needs group_size >= 2: within-group normalization is undefined "
            f"for groups of {doc['optimizer']['group_size']}"
        )
    if doc["reward"]["format_gate"] and not doc["rollout"]["thinking_mode"]:
        errors.append("format_gate requires thinking_mode (plain replies would always be gated)")
    if doc["gateway"]["mode"] not in GATEWAY_MODES:
        errors.append(f"gateway mode must be one of {GATEWAY_MODES}")
    needs_gateway = doc["engine"] == "llm" or doc["policy"] == "llm"
    if needs_gateway and not doc["gateway"]["profiles"]:
        errors.append("llm engine/policy needs a gateway profiles file")
    if doc["gateway"]["profiles"] and not Path(doc["gateway"]["profiles"]).exists():
        errors.append(f"gateway profiles file does not exist: {doc['gateway']['profiles']}")
    if doc["policy"] == "replay":
        if not doc["replay_source"]:
            errors.append("replay policy needs replay_source (a transcript file)")
        elif not Path(doc["replay_source"]).exists():
            errors.append(f"replay_source does not exist: {doc['replay_source']}")
    if doc["optimizer"]["advantage_mode"] not in ADVANTAGE_MODES:
        errors.append(f"advantage_mode must be one of {ADVANTAGE_MODES}")
    return errors


def load_run_config(
    config_path: Path | None = None,
    overrides: dict | None = None,
    require_seed: bool = True,
) -> RunConfig:
    doc = copy.deepcopy(DEFAULTS)
    if config_path is not None:
        with open(config_path, "r", encoding="utf-8") as fh:
            file_doc = yaml.safe_load(fh) or {}
        if not isinstance(file_doc, dict):
            raise ConfigError(f"{config_path}: config file must hold a mapping")
        unknown = set(file_doc) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"{config_path}: unknown config key(s): {sorted(unknown)}")
        doc = _merge(doc, file_doc)
    overrides = dict(overrides or {})
    # Turning thinking off implies dropping the format gate unless the gate
    # was forced explicitly.
    if overrides.get("thinking_mode") is False and overrides.get("format_gate") is None:
        overrides["format_gate"] = False
    doc = _apply_overrides(doc, overrides)
    # A per-turn reward mode implies the per-turn advantage spread unless the
    # advantage mode was pinned explicitly.
    if (
        doc["reward"]["mode"] == "per_turn"
        and overrides.get("advantage_mode") is None
        and doc["optimizer"]["advantage_mode"] == "terminal_broadcast"
    ):
        doc["optimizer"]["advantage_mode"] = "per_turn_delta"

    errors = _validate(doc, require_seed=require_seed)
    if errors:
        raise ConfigError(
            "invalid configuration:\n" + "\n".join(f"  - {e}" for e in errors)
        )

    reward = RewardSpec(**doc["reward"])
    rollout = RolloutConfig(reward=reward, **doc["rollout"])
    optimizer = OptimizerConfig(**doc["optimizer"])
    gateway = GatewaySettings(**doc["gateway"])
    return RunConfig(
        engine=doc["engine"],
        policy=doc["policy"],
        scenarios=doc["scenarios"],
        output_dir=doc["output_dir"],
        seed=doc["seed"],
        difficulty=doc["difficulty"],
        algo=doc["algo"],
        steps=doc["steps"],
        snapshot_every=doc["snapshot_every"],
        replay_source=doc["replay_source"],
        rollout=rollout,
        optimizer=optimizer,
        gateway=gateway,
        doc=doc,
    )


def dump_config(cfg: RunConfig, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(cfg.doc, fh, sort_keys=True)
