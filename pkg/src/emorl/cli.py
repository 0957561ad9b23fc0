"""Operator surface: rollout, train, annotate, and report commands.

Flag precedence is command line > config file > defaults; every flag is also
readable from an environment variable with the EMORL prefix (click's
auto-envvar naming, e.g. EMORL_TRAIN_STEPS). Exit codes are stable:
0 success, 1 validation, 2 runtime, 3 transport.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from .config import RunConfig, dump_config, load_run_config
from .errors import ConfigError, EmorlError, TransportFailure
from .gateway import Gateway, load_profiles
from .judges.annotate import annotate_transcripts, load_annotations, save_annotations
from .judges.capability import score_transcripts
from .judges.expression import expression_level
from .judges.metrics import benchmark_stats, strategy_contribution, strategy_frequency
from .judges.reports import (
    provenance_line,
    write_benchmark_csv,
    write_capabilities_csv,
    write_contribution_csv,
    write_frequency_csv,
    write_scc_csv,
)
from .judges.scc import build_model_profile, scc_place
from .policy.ports import LlmPolicy, ReplayPolicy
from .policy.toy import ToyPolicy
from .policy.training import config_hash, load_snapshot, train
from .rollout.engine import run_batch
from .rollout.transcripts import load_transcripts, save_transcripts, transcripts_digest
from .scenarios import TOPICS, Scenario, builtin_scenarios, load_scenarios
from .simulation.llm import LlmEngine
from .simulation.scripted import ScriptedEngine

log = logging.getLogger(__name__)


def _build_gateway(cfg: RunConfig) -> Gateway | None:
    gw = cfg.gateway
    if not gw.profiles:
        return None
    return Gateway(
        load_profiles(Path(gw.profiles)),
        mode=gw.mode,
        cache_dir=Path(gw.cache_dir) if gw.cache_dir else None,
    )


def _build_engine(cfg: RunConfig, gateway: Gateway | None):
    if cfg.engine == "scripted":
        return ScriptedEngine()
    return LlmEngine(gateway, profile=cfg.gateway.simulator_profile)


def _build_policy(cfg: RunConfig, gateway: Gateway | None, snapshot: Path | None):
    if cfg.policy == "toy":
        if snapshot is not None:
            return load_snapshot(snapshot)["policy"]
        return ToyPolicy()
    if cfg.policy == "llm":
        return LlmPolicy(gateway, profile=cfg.gateway.policy_profile,
                         temperature=cfg.rollout.temperature)
    return ReplayPolicy(Path(cfg.replay_source))


def _load_scenarios(cfg: RunConfig) -> list[Scenario]:
    if cfg.scenarios is None:
        scenarios = builtin_scenarios()
    else:
        scenarios = load_scenarios(Path(cfg.scenarios))
    if cfg.difficulty is not None:
        scenarios = [
            Scenario(
                scenario_id=s.scenario_id, persona=s.persona, background=s.background,
                goal=s.goal, topic_id=s.topic_id, difficulty=cfg.difficulty,
                initial_emotion=s.initial_emotion,
            )
            for s in scenarios
        ]
    return scenarios


def _run_dir(cfg: RunConfig, command: str, out: str | None) -> Path:
    if out is not None:
        path = Path(out)
    else:
        base = Path(cfg.output_dir)
        stem = f"{command}_{cfg.seed}_{cfg.config_hash()[:8]}"
        path = base / stem
        suffix = 2
        while path.exists():
            path = base / f"{stem}-{suffix}"
            suffix += 1
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_digests(run_dir: Path) -> None:
    import hashlib

    digests = {}
    for f in sorted(run_dir.iterdir()):
        if f.is_file() and f.name != "digests.json":
            digests[f.name] = hashlib.sha256(f.read_bytes()).hexdigest()
    with open(run_dir / "digests.json", "w", encoding="utf-8") as fh:
        json.dump(digests, fh, indent=2, sort_keys=True)
        fh.write("\n")


_common_options = [
    click.option("--config", "config_path", type=click.Path(exists=True), default=None,
                 help="YAML config file; flags override its values."),
    click.option("--scenarios", default=None, help="Scenario file or directory."),
    click.option("--seed", type=int, default=None, help="Master seed."),
    click.option("--out", default=None, help="Run directory (default: derived)."),
    click.option("--engine", type=click.Choice(["scripted", "llm"]), default=None),
    click.option("--policy", type=click.Choice(["toy", "llm", "replay"]), default=None),
    click.option("--policy-snapshot", type=click.Path(exists=True), default=None,
                 help="Toy-policy snapshot to roll out."),
    click.option("--replay-source", default=None, help="Transcript file for the replay policy."),
    click.option("--difficulty", type=click.Choice(["vanilla", "challenging"]), default=None),
    click.option("--max-turns", type=int, default=None),
    click.option("--group-size", type=int, default=None),
    click.option("--thinking/--no-thinking", "thinking_mode", default=None),
    click.option("--format-gate/--no-format-gate", "format_gate", default=None),
    click.option("--reward-mode", type=click.Choice(["terminal", "per_turn"]), default=None),
    click.option("--success-threshold", type=float, default=None),
    click.option("--failure-threshold-train", type=float, default=None),
    click.option("--failure-threshold-eval", type=float, default=None),
    click.option("--delta-clamp", type=float, default=None),
    click.option("--temperature", type=float, default=None),
    click.option("--parallelism", type=int, default=None),
    click.option("--profiles", default=None, help="Gateway profiles file."),
    click.option("--cache-dir", default=None, help="Gateway cache directory."),
    click.option("--gateway-mode", type=click.Choice(["live", "record", "replay"]), default=None),
    click.option("--replay", "replay_flag", is_flag=True, default=False,
                 help="Shortcut for --gateway-mode replay."),
]


def _with_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn
    return wrap


def _overrides(kwargs: dict) -> dict:
    kwargs = dict(kwargs)
    if kwargs.pop("replay_flag", False):
        kwargs["gateway_mode"] = "replay"
    kwargs.pop("config_path", None)
    kwargs.pop("out", None)
    kwargs.pop("policy_snapshot", None)
    return {k: v for k, v in kwargs.items() if v is not None}


@click.group()
@click.option("-v", "--verbose", is_flag=True, default=False)
def cli(verbose):
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )


@cli.command()
@_with_options(_common_options)
def rollout(config_path, out, policy_snapshot, **kwargs):
    """Roll out a batch of episodes and write transcripts + benchmark stats."""
    cfg = load_run_config(config_path, _overrides(kwargs))
    scenarios = _load_scenarios(cfg)
    gateway = _build_gateway(cfg)
    engine = _build_engine(cfg, gateway)
    policy = _build_policy(cfg, gateway, Path(policy_snapshot) if policy_snapshot else None)

    transcripts = run_batch(scenarios, policy, engine, cfg.rollout, cfg.seed)
    run_dir = _run_dir(cfg, "rollout", out)
    transcripts_path = run_dir / "transcripts.jsonl"
    save_transcripts(transcripts_path, transcripts)
    dump_config(cfg, run_dir / "config.yaml")

    stats = benchmark_stats(
        transcripts,
        success_threshold=cfg.rollout.reward.success_threshold,
        failure_threshold=cfg.rollout.reward.failure_threshold_eval,
    )
    prov = provenance_line(cfg.config_hash(), transcripts_digest(transcripts_path))
    write_benchmark_csv(run_dir / "benchmark.csv", stats, prov)
    _write_digests(run_dir)

    score = "undefined" if stats.score is None else f"{stats.score:.1f}"
    click.echo(
        f"Score {score} | Success {stats.success_rate:.0%} | "
        f"Failure {stats.failure_rate:.0%} | episodes {stats.n_transcripts} "
        f"(aborted {stats.abort_count})"
    )
    click.echo(f"run directory: {run_dir}")


@cli.command(name="train")
@_with_options(_common_options)
@click.option("--algo", type=click.Choice(["ppo", "grpo"]), default=None)
@click.option("--steps", type=int, default=None)
@click.option("--learning-rate", type=float, default=None)
@click.option("--clip-eps", type=float, default=None)
@click.option("--entropy-coef", type=float, default=None)
@click.option("--imitation-coef", type=float, default=None)
@click.option("--kl-coef", type=float, default=None)
@click.option("--warmup-steps", type=int, default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--advantage-mode", type=click.Choice(["terminal_broadcast", "per_turn_delta"]),
              default=None)
@click.option("--snapshot-every", type=int, default=None)
@click.option("--resume", type=click.Path(exists=True), default=None,
              help="Snapshot to resume from (config hash must match).")
def train_cmd(config_path, out, policy_snapshot, resume, **kwargs):
    """Train the toy policy against the configured environment."""
    if policy_snapshot is not None:
        raise ConfigError("use --resume to continue training from a snapshot")
    cfg = load_run_config(config_path, _overrides(kwargs))
    if cfg.policy != "toy":
        raise ConfigError("training requires the toy policy")
    scenarios = _load_scenarios(cfg)
    gateway = _build_gateway(cfg)
    engine = _build_engine(cfg, gateway)
    run_dir = _run_dir(cfg, f"train-{cfg.algo}", out)
    dump_config(cfg, run_dir / "config.yaml")

    result = train(
        scenarios,
        cfg.algo,
        engine,
        cfg.rollout,
        cfg.optimizer,
        steps=cfg.steps,
        master_seed=cfg.seed,
        out_dir=run_dir,
        snapshot_every=cfg.snapshot_every,
        resume_from=Path(resume) if resume else None,
    )
    _write_digests(run_dir)
    if result.curve:
        first, last = result.curve[0], result.curve[-1]
        click.echo(
            f"{cfg.algo} {len(result.curve)} steps: mean reward "
            f"{first['mean_reward']:.3f} -> {last['mean_reward']:.3f}, "
            f"mean emotion {first['mean_emotion']:.1f} -> {last['mean_emotion']:.1f}"
        )
    if result.aborted:
        raise EmorlError("training aborted on non-finite statistics; last good snapshot saved")
    click.echo(f"run directory: {run_dir}")


@cli.command()
@click.option("--transcripts", "transcripts_path", type=click.Path(exists=True), required=True)
@click.option("--schema", type=click.Choice(["main5", "appendix7"]), default="main5")
@click.option("--annotator", type=click.Choice(["keyword", "llm"]), default="keyword")
@click.option("--out", default=None, help="Output annotations file (.jsonl).")
@click.option("--profiles", default=None)
@click.option("--cache-dir", default=None)
@click.option("--gateway-mode", type=click.Choice(["live", "record", "replay"]), default=None)
@click.option("--replay", "replay_flag", is_flag=True, default=False)
def annotate(transcripts_path, schema, annotator, out, **kwargs):
    """Annotate model turns with support strategies."""
    overrides = _overrides(kwargs)
    gateway = None
    if annotator == "llm":
        cfg = load_run_config(None, overrides, require_seed=False)
        if not cfg.gateway.profiles:
            raise ConfigError("llm annotator needs --profiles")
        gateway = _build_gateway(cfg)
    transcripts = list(load_transcripts(Path(transcripts_path)))
    annotations, skipped = annotate_transcripts(
        transcripts, schema=schema, annotator=annotator, gateway=gateway
    )
    out_path = Path(out) if out else Path(transcripts_path).with_suffix(".annotations.jsonl")
    count = save_annotations(out_path, annotations)
    click.echo(f"wrote {count} annotations to {out_path} (skipped {skipped} turns)")


@cli.command()
@click.option("--transcripts", "transcripts_path", type=click.Path(exists=True), required=True)
@click.option("--annotations", "annotations_path", type=click.Path(exists=True), default=None)
@click.option("--out", default=None, help="Report directory (default: alongside transcripts).")
@click.option("--sc", "want_sc", is_flag=True, help="Strategy frequency + contribution CSVs.")
@click.option("--benchmark", "want_benchmark", is_flag=True, default=False)
@click.option("--capabilities", "want_capabilities", is_flag=True, default=False)
@click.option("--scc", "want_scc", is_flag=True, default=False)
@click.option("--expression", "want_expression", is_flag=True, default=False)
@click.option("--scale", type=click.Choice(["pm1", "pm5"]), default="pm5")
@click.option("--label", default=None, help="Label for SCC points (default: file stem).")
@click.option("--profiles", default=None)
@click.option("--cache-dir", default=None)
@click.option("--gateway-mode", type=click.Choice(["live", "record", "replay"]), default=None)
@click.option("--replay", "replay_flag", is_flag=True, default=False)
def report(transcripts_path, annotations_path, out, want_sc, want_benchmark,
           want_capabilities, want_scc, want_expression, scale, label, **kwargs):
    """Emit CSV reports from transcripts and annotations."""
    overrides = _overrides(kwargs)
    cfg = load_run_config(None, overrides, require_seed=False)
    transcripts_path = Path(transcripts_path)
    transcripts = list(load_transcripts(transcripts_path))
    out_dir = Path(out) if out else transcripts_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    prov = provenance_line(cfg.config_hash(), transcripts_digest(transcripts_path))
    label = label or transcripts_path.stem

    if not any((want_sc, want_benchmark, want_capabilities, want_scc, want_expression)):
        want_benchmark = True

    annotations = None
    if annotations_path is not None:
        annotations = load_annotations(Path(annotations_path))

    written = []
    if want_benchmark:
        write_benchmark_csv(out_dir / "benchmark.csv", benchmark_stats(transcripts), prov)
        written.append("benchmark.csv")
    if want_sc:
        if annotations is None:
            raise ConfigError("--sc needs --annotations (run the annotate command first)")
        write_frequency_csv(out_dir / "strategy_frequency.csv",
                            strategy_frequency(annotations), prov)
        write_contribution_csv(out_dir / "strategy_contribution.csv",
                               strategy_contribution(annotations), prov)
        written += ["strategy_frequency.csv", "strategy_contribution.csv"]

    needs_gateway = want_capabilities or want_scc or want_expression
    gateway = None
    if needs_gateway:
        if not cfg.gateway.profiles:
            raise ConfigError("judge-backed reports need --profiles")
        gateway = _build_gateway(cfg)

    if want_capabilities:
        rows, excluded = score_transcripts(transcripts, gateway, cfg.gateway.judge_profile)
        write_capabilities_csv(out_dir / "capabilities.csv", rows, prov)
        written.append(f"capabilities.csv ({excluded} excluded)")
    if want_scc:
        if annotations is None:
            raise ConfigError("--scc needs --annotations for the strategy distribution")
        profile_text = build_model_profile(transcripts, gateway, cfg.gateway.judge_profile,
                                           label=label)
        point = scc_place(profile_text, strategy_frequency(annotations), gateway,
                          scale=scale, judge_profile=cfg.gateway.judge_profile, label=label)
        write_scc_csv(out_dir / "scc.csv", [point], prov)
        written.append("scc.csv")
    if want_expression:
        probes = []
        for tr in transcripts:
            if tr.status != "complete":
                continue
            for turn in tr.turns[1:]:
                if turn.speaker == "user" and turn.thought:
                    probes.append((TOPICS[tr.topic_id], turn.thought, turn.text))
        level, dropped = expression_level(probes, gateway, cfg.gateway.judge_profile)
        with open(out_dir / "expression.csv", "w", encoding="utf-8") as fh:
            fh.write(f"# {prov}\n")
            fh.write("expression_level,probes,dropped\n")
            value = "undefined" if level is None else f"{level:.4f}"
            fh.write(f"{value},{len(probes)},{dropped}\n")
        written.append("expression.csv")

    click.echo(f"wrote {', '.join(written)} to {out_dir}")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False, auto_envvar_prefix="EMORL")
        return 0
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        return 1
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        return 1
    except TransportFailure as exc:
        click.echo(f"transport error: {exc}", err=True)
        return 3
    except EmorlError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        log.exception("unexpected error")
        click.echo(f"unexpected error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
