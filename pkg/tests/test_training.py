import json

import numpy as np
import pytest

from emorl.errors import ConfigError
from emorl.policy.optim import OptimizerConfig
from emorl.policy.toy import ToyPolicy
from emorl.policy.training import (
    config_hash,
    load_snapshot,
    save_snapshot,
    train,
    write_metrics,
    write_plot_data,
)
from emorl.policy.optim import StateBaseline
from emorl.rollout import RolloutConfig
from emorl.scenarios import builtin_scenarios
from emorl.simulation.scripted import ScriptedEngine


@pytest.fixture(scope="module")
def scenarios():
    return builtin_scenarios()


def short_cfg(**kwargs):
    defaults = dict(batch_size=16, warmup_steps=5)
    defaults.update(kwargs)
    return OptimizerConfig(**defaults)


class TestTrainLoop:
    def test_zero_learning_rate_curve_is_flat(self, scenarios):
        res = train(scenarios, "ppo", ScriptedEngine(), RolloutConfig(),
                    short_cfg(learning_rate=0.0), steps=12, master_seed=3)
        entropies = {round(r["entropy"], 12) for r in res.curve}
        assert entropies == {round(float(np.log(12)), 12)}
        rewards = [r["mean_reward"] for r in res.curve]
        assert max(rewards) - min(rewards) < 0.15  # batch noise only

    def test_entropy_bonus_keeps_entropy_higher(self, scenarios):
        with_bonus = train(scenarios, "ppo", ScriptedEngine(), RolloutConfig(),
                           short_cfg(entropy_coef=0.01), steps=60, master_seed=4)
        without = train(scenarios, "ppo", ScriptedEngine(), RolloutConfig(),
                        short_cfg(entropy_coef=0.0), steps=60, master_seed=4)
        assert without.curve[-1]["entropy"] < with_bonus.curve[-1]["entropy"]

    def test_grpo_uses_groups(self, scenarios):
        res = train(scenarios, "grpo", ScriptedEngine(), RolloutConfig(),
                    short_cfg(group_size=4), steps=3, master_seed=5)
        assert len(res.curve) == 3

    def test_unknown_algo_rejected(self, scenarios):
        with pytest.raises(ConfigError):
            train(scenarios, "sarsa", ScriptedEngine(), RolloutConfig(),
                  short_cfg(), steps=1, master_seed=1)

    def test_curve_records_have_expected_fields(self, scenarios):
        res = train(scenarios, "ppo", ScriptedEngine(), RolloutConfig(),
                    short_cfg(), steps=2, master_seed=6)
        record = res.curve[0]
        for key in ("step", "mean_emotion", "mean_reward", "clip_fraction",
                    "entropy", "mean_turns", "mean_output_length", "loss", "lr"):
            assert key in record

    def test_deterministic_given_seed(self, scenarios):
        a = train(scenarios, "ppo", ScriptedEngine(), RolloutConfig(),
                  short_cfg(), steps=5, master_seed=11)
        b = train(scenarios, "ppo", ScriptedEngine(), RolloutConfig(),
                  short_cfg(), steps=5, master_seed=11)
        assert a.curve == b.curve
        np.testing.assert_array_equal(a.policy.theta, b.policy.theta)


class TestSnapshots:
    def test_round_trip(self, tmp_path):
        policy = ToyPolicy(np.random.default_rng(0).normal(size=(120, 12)))
        baseline = StateBaseline()
        baseline.update(np.array([3, 3, 7]), np.array([0.5, 0.7, 0.2]))
        path = tmp_path / "snap.npz"
        save_snapshot(path, policy, baseline, step=42, cfg_hash="abc", algo="ppo")
        snap = load_snapshot(path)
        np.testing.assert_array_equal(snap["policy"].theta, policy.theta)
        assert snap["policy"].snapshot_id == policy.snapshot_id
        assert snap["step"] == 42
        assert snap["config_hash"] == "abc"
        np.testing.assert_array_equal(snap["baseline_sums"], baseline.sums)

    def test_resume_requires_matching_config(self, tmp_path, scenarios):
        cfg = short_cfg()
        res = train(scenarios, "ppo", ScriptedEngine(), RolloutConfig(), cfg,
                    steps=2, master_seed=1, out_dir=tmp_path / "run")
        altered = short_cfg(learning_rate=99.0)
        with pytest.raises(ConfigError, match="hash"):
            train(scenarios, "ppo", ScriptedEngine(), RolloutConfig(), altered,
                  steps=1, master_seed=1, resume_from=res.final_snapshot)

    def test_resume_continues_from_step(self, tmp_path, scenarios):
        cfg = short_cfg()
        res = train(scenarios, "ppo", ScriptedEngine(), RolloutConfig(), cfg,
                    steps=3, master_seed=1, out_dir=tmp_path / "run")
        cont = train(scenarios, "ppo", ScriptedEngine(), RolloutConfig(), cfg,
                     steps=2, master_seed=1, resume_from=res.final_snapshot)
        assert cont.curve[0]["step"] == 3

    def test_config_hash_sensitivity(self):
        a = config_hash("ppo", RolloutConfig(), short_cfg())
        b = config_hash("ppo", RolloutConfig(), short_cfg(learning_rate=1.0))
        c = config_hash("grpo", RolloutConfig(), short_cfg())
        assert a != b and a != c


class TestArtifacts:
    def test_metrics_and_plot_files(self, tmp_path, scenarios):
        res = train(scenarios, "ppo", ScriptedEngine(), RolloutConfig(),
                    short_cfg(), steps=2, master_seed=2, out_dir=tmp_path)
        lines = (tmp_path / "metrics.jsonl").read_text().strip().splitlines()
        assert len(lines) == 2
        assert json.loads(lines[0])["step"] == 0
        emotion_csv = (tmp_path / "plot_emotion.csv").read_text().splitlines()
        assert emotion_csv[0] == "step,mean_emotion"
        assert len(emotion_csv) == 3
        length_csv = (tmp_path / "plot_output_length.csv").read_text().splitlines()
        assert length_csv[0] == "step,mean_output_length"
        assert (tmp_path / "snapshot_final.npz").exists()
