import math

import pytest
from hypothesis import given, strategies as st

from emorl.emotion import (
    EmotionBucket,
    EmotionState,
    RewardSpec,
    TerminationCause,
    apply_delta,
    bucket_of,
    check_think_format,
    classify_outcome,
    final_reward,
    per_turn_rewards,
)
from emorl.errors import ParseFailure

from conftest import synth_transcript


class TestApplyDelta:
    def test_direct_addition(self):
        state = apply_delta(EmotionState(50.0), 7.0, clamp=10.0)
        assert state.value == 57.0
        assert state.deltas == (7.0,)

    def test_clip_at_clamp(self):
        state = apply_delta(EmotionState(50.0), 25.0, clamp=10.0)
        assert state.value == 60.0
        assert state.deltas == (10.0,)

    def test_no_floor_below_zero(self):
        state = apply_delta(EmotionState(5.0), -10.0, clamp=10.0)
        assert state.value == -5.0
        assert state.bucket is EmotionBucket.F

    def test_nonfinite_delta_rejected(self):
        with pytest.raises(ParseFailure):
            apply_delta(EmotionState(50.0), float("nan"))
        with pytest.raises(ParseFailure):
            apply_delta(EmotionState(50.0), math.inf)

    def test_invalid_clamp(self):
        with pytest.raises(ValueError):
            apply_delta(EmotionState(50.0), 1.0, clamp=0.0)

    @given(st.lists(st.floats(-30, 30), max_size=12), st.floats(1, 15))
    def test_value_is_initial_plus_deltas(self, deltas, clamp):
        state = EmotionState(50.0)
        for d in deltas:
            state = apply_delta(state, d, clamp)
        assert state.value == pytest.approx(50.0 + sum(state.deltas))
        assert all(abs(d) <= clamp for d in state.deltas)


class TestBucketOf:
    @pytest.mark.parametrize(
        "value,bucket",
        [
            (100, EmotionBucket.S),
            (55, EmotionBucket.B),
            (9.99, EmotionBucket.F),
            (70, EmotionBucket.A),
            (40, EmotionBucket.B),
            (10, EmotionBucket.C),
            (120, EmotionBucket.S),
            (-3, EmotionBucket.F),
        ],
    )
    def test_bands(self, value, bucket):
        assert bucket_of(value) is bucket

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            bucket_of(float("nan"))

    @given(st.floats(-200, 300, allow_nan=False))
    def test_total_partition(self, value):
        assert bucket_of(value) in EmotionBucket


class TestThinkFormat:
    def test_canonical(self):
        ok, thought, reply = check_think_format("<think>plan</think>Hey, that sounds rough.")
        assert ok and thought == "plan" and reply == "Hey, that sounds rough."

    def test_no_tags(self):
        assert not check_think_format("Hey!").valid

    def test_nested_open_tag(self):
        assert not check_think_format("<think>a<think>b</think>c").valid

    def test_text_before_block(self):
        assert not check_think_format("hi <think>a</think>reply").valid

    def test_whitespace_before_block_ok(self):
        assert check_think_format("  \n<think>a</think>reply").valid

    def test_empty_reply(self):
        assert not check_think_format("<think>a</think>   ").valid

    def test_closing_before_opening(self):
        assert not check_think_format("</think>oops<think>").valid


class TestFinalReward:
    def test_full_score(self):
        tr = synth_transcript([10, 10, 10, 10, 10])
        assert final_reward(tr, RewardSpec()) == 1.0

    def test_direct_division(self):
        tr = synth_transcript([5, 10])  # 50 -> 65
        assert final_reward(tr, RewardSpec()) == pytest.approx(0.65)

    def test_gate_zeroes_reward(self):
        tr = synth_transcript([10, 10, 10, 10, 2], break_format_at=2)  # e_T = 92
        assert tr.e_T == pytest.approx(92)
        assert final_reward(tr, RewardSpec(format_gate=True)) == 0.0
        assert final_reward(tr, RewardSpec(format_gate=False)) == pytest.approx(0.92)

    def test_unterminated_rejected(self):
        tr = synth_transcript([5], status="aborted")
        with pytest.raises(ValueError):
            final_reward(tr, RewardSpec())

    def test_floor_at_zero(self):
        tr = synth_transcript([-10] * 6)  # 50 -> -10
        assert final_reward(tr, RewardSpec()) == 0.0

    @given(st.lists(st.floats(-10, 10), min_size=1, max_size=10))
    def test_reward_bounds_and_monotonicity(self, deltas):
        tr = synth_transcript(deltas)
        r = final_reward(tr, RewardSpec())
        assert 0.0 <= r <= 1.0
        higher = synth_transcript(deltas + [5.0])
        if higher.e_T >= tr.e_T:
            assert final_reward(higher, RewardSpec()) >= r


class TestPerTurnRewards:
    def test_cumulative(self):
        tr = synth_transcript([5, -3])
        assert per_turn_rewards(tr) == [55, 52]

    def test_zero_delta(self):
        tr = synth_transcript([0])
        assert per_turn_rewards(tr) == [50]

    def test_matches_cumulative_sum_oracle(self):
        deltas = [10, 10, 10, 10, 10]
        tr = synth_transcript(deltas, initial=55)
        expected = []
        acc = 55.0
        for d in deltas:
            acc += d
            expected.append(acc)
        assert per_turn_rewards(tr) == expected == [65, 75, 85, 95, 105]

    def test_last_equals_terminal(self):
        tr = synth_transcript([3, -2, 8])
        assert per_turn_rewards(tr)[-1] == tr.e_T

    def test_empty_rejected(self):
        tr = synth_transcript([])
        with pytest.raises(ValueError):
            per_turn_rewards(tr)


class TestClassifyOutcome:
    def test_success_above_100(self):
        tr = synth_transcript([10, 10, 10, 10, 10, 5])  # 105
        assert classify_outcome(tr, RewardSpec()) is TerminationCause.Success

    def test_failure_below_10(self):
        tr = synth_transcript([-10, -10, -10, -10, -3])  # 7
        assert classify_outcome(tr, RewardSpec()) is TerminationCause.Failure

    def test_max_turns_in_between(self):
        tr = synth_transcript([1, -1] * 5)  # 50
        assert classify_outcome(tr, RewardSpec()) is TerminationCause.MaxTurns

    def test_exactly_100_is_not_success(self):
        tr = synth_transcript([10] * 5)
        assert classify_outcome(tr, RewardSpec()) is TerminationCause.MaxTurns

    def test_format_violation_wins(self):
        tr = synth_transcript([10] * 6, break_format_at=0)  # 110, but gated
        assert classify_outcome(tr, RewardSpec()) is TerminationCause.FormatViolation

    def test_unterminated_rejected(self):
        tr = synth_transcript([5], status="aborted")
        with pytest.raises(ValueError):
            classify_outcome(tr, RewardSpec())


class TestRewardSpec:
    def test_threshold_ordering_enforced(self):
        with pytest.raises(ValueError):
            RewardSpec(success_threshold=5.0)
        with pytest.raises(ValueError):
            RewardSpec(failure_threshold_train=20.0)

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            RewardSpec(mode="weekly")
