import json
from pathlib import Path

import pytest

from emorl.errors import ConfigError, ParseFailure
from emorl.judges.annotate import AnnotatedTurn, annotate_transcripts, parse_strategy_labels
from emorl.judges.capability import CapabilityScores, parse_capability_output
from emorl.judges.expression import parse_expression_output
from emorl.judges.metrics import (
    acceptance_rate,
    benchmark_stats,
    strategy_contribution,
    strategy_frequency,
)
from emorl.judges.scc import parse_scc_coordinates, scale_scc
from emorl.simulation.parsing import parse_emotion_output
from emorl.simulation.probes import probe_deltas
from emorl.strategies import APPENDIX7_TO_MAIN5, map_to_main5

from conftest import synth_transcript

FIXTURES = Path(__file__).parent / "fixtures" / "judge_outputs"
EXPECTED = json.loads((FIXTURES / "expected.json").read_text())


def ann(strategies, delta, schema="main5", idx=1):
    return AnnotatedTurn("t", idx, schema, frozenset(strategies), delta)


class TestFixtureCorpus:
    @pytest.mark.parametrize("name,expected", sorted(EXPECTED["emotion"].items()))
    def test_emotion_fixtures(self, name, expected):
        raw = (FIXTURES / name).read_text()
        if expected is None:
            with pytest.raises(ParseFailure):
                parse_emotion_output(raw)
        else:
            assert parse_emotion_output(raw).change == expected

    @pytest.mark.parametrize("name,expected", sorted(EXPECTED["capability"].items()))
    def test_capability_fixtures(self, name, expected):
        raw = (FIXTURES / name).read_text()
        if expected is None:
            with pytest.raises(ParseFailure):
                parse_capability_output(raw)
        else:
            assert parse_capability_output(raw) == CapabilityScores(*expected)

    def test_capability_means_match_hand_tally(self):
        scores = [
            parse_capability_output((FIXTURES / name).read_text())
            for name, exp in sorted(EXPECTED["capability"].items())
            if exp is not None
        ]
        tally = EXPECTED["capability_hand_tally_means"]
        for dim, expected_mean in tally.items():
            mean = sum(getattr(s, dim) for s in scores) / len(scores)
            assert mean == pytest.approx(expected_mean, abs=1e-4)

    @pytest.mark.parametrize("name,expected", sorted(EXPECTED["expression"].items()))
    def test_expression_fixtures(self, name, expected):
        raw = (FIXTURES / name).read_text()
        if expected is None:
            with pytest.raises(ParseFailure):
                parse_expression_output(raw)
        else:
            assert parse_expression_output(raw).overall == expected

    def test_strategy_fixture(self):
        raw = (FIXTURES / "strategy_01.txt").read_text()
        assert parse_strategy_labels(raw, "appendix7") == set(EXPECTED["strategy"]["strategy_01.txt"])

    def test_scc_fixture(self):
        raw = (FIXTURES / "scc_01.txt").read_text()
        assert parse_scc_coordinates(raw) == tuple(EXPECTED["scc"]["scc_01.txt"])


class TestStrategyLabelParsing:
    def test_single_code(self):
        assert parse_strategy_labels("<Strategy> (B-2) restatement</Strategy>", "appendix7") == {"B-2"}

    def test_unknown_labels_dropped(self):
        got = parse_strategy_labels("<Strategy>(B-2), (Z-9), (B-7)</Strategy>", "appendix7")
        assert got == {"B-2"}

    def test_empty_text_empty_set(self):
        assert parse_strategy_labels("", "appendix7") == set()

    def test_unclosed_span_fails(self):
        with pytest.raises(ParseFailure):
            parse_strategy_labels("<Strategy> (B-2) never closed", "appendix7")

    def test_main5_schema_filter(self):
        got = parse_strategy_labels("<Strategy>(C-2), (G-1)</Strategy>", "main5")
        assert got == {"C-2"}  # G-1 is not a main-taxonomy code


class TestTaxonomyMapping:
    def test_default_mapping_targets_exist(self):
        from emorl.strategies import MAIN5, APPENDIX7

        for src, dst in APPENDIX7_TO_MAIN5.items():
            assert src in APPENDIX7 and dst in MAIN5

    def test_questioning_unmapped(self):
        assert map_to_main5({"A-1", "A-5"}) == set()

    def test_example_projection(self):
        assert map_to_main5({"C-2", "G-1"}) == {"B-4", "E-1"}


class TestFrequencyAndContribution:
    def test_frequency_counting(self):
        anns = [ann(["B-2"], 1.0, idx=i) for i in range(4)] + [
            ann([], 0.0, idx=i + 10) for i in range(6)
        ]
        freq = strategy_frequency(anns)
        assert freq["B-2"] == pytest.approx(0.4)
        assert freq["A-1"] == 0.0  # present with zero

    def test_empty_annotations_empty_map(self):
        assert strategy_frequency([]) == {}
        assert strategy_contribution([]) == {}

    def test_multi_label_turn_counts_once_per_strategy(self):
        anns = [ann(["A-1", "B-2"], 2.0), ann(["B-2"], 1.0, idx=2)]
        freq = strategy_frequency(anns)
        assert freq["A-1"] == pytest.approx(0.5)
        assert freq["B-2"] == pytest.approx(1.0)

    def test_contribution_two_point_mean(self):
        anns = [ann(["B-2"], 5.0), ann(["B-2"], -3.0, idx=2)]
        assert strategy_contribution(anns)["B-2"] == pytest.approx(1.0)

    def test_contribution_singleton(self):
        assert strategy_contribution([ann(["D-1"], -4.0)])["D-1"] == -4.0

    def test_zero_instance_strategy_absent(self):
        contrib = strategy_contribution([ann(["B-2"], 1.0)])
        assert "A-1" not in contrib

    def test_mixed_schema_rejected(self):
        anns = [ann(["B-2"], 1.0, schema="main5"), ann(["B-2"], 1.0, schema="appendix7", idx=2)]
        with pytest.raises(ConfigError):
            strategy_frequency(anns)
        with pytest.raises(ConfigError):
            strategy_contribution(anns)

    def test_contribution_scales_linearly(self):
        anns = [ann(["B-2", "C-1"], 3.0), ann(["C-1"], -1.0, idx=2)]
        base = strategy_contribution(anns)
        scaled = strategy_contribution(
            [ann(["B-2", "C-1"], 9.0), ann(["C-1"], -3.0, idx=2)]
        )
        for code, value in base.items():
            assert scaled[code] == pytest.approx(3.0 * value)


class TestBenchmarkStats:
    def test_capping_rule(self):
        trs = [
            synth_transcript([10, 10, 10, 10, 10, 5], reward=1.0),   # 105
            synth_transcript([5], reward=0.55),                       # 55
            synth_transcript([-10, -10, -10, -10, -3], reward=0.07),  # 7
        ]
        stats = benchmark_stats(trs)
        assert stats.score == pytest.approx((100 + 55 + 7) / 3)
        assert stats.success_rate == pytest.approx(1 / 3)
        assert stats.failure_rate == pytest.approx(1 / 3)

    def test_exactly_100_not_success(self):
        trs = [synth_transcript([10] * 5, reward=1.0) for _ in range(3)]
        stats = benchmark_stats(trs)
        assert stats.score == 100.0
        assert stats.success_rate == 0.0

    def test_empty_input_flagged(self):
        stats = benchmark_stats([])
        assert stats.score is None
        assert stats.n_transcripts == 0

    def test_aborts_counted_and_excluded(self):
        trs = [synth_transcript([5], reward=0.55),
               synth_transcript([5], status="aborted")]
        stats = benchmark_stats(trs)
        assert stats.n_transcripts == 1
        assert stats.abort_count == 1

    def test_order_invariance(self):
        trs = [synth_transcript([d], reward=0.5) for d in (3, -8, 10, 0)]
        a = benchmark_stats(trs)
        b = benchmark_stats(list(reversed(trs)))
        assert a == b


class TestAcceptanceRate:
    def test_strict_positivity(self):
        assert acceptance_rate([3, -1, 2, 0]) == 0.5

    def test_all_negative(self):
        assert acceptance_rate([-1, -2]) == 0.0

    def test_probe_comparison_vanilla_vs_challenging(self):
        van = acceptance_rate(probe_deltas("vanilla", n=500, seed=0))
        chal = acceptance_rate(probe_deltas("challenging", n=500, seed=0))
        assert chal < van


class TestSccScaling:
    def test_pm5_rescale(self):
        point = scale_scc(-0.9, -0.67, "pm5")
        assert (point.x, point.y) == (-4.5, pytest.approx(-3.35))

    def test_origin_fixed_point(self):
        assert (scale_scc(0.0, 0.0, "pm1").x, scale_scc(0.0, 0.0, "pm5").y) == (0.0, 0.0)

    def test_out_of_range_clipped_with_warning(self, caplog):
        import logging

        with caplog.at_level(logging.WARNING):
            point = scale_scc(1.4, -2.0, "pm1")
        assert (point.x, point.y) == (1.0, -1.0)
        assert "clipping" in caplog.text

    def test_parse_picks_last_pair(self):
        raw = "intermediate (0.2, 0.3) ... final answer: (-0.5, 0.75)"
        assert parse_scc_coordinates(raw) == (-0.5, 0.75)

    def test_parse_failure_without_pair(self):
        with pytest.raises(ParseFailure):
            parse_scc_coordinates("no coordinates here")


class TestKeywordAnnotator:
    def test_scripted_transcripts_annotated_offline(self):
        from emorl.policy.toy import ToyPolicy
        from emorl.rollout import RolloutConfig, run_batch
        from emorl.scenarios import builtin_scenarios
        from emorl.simulation.scripted import ScriptedEngine

        trs = run_batch(builtin_scenarios()[:4], ToyPolicy(), ScriptedEngine(),
                        RolloutConfig(), 13)
        annotations, skipped = annotate_transcripts(trs, schema="main5", annotator="keyword")
        assert skipped == 0
        judged_turns = sum(len(t.model_turns()) for t in trs)
        assert len(annotations) == judged_turns
        # scripted deltas recorded verbatim
        by_id = {(a.transcript_id, a.turn_index): a for a in annotations}
        for tr in trs:
            for i, turn in enumerate(tr.turns):
                if turn.speaker == "model":
                    assert by_id[(tr.transcript_id, i)].emo_change == turn.delta
