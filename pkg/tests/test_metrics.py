import dataclasses

import pytest

from siot_trust.behavior import BehaviorModel, Kind
from siot_trust.config import ConfigError, ExperimentConfig
from siot_trust.engine import TrustSnapshot
from siot_trust.metrics import (
    count_reversals,
    default_checkpoints,
    detection_accuracy,
    malicious_sweep,
    scheme_comparison,
    select_tracked,
    trajectory_series,
)
from siot_trust.trace import GeneratorConfig
from siot_trust.trust import Label


def snapshot(scores, at=100):
    labels = {o: Label.TRUSTWORTHY if s > 0.5 else Label.UNTRUSTWORTHY for o, s in scores.items()}
    return TrustSnapshot(at, {}, dict(scores), labels, {o: None for o in scores}, 0.5)


def fifteen_bad_135_good():
    behaviors = {o: BehaviorModel(Kind.MALICIOUS if o < 15 else Kind.GOOD) for o in range(150)}
    return behaviors


class TestDetection:
    def test_fourteen_of_fifteen(self):
        behaviors = fifteen_bad_135_good()
        scores = {o: (0.3 if o < 14 else 0.8) for o in range(150)}
        rep = detection_accuracy(snapshot(scores), behaviors)
        assert rep.detected == 14 and rep.true_malicious == 15
        assert rep.accuracy == pytest.approx(0.933, abs=1e-3)
        assert rep.false_positives == 0 and rep.missed == 1

    def test_no_malicious(self):
        behaviors = {o: BehaviorModel() for o in range(5)}
        rep = detection_accuracy(snapshot({o: 0.7 for o in range(5)}), behaviors)
        assert rep.accuracy is None and rep.false_positive_rate == 0.0

    def test_perfect(self):
        behaviors = fifteen_bad_135_good()
        scores = {o: (0.2 if o < 15 else 0.9) for o in range(150)}
        rep = detection_accuracy(snapshot(scores), behaviors)
        assert rep.accuracy == 1.0 and rep.false_positive_rate == 0.0

    def test_tie_counts_as_detected(self):
        behaviors = {0: BehaviorModel(Kind.MALICIOUS), 1: BehaviorModel()}
        rep = detection_accuracy(snapshot({0: 0.5, 1: 0.5}), behaviors)
        assert rep.detected == 1 and rep.false_positives == 1

    def test_dynamic_kinds_in_family(self):
        behaviors = {0: BehaviorModel(Kind.ON_OFF), 1: BehaviorModel(Kind.GOOD_TO_MALICIOUS),
                     2: BehaviorModel(Kind.MALICIOUS_TO_GOOD)}
        rep = detection_accuracy(snapshot({0: 0.4, 1: 0.4, 2: 0.4}), behaviors)
        assert rep.true_malicious == 2 and rep.good_count == 1


class TestTrajectory:
    def test_shape(self):
        snaps = [snapshot({o: 0.1 * o for o in range(20)}, at=k) for k in range(1, 6)]
        rows = trajectory_series(snaps, range(10))
        assert len(rows) == 50
        assert rows[0].checkpoint == 1 and rows[-1].checkpoint == 5

    def test_empty_nodes(self):
        assert trajectory_series([snapshot({0: 0.5})], []) == []

    def test_unknown_node(self):
        with pytest.raises(KeyError, match="unknown node"):
            trajectory_series([snapshot({0: 0.5})], [3])


class TestReversals:
    @pytest.mark.parametrize("series,expected", [
        ([], 0),
        ([0.5] * 10, 0),
        ([0.1, 0.2, 0.3, 0.4], 0),
        ([0.2, 0.8, 0.2, 0.8, 0.2], 3),
        ([0.5, 0.52, 0.49, 0.51, 0.5], 0),
        ([0.5, 0.7, 0.68, 0.72, 0.3], 1),
    ])
    def test_cases(self, series, expected):
        assert count_reversals(series) == expected


def test_default_checkpoints():
    assert default_checkpoints(20000) == [4000, 8000, 12000, 16000, 20000]
    assert default_checkpoints(3) == [1, 2, 3]


def test_select_tracked():
    behaviors = fifteen_bad_135_good()
    picked = select_tracked(behaviors, 5, seed=1)
    assert len(picked) == 10
    assert sum(o < 15 for o in picked) == 5
    assert picked == select_tracked(behaviors, 5, seed=1)


SMALL_GEN = GeneratorConfig(object_count=40, target_event_count=3000, mean_friends_per_object=5)


def small_cfg(**kw):
    return ExperimentConfig(generator=SMALL_GEN, **kw)


class TestComparison:
    def test_rows(self):
        rows, reports = scheme_comparison(small_cfg(track_per_class=2))
        assert len(reports) == 3
        assert len(rows) == 3 * 4 * 5

    def test_ws1_not_below_mean_for_good_node(self):
        cfg = small_cfg(track_per_class=3)
        rows, _ = scheme_comparison(dataclasses.replace(cfg, schemes=("ws1", "mean")))
        final = max(r.checkpoint for r in rows)
        by = {(r.scheme, r.node): r.score for r in rows if r.checkpoint == final}
        good = [n for (s, n) in by if s == "ws1" and by[(s, n)] > 0.5]
        assert good
        assert sum(by[("ws1", n)] >= by[("mean", n)] for n in good) >= len(good) / 2

    def test_needs_two(self):
        with pytest.raises(ConfigError):
            scheme_comparison(small_cfg(schemes=("ws1",)))


class TestSweep:
    def test_edges(self):
        rows = malicious_sweep(small_cfg(sweep=(0.0, 1.0), schemes=("ws1", "mean")))
        assert [(r.fraction, r.scheme) for r in rows] == [
            (0.0, "mean"), (0.0, "ws1"), (1.0, "mean"), (1.0, "ws1")]
        assert all(r.detection_accuracy is None for r in rows if r.fraction == 0.0)
        assert all(r.mean_good_score is None for r in rows if r.fraction == 1.0)

    def test_paired_and_deterministic(self):
        cfg = small_cfg(sweep=(0.2,), schemes=("ws1", "mean"))
        a = malicious_sweep(cfg)
        assert a == malicious_sweep(cfg)
        assert a[0].seed == a[1].seed and a[0].true_malicious == a[1].true_malicious

    def test_parallel_matches_serial(self):
        cfg = small_cfg(sweep=(0.1, 0.3), schemes=("ws1", "mean"))
        assert malicious_sweep(dataclasses.replace(cfg, jobs=2)) == malicious_sweep(cfg)

    def test_rejects_trace(self):
        with pytest.raises(ConfigError):
            malicious_sweep(small_cfg(trace_path="x.siot"))
