import pytest
from hypothesis import given, settings, strategies as st

from siot_trust.behavior import BehaviorModel, Kind
from siot_trust.trace import (
    GeneratorConfig,
    TraceError,
    apportion,
    dumps_trace,
    generate_trace,
    load_trace,
    loads_trace,
    split_checkpoints,
    write_trace,
)

SMALL = GeneratorConfig(object_count=20, target_event_count=300, mean_friends_per_object=4,
                        seed=5)


def same_trace(a, b):
    assert a.network.profiles == b.network.profiles
    assert a.events == b.events
    assert a.behaviors == b.behaviors
    assert a.seed == b.seed


class TestGenerator:
    def test_default_shape(self):
        trace = generate_trace(GeneratorConfig())
        assert len(trace.network) == 150
        assert sum(b.is_malicious for b in trace.behaviors.values()) == 15
        assert abs(len(trace.events) - 20000) <= 200

    def test_no_malicious(self):
        trace = generate_trace(GeneratorConfig(malicious_fraction=0.0, target_event_count=100))
        assert all(b.kind is Kind.GOOD for b in trace.behaviors.values())

    def test_deterministic(self):
        assert dumps_trace(generate_trace(SMALL)) == dumps_trace(generate_trace(SMALL))
        other = GeneratorConfig(**{**SMALL.__dict__, "seed": 6})
        assert dumps_trace(generate_trace(other)) != dumps_trace(generate_trace(SMALL))

    def test_events_valid(self):
        trace = generate_trace(SMALL)
        seqs = [e.seq for e in trace.events]
        ticks = [e.tick for e in trace.events]
        assert seqs == sorted(set(seqs))
        assert ticks == sorted(ticks)
        assert all(e.trustor != e.trustee for e in trace.events)

    def test_social_locality(self):
        cfg = GeneratorConfig(seed=2)
        trace = generate_trace(cfg)
        net = trace.network
        friendly = sum(e.trustee in net.profile(e.trustor).friends for e in trace.events)
        degree = sum(len(net.profile(o).friends) for o in net.roster) / len(net)
        uniform_rate = degree / (len(net) - 1)
        assert friendly / len(trace.events) > 5 * uniform_rate

    def test_mixes(self):
        cfg = GeneratorConfig(
            target_event_count=100, malicious_fraction=0.2,
            malicious_mix={Kind.MALICIOUS: 2, Kind.ON_OFF: 1, Kind.GOOD_TO_MALICIOUS: 1},
            good_mix={Kind.GOOD: 0.9, Kind.MALICIOUS_TO_GOOD: 0.1})
        kinds = [b.kind for b in generate_trace(cfg).behaviors.values()]
        assert kinds.count(Kind.MALICIOUS) == 15
        # 7.5 each; the tie goes to the earlier key
        assert kinds.count(Kind.ON_OFF) == 8
        assert kinds.count(Kind.GOOD_TO_MALICIOUS) == 7
        assert kinds.count(Kind.MALICIOUS_TO_GOOD) == 12

    @pytest.mark.parametrize("change", [
        dict(mean_friends_per_object=150),
        dict(mean_friends_per_object=149),
        dict(malicious_fraction=1.5),
        dict(object_count=1),
        dict(malicious_mix={Kind.GOOD: 1.0}),
        dict(good_mix={Kind.ON_OFF: 1.0}),
        dict(p_good_service=0.1, p_bad_service=0.2),
    ])
    def test_infeasible(self, change):
        with pytest.raises(TraceError):
            generate_trace(GeneratorConfig(**change))

    def test_apportion(self):
        assert apportion(15, {Kind.MALICIOUS: 1.0}) == [(Kind.MALICIOUS, 15)]
        counts = dict(apportion(10, {Kind.MALICIOUS: 1, Kind.ON_OFF: 1, Kind.GOOD_TO_MALICIOUS: 1}))
        assert sum(counts.values()) == 10 and counts[Kind.MALICIOUS] == 4


class TestRoundTrip:
    def test_file(self, tmp_path):
        trace = generate_trace(SMALL)
        path = tmp_path / "t.siot"
        write_trace(trace, path)
        same_trace(load_trace(path), trace)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 10_000), st.sampled_from([0.0, 0.25, 1.0]))
    def test_generated_always_loads(self, seed, frac):
        cfg = GeneratorConfig(object_count=15, target_event_count=60, mean_friends_per_object=3,
                              malicious_fraction=frac, seed=seed,
                              malicious_mix={Kind.ON_OFF: 1, Kind.MALICIOUS: 1},
                              on_off_period=4)
        trace = generate_trace(cfg)
        text = dumps_trace(trace)
        loaded = loads_trace(text)
        same_trace(loaded, trace)
        assert dumps_trace(loaded) == text

    def test_behaviour_params_exact(self):
        text = dumps_trace(generate_trace(GeneratorConfig(
            object_count=5, target_event_count=5, mean_friends_per_object=2,
            p_good_service=0.1 + 0.2, p_bad_service=1 / 7)))
        b = loads_trace(text).behaviors[0]
        assert b.p_good_service == 0.1 + 0.2 and b.p_bad_service == 1 / 7


GOOD_FILE = """#siot-trace v1 objects=3 events=2 seed=none
P 0 F:1 C:c1 M:
P 1 F:0 C:c1,c2 M:g1
P 2 F: C: M:
B 1 malicious p_good=0.9 p_bad=0.2 switch=0.5 period=auto
E 1 0 0 1
E 2 5 1 2
"""


class TestLoadErrors:
    def test_minimal(self):
        trace = loads_trace(GOOD_FILE)
        assert trace.network.neighbors_of(0) == [1]
        assert trace.behaviors[0] == BehaviorModel()
        assert trace.behaviors[1].kind is Kind.MALICIOUS
        assert trace.seed is None

    def test_self_interaction_names_seq(self):
        bad = GOOD_FILE.replace("E 2 5 1 2", "E 2 5 2 2")
        with pytest.raises(TraceError, match="seq 2") as info:
            loads_trace(bad)
        assert info.value.lineno == 7

    def test_truncated(self):
        truncated = GOOD_FILE.rsplit("E 2", 1)[0]
        with pytest.raises(TraceError, match="header says 2 events, found 1"):
            loads_trace(truncated)

    @pytest.mark.parametrize("old,new,match", [
        ("E 2 5 1 2", "E 2 5 1 9", "unknown object 9"),
        ("E 2 5 1 2", "E 1 5 1 2", "not after"),
        ("E 2 5 1 2", "E 2 -1 1 2", "backwards"),
        ("P 2 F: C: M:", "P 2 F: C:", "profile line"),
        ("P 2 F: C: M:", "P 1 F: C: M:", "duplicate object"),
        ("P 0 F:1", "P 0 F:7", "unknown friends"),
        ("objects=3", "objects=4", "header says 4 objects"),
        ("#siot-trace v1", "#siot-trace v2", "unsupported format"),
        ("malicious p_good", "evil p_good", "unknown behaviour"),
        ("E 1 0 0 1", "X 1 0 0 1", "unknown record"),
        ("E 1 0 0 1", "E 1 zero 0 1", "bad event field"),
    ])
    def test_malformed(self, old, new, match):
        with pytest.raises(TraceError, match=match):
            loads_trace(GOOD_FILE.replace(old, new))

    def test_section_order(self):
        text = GOOD_FILE.replace("B 1 malicious", "##").replace(
            "E 2 5 1 2", "E 2 5 1 2\nB 1 malicious p_good=0.9 p_bad=0.2 switch=0.5 period=auto")
        with pytest.raises(TraceError, match="after 'E'"):
            loads_trace(text)

    def test_empty(self):
        with pytest.raises(TraceError, match="empty"):
            loads_trace("")


class TestCheckpoints:
    def test_even_cuts(self):
        events = list(range(20000))
        assert split_checkpoints(events, [4000, 8000, 12000, 16000, 20000]) == [
            4000, 8000, 12000, 16000, 20000]

    def test_single(self):
        assert split_checkpoints(list(range(10)), [10]) == [10]
        assert split_checkpoints(list(range(10)), []) == [10]

    def test_errors(self):
        with pytest.raises(TraceError, match="exceeds"):
            split_checkpoints(list(range(20000)), [25000])
        with pytest.raises(TraceError):
            split_checkpoints(list(range(10)), [5, 5])
