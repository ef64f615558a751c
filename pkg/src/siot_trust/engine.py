"""Event replay and trust queries over per-pair interaction ledgers."""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .behavior import (
    HONEST,
    BehaviorModel,
    RecommendationPolicy,
    actor_rng,
    reported_direct_trust,
    service_outcome,
)
from .graph import GraphError, Network, ObjectId
from .trace import TraceEvent, split_checkpoints
from .trust import (
    DEFAULT_THETA,
    WS1,
    InteractionCounts,
    Label,
    TrustFeatures,
    WeightScheme,
    classify,
    direct_trust,
    final_trust,
    recommendation_trust,
)

COLD_START = 0.5
OBSERVER_MODES = ("interacted", "any")


class EngineError(ValueError):
    pass


@dataclass
class TrustSnapshot:
    at_event: int
    scores: dict            # (trustor, trustee) -> final trust
    global_scores: dict     # trustee -> mean final trust over observers
    labels: dict            # trustee -> Label
    direct_scores: dict     # trustee -> mean direct trust over trustors with a ledger
    theta: float = DEFAULT_THETA


def planned_interactions(events: Iterable[TraceEvent]) -> dict:
    """Number of times each object is served as trustee over the whole trace."""
    return dict(Counter(ev.trustee for ev in events))


class TrustEngine:
    """Mutable trust state for one replay.

    Only ledgers change per event; trust is computed on demand. With
    ``window`` set, ledgers count only the most recent ``window`` events.

    ``observers`` selects whose opinions enter a node's global score:
    ``"interacted"`` uses trustors that have a ledger towards it,
    ``"any"`` uses every object with at least one trust feature about it.
    """

    def __init__(self, net: Network, behaviors: Mapping[ObjectId, BehaviorModel],
                 policies: Optional[Mapping[ObjectId, RecommendationPolicy]] = None, *,
                 scheme: WeightScheme = WS1, theta: float = DEFAULT_THETA, seed: int = 0,
                 planned: Optional[Mapping[ObjectId, int]] = None,
                 window: Optional[int] = None, observers: str = "interacted"):
        if window is not None and window < 1:
            raise EngineError(f"window must be >= 1, got {window}")
        if observers not in OBSERVER_MODES:
            raise EngineError(f"observers must be one of {OBSERVER_MODES}, got {observers!r}")
        if not 0.0 <= theta <= 1.0:
            raise EngineError(f"theta must be in [0, 1], got {theta}")
        missing = set(net.profiles) - set(behaviors)
        if missing:
            raise EngineError(f"no behaviour for objects {sorted(missing)[:5]}")
        self.net = net
        self.behaviors = dict(behaviors)
        self.policies = dict(policies or {})
        self.scheme = scheme
        self.theta = theta
        self.seed = seed
        self.planned = dict(planned or {})
        self.window = window
        self.observers = observers

        self.ledgers: dict[tuple, InteractionCounts] = {}
        self.events_processed = 0
        self._observers_of: dict[ObjectId, set] = {}
        self._served: Counter = Counter()
        self._rngs: dict = {}
        self._recent: deque = deque()
        self._neighbors = {oid: net.neighbors_of(oid) for oid in net.roster}
        self._sim_cache: dict = {}

    @classmethod
    def from_ledgers(cls, net: Network, behaviors, policies, ledgers: Mapping[tuple, InteractionCounts],
                     events_processed: int = 0, **kwargs) -> "TrustEngine":
        """Fresh engine whose ledgers are given rather than replayed."""
        eng = cls(net, behaviors, policies, **kwargs)
        for (i, j), counts in ledgers.items():
            if counts.total:
                eng._set_ledger(i, j, counts)
        eng.events_processed = events_processed
        return eng

    # ---- ledger maintenance ---------------------------------------------

    def _set_ledger(self, i, j, counts: InteractionCounts) -> None:
        if counts.total == 0:
            self.ledgers.pop((i, j), None)
            obs = self._observers_of.get(j)
            if obs is not None:
                obs.discard(i)
            return
        self.ledgers[(i, j)] = counts
        self._observers_of.setdefault(j, set()).add(i)

    def _bump(self, i, j, positive: bool, delta: int) -> None:
        c = self.ledgers.get((i, j), InteractionCounts())
        if positive:
            c = InteractionCounts(c.positive + delta, c.negative)
        else:
            c = InteractionCounts(c.positive, c.negative + delta)
        self._set_ledger(i, j, c)

    def _rng(self, oid):
        rng = self._rngs.get(oid)
        if rng is None:
            rng = self._rngs[oid] = actor_rng(self.seed, oid)
        return rng

    def _check(self, oid) -> None:
        if oid not in self.net:
            raise EngineError(f"unknown object {oid!r}")

    def apply_event(self, event: TraceEvent) -> bool:
        """Serve one interaction; returns True when it was rated positive."""
        i, j = event.trustor, event.trustee
        self._check(i)
        self._check(j)
        if i == j:
            raise EngineError(f"event {event.seq}: trustor equals trustee")
        index = self._served[j]
        total = self.planned.get(j, index + 1)
        positive = service_outcome(self.behaviors[j], index, max(total, index + 1), self._rng(j))
        self._served[j] = index + 1
        self._bump(i, j, positive, 1)
        if self.window is not None:
            self._recent.append((i, j, positive))
            if len(self._recent) > self.window:
                oi, oj, opos = self._recent.popleft()
                self._bump(oi, oj, opos, -1)
        self.events_processed += 1
        return positive

    # ---- trust queries ----------------------------------------------------

    def counts(self, i, j) -> InteractionCounts:
        return self.ledgers.get((i, j), InteractionCounts())

    def direct(self, i, j) -> Optional[float]:
        c = self.ledgers.get((i, j))
        return None if c is None else direct_trust(c)

    def social(self, i, j) -> Optional[float]:
        key = (i, j) if i <= j else (j, i)
        if key not in self._sim_cache:
            try:
                self._sim_cache[key] = self.net.similarity_features(*key)
            except GraphError as exc:
                raise EngineError(str(exc)) from None
        return self._sim_cache[key]

    def recommenders(self, i, j) -> list[tuple[ObjectId, float]]:
        """Eligible neighbours of ``i`` and what they report about ``j``."""
        out = []
        for k in self._neighbors.get(i, ()):
            if k == j:
                continue
            kj = self.ledgers.get((k, j))
            if kj is None:
                continue
            if direct_trust(self.counts(i, k)) <= self.theta:
                continue
            policy = self.policies.get(k, HONEST)
            out.append((k, reported_direct_trust(policy, direct_trust(kj), j)))
        return out

    def gather_recommendations(self, i, j) -> Optional[float]:
        if i == j:
            raise EngineError("trustor and trustee must differ")
        reports = [score for _, score in self.recommenders(i, j)]
        if not reports:
            return None
        return recommendation_trust(reports)

    def features(self, i, j) -> TrustFeatures:
        if i == j:
            raise EngineError("trustor and trustee must differ")
        self._check(i)
        self._check(j)
        return TrustFeatures(self.direct(i, j), self.social(i, j),
                             self.gather_recommendations(i, j))

    def pair_trust(self, i, j) -> float:
        f = self.features(i, j)
        if f.direct is None and f.social is None and f.recommendation is None:
            return COLD_START
        return final_trust(f, self.scheme)

    def observers_of(self, j) -> list:
        self._check(j)
        if self.observers == "interacted":
            return sorted(self._observers_of.get(j, ()))
        out = []
        for i in self.net.roster:
            if i == j:
                continue
            f = self.features(i, j)
            if f.direct is not None or f.social is not None or f.recommendation is not None:
                out.append(i)
        return out

    def _pair_scores(self, j) -> dict:
        return {i: self.pair_trust(i, j) for i in self.observers_of(j)}

    def global_trust(self, j) -> float:
        scores = self._pair_scores(j)
        if not scores:
            return COLD_START
        return math.fsum(scores.values()) / len(scores)

    def mean_direct(self, j) -> Optional[float]:
        obs = self._observers_of.get(j)
        if not obs:
            return None
        return math.fsum(direct_trust(self.ledgers[(i, j)]) for i in sorted(obs)) / len(obs)

    def snapshot(self) -> TrustSnapshot:
        scores, global_scores, labels, direct_scores = {}, {}, {}, {}
        for j in self.net.roster:
            per = self._pair_scores(j)
            for i, s in per.items():
                scores[(i, j)] = s
            g = math.fsum(per.values()) / len(per) if per else COLD_START
            global_scores[j] = g
            labels[j] = classify(g, self.theta)
            direct_scores[j] = self.mean_direct(j)
        return TrustSnapshot(self.events_processed, scores, global_scores, labels,
                             direct_scores, self.theta)


def run(net: Network, events: Sequence[TraceEvent], behaviors: Mapping[ObjectId, BehaviorModel],
        policies: Optional[Mapping[ObjectId, RecommendationPolicy]] = None, *,
        scheme: WeightScheme = WS1, theta: float = DEFAULT_THETA,
        checkpoints: Sequence[int] = (), seed: int = 0, window: Optional[int] = None,
        observers: str = "interacted") -> list[TrustSnapshot]:
    """Replay ``events`` in order and snapshot trust after each checkpoint prefix."""
    cuts = split_checkpoints(events, checkpoints)
    engine = TrustEngine(net, behaviors, policies, scheme=scheme, theta=theta, seed=seed,
                         planned=planned_interactions(events), window=window,
                         observers=observers)
    snapshots = []
    pos = 0
    for cut in cuts:
        for ev in events[pos:cut]:
            engine.apply_event(ev)
        pos = cut
        snapshots.append(engine.snapshot())
    return snapshots
