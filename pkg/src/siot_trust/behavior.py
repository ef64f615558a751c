"""Service and recommendation behaviour of simulated objects."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .graph import ObjectId


class BehaviorError(ValueError):
    pass


class Kind(enum.Enum):
    GOOD = "good"
    MALICIOUS = "malicious"
    GOOD_TO_MALICIOUS = "good_to_malicious"
    MALICIOUS_TO_GOOD = "malicious_to_good"
    ON_OFF = "on_off"

    @classmethod
    def parse(cls, text: str) -> "Kind":
        key = text.strip().lower().replace("-", "_")
        aliases = {"g2m": "good_to_malicious", "m2g": "malicious_to_good", "onoff": "on_off"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise BehaviorError(f"unknown behaviour kind {text!r}") from None


# judged by end-state service at the final checkpoint
MALICIOUS_FAMILY = frozenset({Kind.MALICIOUS, Kind.GOOD_TO_MALICIOUS, Kind.ON_OFF})

DEFAULT_P_GOOD = 0.9
DEFAULT_P_BAD = 0.2
DEFAULT_SWITCH_POINT = 0.5
ON_OFF_PHASES = 6


@dataclass(frozen=True)
class BehaviorModel:
    """How likely an object's services are rated positive over its lifetime.

    ``on_off_period`` of None means one sixth of the object's planned
    interactions (at least 1).
    """

    kind: Kind = Kind.GOOD
    p_good_service: float = DEFAULT_P_GOOD
    p_bad_service: float = DEFAULT_P_BAD
    switch_point: float = DEFAULT_SWITCH_POINT
    on_off_period: Optional[int] = None

    def __post_init__(self):
        if not 0.0 <= self.p_bad_service < self.p_good_service <= 1.0:
            raise BehaviorError(
                "need 0 <= p_bad_service < p_good_service <= 1, got "
                f"{self.p_bad_service!r}, {self.p_good_service!r}")
        if not 0.0 < self.switch_point < 1.0:
            raise BehaviorError(f"switch_point must be in (0, 1), got {self.switch_point!r}")
        if self.on_off_period is not None and self.on_off_period < 1:
            raise BehaviorError(f"on_off_period must be >= 1, got {self.on_off_period!r}")

    @property
    def is_malicious(self) -> bool:
        return self.kind in MALICIOUS_FAMILY

    def period_for(self, total_planned: int) -> int:
        if self.on_off_period is not None:
            return self.on_off_period
        return max(1, total_planned // ON_OFF_PHASES)

    def in_good_phase(self, index: int, total_planned: int) -> bool:
        kind = self.kind
        if kind is Kind.GOOD:
            return True
        if kind is Kind.MALICIOUS:
            return False
        switch = int(self.switch_point * total_planned)
        if kind is Kind.GOOD_TO_MALICIOUS:
            return index < switch
        if kind is Kind.MALICIOUS_TO_GOOD:
            return index >= switch
        return (index // self.period_for(total_planned)) % 2 == 0

    def positive_probability(self, index: int, total_planned: int) -> float:
        if self.in_good_phase(index, total_planned):
            return self.p_good_service
        return self.p_bad_service


def service_outcome(model: BehaviorModel, interaction_index: int, total_planned: int,
                    rng: np.random.Generator) -> bool:
    """Draw one service outcome; True means the trustor rates it positive.

    Exactly one uniform is consumed per call so streams stay aligned
    regardless of the probabilities involved.
    """
    if not 0 <= interaction_index < total_planned:
        raise BehaviorError(
            f"interaction_index {interaction_index} outside [0, {total_planned})")
    p = model.positive_probability(interaction_index, total_planned)
    return bool(rng.random() < p)


def actor_rng(seed: int, actor: ObjectId) -> np.random.Generator:
    """Independent stream per (run seed, actor)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(actor,)))


@dataclass(frozen=True)
class RecommendationPolicy:
    """What an object reports when asked for its direct trust in someone.

    An honest policy has no targets. Bad-mouthing targets are reported at
    0.0, ballot-stuffing targets at 1.0. A colluding object can carry both
    target sets (disjoint).
    """

    bad_mouthing: frozenset = frozenset()
    ballot_stuffing: frozenset = frozenset()

    def __post_init__(self):
        for name in ("bad_mouthing", "ballot_stuffing"):
            value = getattr(self, name)
            if not isinstance(value, frozenset):
                object.__setattr__(self, name, frozenset(value))
        overlap = self.bad_mouthing & self.ballot_stuffing
        if overlap:
            raise BehaviorError(f"targets both bad-mouthed and ballot-stuffed: {sorted(overlap)}")

    @property
    def kind(self) -> str:
        if self.bad_mouthing and self.ballot_stuffing:
            return "colluding"
        if self.bad_mouthing:
            return "bad_mouthing"
        if self.ballot_stuffing:
            return "ballot_stuffing"
        return "honest"

    @property
    def target_set(self) -> frozenset:
        return self.bad_mouthing | self.ballot_stuffing


HONEST = RecommendationPolicy()


def reported_direct_trust(policy: RecommendationPolicy, true_score: float,
                          about: ObjectId) -> float:
    if about in policy.bad_mouthing:
        return 0.0
    if about in policy.ballot_stuffing:
        return 1.0
    return true_score


def default_policies(behaviors: Mapping[ObjectId, BehaviorModel], *,
                     bad_mouthing: bool = True,
                     ballot_stuffing: bool = True) -> dict[ObjectId, RecommendationPolicy]:
    """Malicious-family objects bad-mouth good objects and stuff ballots for each other."""
    bad = frozenset(o for o, b in behaviors.items() if b.is_malicious)
    good = frozenset(behaviors) - bad
    policies = {}
    for oid, model in behaviors.items():
        if not model.is_malicious:
            policies[oid] = HONEST
            continue
        policies[oid] = RecommendationPolicy(
            bad_mouthing=good if bad_mouthing else frozenset(),
            ballot_stuffing=(bad - {oid}) if ballot_stuffing else frozenset(),
        )
    return policies

