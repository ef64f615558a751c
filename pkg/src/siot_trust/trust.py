"""Trust formulas for Social-IoT objects.

Everything here is a pure function of its arguments. Scores live in
[0, 1]; a trustor combines up to three features about a trustee:

    direct          beta-posterior mean of its own positive/negative history
    social          mean of community, friendship and co-work similarity
    recommendation  mean direct trust reported by filtered neighbours

and fuses them with a weighted sum whose weights are redistributed when a
feature is missing.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import AbstractSet, Optional, Sequence

log = logging.getLogger(__name__)

WEIGHT_TOL = 1e-9
DEFAULT_THETA = 0.5


class TrustError(ValueError):
    """Raised when a trust quantity cannot be computed from the given inputs."""


class Label(enum.Enum):
    TRUSTWORTHY = "trustworthy"
    UNTRUSTWORTHY = "untrustworthy"


@dataclass(frozen=True)
class InteractionCounts:
    positive: int = 0
    negative: int = 0

    def __post_init__(self):
        if self.positive < 0 or self.negative < 0:
            raise TrustError(f"interaction counts must be >= 0, got {self}")

    @property
    def total(self) -> int:
        return self.positive + self.negative


@dataclass(frozen=True)
class WeightScheme:
    """Weights for (direct, social, recommendation) in the fused score."""

    w1: float
    w2: float
    w3: float
    name: str = "custom"

    def __post_init__(self):
        ws = (self.w1, self.w2, self.w3)
        if any(w < 0 or not math.isfinite(w) for w in ws):
            raise TrustError(f"weights must be finite and >= 0, got {ws}")
        if abs(sum(ws) - 1.0) > WEIGHT_TOL:
            raise TrustError(f"weights must sum to 1, got {ws} (sum={sum(ws)!r})")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.w1, self.w2, self.w3)


WS1 = WeightScheme(0.5, 0.3, 0.2, name="ws1")
WS2 = WeightScheme(0.4, 0.3, 0.3, name="ws2")
# exact thirds, so the weights sum to one
MEAN = WeightScheme(1 / 3, 1 / 3, 1 / 3, name="mean")

PRESETS = {s.name: s for s in (WS1, WS2, MEAN)}


def parse_scheme(text: str) -> WeightScheme:
    """Accept a preset name (``ws1``, ``ws2``, ``mean``) or ``w1,w2,w3``."""
    key = text.strip().lower().replace("-", "")
    if key in PRESETS:
        return PRESETS[key]
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != 3:
        raise TrustError(f"unknown weight scheme {text!r}")
    try:
        w1, w2, w3 = (float(p) for p in parts)
    except ValueError:
        raise TrustError(f"unknown weight scheme {text!r}") from None
    return WeightScheme(w1, w2, w3, name=f"{w1!r},{w2!r},{w3!r}")


@dataclass(frozen=True)
class TrustFeatures:
    direct: Optional[float] = None
    social: Optional[float] = None
    recommendation: Optional[float] = None

    def present(self) -> tuple[bool, bool, bool]:
        return (self.direct is not None, self.social is not None,
                self.recommendation is not None)


@dataclass(frozen=True)
class EffectiveWeights:
    wd: float
    ws: float
    wr: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.wd, self.ws, self.wr)


def direct_trust(counts: InteractionCounts) -> float:
    """Beta-posterior mean ``(P + 1) / (P + N + 2)``; 0.5 with no evidence."""
    return (counts.positive + 1) / (counts.positive + counts.negative + 2)


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def recommendation_trust(scores: Sequence[float]) -> float:
    """Mean of the (already filtered) recommenders' direct trust in the trustee."""
    if not scores:
        raise TrustError("no recommenders")
    return _mean(scores)


def jaccard(a: AbstractSet, b: AbstractSet) -> float:
    union = len(a | b)
    if union == 0:
        return 0.0
    return len(a & b) / union


def coi_similarity(communities_i: AbstractSet, communities_j: AbstractSet) -> float:
    """Share of communities the two objects have in common (Jaccard)."""
    return jaccard(communities_i, communities_j)


def friendship_similarity(friends_i: AbstractSet, friends_j: AbstractSet) -> float:
    """Share of common friends (Jaccard)."""
    return jaccard(friends_i, friends_j)


def cowork_similarity(multicast_i: AbstractSet, multicast_j: AbstractSet) -> float:
    """Cosine similarity of the multicast-group indicator vectors."""
    if not multicast_i or not multicast_j:
        return 0.0
    common = len(multicast_i & multicast_j)
    # exact for identical sets, where the product is a perfect square
    return min(1.0, common / math.sqrt(len(multicast_i) * len(multicast_j)))


def social_similarity(measures: Sequence[float]) -> float:
    if not measures:
        raise TrustError("no similarity data")
    return _mean(measures)


def resolve_scenario(features: TrustFeatures, scheme: WeightScheme) -> EffectiveWeights:
    """Redistribute the scheme's weights over the features that are present.

    Missing social weight moves to direct trust; missing recommendation
    weight moves to direct trust; missing direct weight moves to
    recommendation. A lone feature takes all the weight.
    """
    w1, w2, w3 = scheme.as_tuple()
    has_d, has_s, has_r = features.present()
    if has_d and has_s and has_r:
        return EffectiveWeights(w1, w2, w3)
    if has_d and has_r:
        return EffectiveWeights(w1 + w2, 0.0, w3)
    if has_d and has_s:
        return EffectiveWeights(w1 + w3, w2, 0.0)
    if has_s and has_r:
        return EffectiveWeights(0.0, w2, w3 + w1)
    if has_d:
        return EffectiveWeights(1.0, 0.0, 0.0)
    if has_r:
        return EffectiveWeights(0.0, 0.0, 1.0)
    if has_s:
        log.debug("only social similarity available; giving it full weight")
        return EffectiveWeights(0.0, 1.0, 0.0)
    raise TrustError("no trust evidence")


def final_trust(features: TrustFeatures, scheme: WeightScheme) -> float:
    weights = resolve_scenario(features, scheme)
    total = 0.0
    for w, value in zip(weights.as_tuple(),
                        (features.direct, features.social, features.recommendation)):
        if value is not None and w:
            total += w * value
    # the weights sum to one only up to rounding
    return min(1.0, max(0.0, total))


def classify(score: float, theta: float = DEFAULT_THETA) -> Label:
    """Strictly above ``theta`` is trustworthy; a tie is not."""
    return Label.TRUSTWORTHY if score > theta else Label.UNTRUSTWORTHY
