"""Social structure of the object network: friends, communities, multicast groups."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .trust import (
    coi_similarity,
    cowork_similarity,
    friendship_similarity,
    social_similarity,
)

ObjectId = int


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class SocialProfile:
    friends: frozenset = frozenset()
    communities: frozenset = frozenset()
    multicast_groups: frozenset = frozenset()

    def __post_init__(self):
        # accept any iterable for convenience
        for name in ("friends", "communities", "multicast_groups"):
            value = getattr(self, name)
            if not isinstance(value, frozenset):
                object.__setattr__(self, name, frozenset(value))


@dataclass
class Network:
    """Objects and their profiles.

    Friendship is kept symmetric: adding ``i`` with friend ``j`` also
    records ``i`` as a friend of ``j``. The roster is sorted by id so
    iteration is deterministic.
    """

    profiles: dict = field(default_factory=dict)

    @property
    def roster(self) -> list[ObjectId]:
        return sorted(self.profiles)

    def __len__(self) -> int:
        return len(self.profiles)

    def __contains__(self, oid) -> bool:
        return oid in self.profiles

    def profile(self, oid: ObjectId) -> SocialProfile:
        try:
            return self.profiles[oid]
        except KeyError:
            raise GraphError(f"unknown object {oid!r}") from None

    def add_object(self, oid: ObjectId, profile: Optional[SocialProfile] = None) -> None:
        self.add_objects([(oid, profile or SocialProfile())])

    def add_objects(self, items: Iterable[tuple[ObjectId, SocialProfile]]) -> None:
        """Add a batch of objects; friends may reference other members of the batch."""
        batch = list(items)
        new_ids = set()
        for oid, _ in batch:
            if oid in self.profiles or oid in new_ids:
                raise GraphError(f"duplicate object id {oid!r}")
            new_ids.add(oid)
        known = new_ids | set(self.profiles)
        for oid, prof in batch:
            if oid in prof.friends:
                raise GraphError(f"object {oid!r} lists itself as a friend")
            dangling = prof.friends - known
            if dangling:
                raise GraphError(
                    f"object {oid!r} references unknown friends {sorted(dangling)}")

        for oid, prof in batch:
            self.profiles[oid] = prof
        for oid, prof in batch:
            for f in prof.friends:
                other = self.profiles[f]
                if oid not in other.friends:
                    self.profiles[f] = SocialProfile(
                        other.friends | {oid}, other.communities, other.multicast_groups)

    def add_friendship(self, a: ObjectId, b: ObjectId) -> None:
        if a == b:
            raise GraphError(f"object {a!r} cannot befriend itself")
        pa, pb = self.profile(a), self.profile(b)
        self.profiles[a] = SocialProfile(pa.friends | {b}, pa.communities, pa.multicast_groups)
        self.profiles[b] = SocialProfile(pb.friends | {a}, pb.communities, pb.multicast_groups)

    def neighbors_of(self, oid: ObjectId) -> list[ObjectId]:
        return sorted(self.profile(oid).friends)

    def similarity_measures(self, i: ObjectId, j: ObjectId) -> list[float]:
        """Similarity values whose underlying sets are non-empty on both sides.

        Order is community, friendship, co-work.
        """
        if i == j:
            raise GraphError(f"self-similarity is undefined (object {i!r})")
        pi, pj = self.profile(i), self.profile(j)
        measures = []
        if pi.communities and pj.communities:
            measures.append(coi_similarity(pi.communities, pj.communities))
        if pi.friends and pj.friends:
            measures.append(friendship_similarity(pi.friends, pj.friends))
        if pi.multicast_groups and pj.multicast_groups:
            measures.append(cowork_similarity(pi.multicast_groups, pj.multicast_groups))
        return measures

    def similarity_features(self, i: ObjectId, j: ObjectId) -> Optional[float]:
        """Social-similarity trust of ``i`` towards ``j``, or None without data."""
        measures = self.similarity_measures(i, j)
        if not measures:
            return None
        return social_similarity(measures)
