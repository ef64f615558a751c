"""Adapter from SIGCOMM-2009-style records to a :class:`Trace`.

The raw dataset is not bundled. The mapping is:

* proximity contact ``(t, a, b)``  -> event with trustor ``a``, trustee ``b``
* Facebook friend pair ``(a, b)``  -> symmetric friendship
* interest-group membership         -> community
* multicast/message group membership -> co-work group

Parsing the dataset's own file layout into these tuples is left to the
caller; this module only performs the mapping and validation.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Optional

from .behavior import BehaviorModel
from .graph import Network, SocialProfile
from .trace import Trace, TraceError, TraceEvent


def trace_from_records(contacts: Iterable[tuple[int, int, int]],
                       friendships: Iterable[tuple[int, int]] = (),
                       interests: Optional[Mapping[int, Iterable[str]]] = None,
                       groups: Optional[Mapping[int, Iterable[str]]] = None,
                       behaviors: Optional[Mapping[int, BehaviorModel]] = None,
                       objects: Optional[Iterable[int]] = None) -> Trace:
    interests = interests or {}
    groups = groups or {}
    contacts = sorted((int(t), int(a), int(b)) for t, a, b in contacts if a != b)
    ids = set(objects or ())
    for _, a, b in contacts:
        ids.update((a, b))
    friends: dict[int, set] = {}
    for a, b in friendships:
        if a == b:
            continue
        ids.update((a, b))
        friends.setdefault(a, set()).add(b)
        friends.setdefault(b, set()).add(a)
    ids.update(interests)
    ids.update(groups)
    if not ids:
        raise TraceError("no objects in records")

    net = Network()
    net.add_objects(
        (oid, SocialProfile(friends.get(oid, ()), interests.get(oid, ()), groups.get(oid, ())))
        for oid in sorted(ids)
    )
    if contacts and contacts[0][0] < 0:
        raise TraceError("contact timestamps must be non-negative")
    events = [TraceEvent(seq, t, a, b) for seq, (t, a, b) in enumerate(contacts, start=1)]
    behaviors = dict(behaviors or {})
    for oid in net.roster:
        behaviors.setdefault(oid, BehaviorModel())
    return Trace(net, events, dict(sorted(behaviors.items())), None)
