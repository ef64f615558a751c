"""Interaction traces: file format, loading, and a synthetic generator.

A trace file is line-oriented text::

    #siot-trace v1 objects=<n> events=<m> seed=<s|none>
    P <id> F:<id,...> C:<cid,...> M:<gid,...>
    B <id> <kind> p_good=<f> p_bad=<f> switch=<f> period=<int|auto>
    E <seq> <tick> <trustor> <trustee>

Sections appear in that order. Blank lines and lines starting with ``##``
are ignored. Objects without a ``B`` line behave as good objects with the
default parameters.
"""

from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, TextIO, Union

import numpy as np

from .behavior import MALICIOUS_FAMILY, BehaviorError, BehaviorModel, Kind
from .graph import GraphError, Network, ObjectId, SocialProfile

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
MAGIC = "#siot-trace"
FOUR_DAYS = 4 * 24 * 3600


class TraceError(ValueError):
    """Malformed or inconsistent trace; ``lineno`` is 1-based when known."""

    def __init__(self, message: str, lineno: Optional[int] = None):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno is not None else message)


@dataclass(frozen=True)
class TraceEvent:
    seq: int
    tick: int
    trustor: ObjectId
    trustee: ObjectId


@dataclass(frozen=True)
class TraceHeader:
    object_count: int
    event_count: int
    generator_seed: Optional[int] = None
    format_version: int = FORMAT_VERSION


@dataclass
class Trace:
    network: Network
    events: list
    behaviors: dict
    seed: Optional[int] = None

    @property
    def header(self) -> TraceHeader:
        return TraceHeader(len(self.network), len(self.events), self.seed)

    def __iter__(self):
        # allows ``net, events, behaviors = trace``
        return iter((self.network, self.events, self.behaviors))


# --------------------------------------------------------------------------
# writing


def _fmt_set(values) -> str:
    return ",".join(str(v) for v in sorted(values))


def _fmt_behavior(oid: ObjectId, b: BehaviorModel) -> str:
    period = "auto" if b.on_off_period is None else str(b.on_off_period)
    return (f"B {oid} {b.kind.value} p_good={b.p_good_service!r} p_bad={b.p_bad_service!r} "
            f"switch={b.switch_point!r} period={period}")


def dump_trace(trace: Trace, fh: TextIO) -> None:
    net = trace.network
    seed = "none" if trace.seed is None else str(trace.seed)
    fh.write(f"{MAGIC} v{FORMAT_VERSION} objects={len(net)} "
             f"events={len(trace.events)} seed={seed}\n")
    for oid in net.roster:
        p = net.profile(oid)
        fh.write(f"P {oid} F:{_fmt_set(p.friends)} C:{_fmt_set(p.communities)} "
                 f"M:{_fmt_set(p.multicast_groups)}\n")
    for oid in sorted(trace.behaviors):
        fh.write(_fmt_behavior(oid, trace.behaviors[oid]) + "\n")
    for ev in trace.events:
        fh.write(f"E {ev.seq} {ev.tick} {ev.trustor} {ev.trustee}\n")


def dumps_trace(trace: Trace) -> str:
    buf = io.StringIO()
    dump_trace(trace, buf)
    return buf.getvalue()


def write_trace(trace: Trace, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps_trace(trace), encoding="utf-8")


# --------------------------------------------------------------------------
# reading


def _int(token: str, what: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise TraceError(f"bad {what} {token!r}", lineno) from None


def _parse_header(line: str, lineno: int) -> TraceHeader:
    parts = line.split()
    if len(parts) != 5 or parts[0] != MAGIC:
        raise TraceError(f"expected '{MAGIC} v1 objects=<n> events=<m> seed=<s>' header", lineno)
    if parts[1] != f"v{FORMAT_VERSION}":
        raise TraceError(f"unsupported format version {parts[1]!r}", lineno)
    fields = {}
    for tok in parts[2:]:
        key, sep, value = tok.partition("=")
        if not sep:
            raise TraceError(f"bad header field {tok!r}", lineno)
        fields[key] = value
    if set(fields) != {"objects", "events", "seed"}:
        raise TraceError(f"header needs objects, events and seed, got {sorted(fields)}", lineno)
    n = _int(fields["objects"], "object count", lineno)
    m = _int(fields["events"], "event count", lineno)
    if n <= 0 or m <= 0:
        raise TraceError("object and event counts must be positive", lineno)
    seed = None if fields["seed"] == "none" else _int(fields["seed"], "seed", lineno)
    return TraceHeader(n, m, seed)


def _parse_set(token: str, prefix: str, lineno: int, as_int: bool) -> frozenset:
    if not token.startswith(prefix):
        raise TraceError(f"expected field starting with {prefix!r}, got {token!r}", lineno)
    body = token[len(prefix):]
    if not body:
        return frozenset()
    items = body.split(",")
    if any(not it for it in items):
        raise TraceError(f"empty id in {token!r}", lineno)
    if as_int:
        return frozenset(_int(it, "object id", lineno) for it in items)
    return frozenset(items)


def _parse_behavior(parts: list, lineno: int) -> tuple[ObjectId, BehaviorModel]:
    if len(parts) != 7:
        raise TraceError("behaviour line needs: B <id> <kind> p_good= p_bad= switch= period=",
                         lineno)
    oid = _int(parts[1], "object id", lineno)
    kv = {}
    for tok in parts[3:]:
        key, sep, value = tok.partition("=")
        if not sep:
            raise TraceError(f"bad behaviour parameter {tok!r}", lineno)
        kv[key] = value
    if set(kv) != {"p_good", "p_bad", "switch", "period"}:
        raise TraceError("behaviour parameters must be p_good, p_bad, switch, period", lineno)
    try:
        period = None if kv["period"] == "auto" else int(kv["period"])
        model = BehaviorModel(
            kind=Kind.parse(parts[2]),
            p_good_service=float(kv["p_good"]),
            p_bad_service=float(kv["p_bad"]),
            switch_point=float(kv["switch"]),
            on_off_period=period,
        )
    except (ValueError, BehaviorError) as exc:
        raise TraceError(str(exc), lineno) from None
    return oid, model


def parse_trace(lines: Iterable[str]) -> Trace:
    header = None
    header_line = 0
    profiles: list[tuple[ObjectId, SocialProfile]] = []
    behaviors: dict[ObjectId, BehaviorModel] = {}
    events: list[TraceEvent] = []
    section = "P"
    order = {"P": 0, "B": 1, "E": 2}
    seen_ids: set = set()
    last_seq = None
    last_tick = None
    lineno = 0

    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("##"):
            continue
        if header is None:
            header = _parse_header(line, lineno)
            header_line = lineno
            continue
        parts = line.split()
        tag = parts[0]
        if tag not in order:
            raise TraceError(f"unknown record type {tag!r}", lineno)
        if order[tag] < order[section]:
            raise TraceError(f"{tag!r} record after {section!r} section", lineno)
        section = tag

        if tag == "P":
            if len(parts) != 5:
                raise TraceError("profile line needs: P <id> F:... C:... M:...", lineno)
            oid = _int(parts[1], "object id", lineno)
            if oid in seen_ids:
                raise TraceError(f"duplicate object id {oid}", lineno)
            seen_ids.add(oid)
            profiles.append((oid, SocialProfile(
                _parse_set(parts[2], "F:", lineno, as_int=True),
                _parse_set(parts[3], "C:", lineno, as_int=False),
                _parse_set(parts[4], "M:", lineno, as_int=False),
            )))
        elif tag == "B":
            oid, model = _parse_behavior(parts, lineno)
            if oid not in seen_ids:
                raise TraceError(f"behaviour for unknown object {oid}", lineno)
            if oid in behaviors:
                raise TraceError(f"duplicate behaviour for object {oid}", lineno)
            behaviors[oid] = model
        else:
            if len(parts) != 5:
                raise TraceError("event line needs: E <seq> <tick> <trustor> <trustee>", lineno)
            seq, tick, a, b = (_int(t, "event field", lineno) for t in parts[1:])
            if a == b:
                raise TraceError(f"event seq {seq}: trustor equals trustee ({a})", lineno)
            for oid in (a, b):
                if oid not in seen_ids:
                    raise TraceError(f"event seq {seq}: unknown object {oid}", lineno)
            if last_seq is not None and seq <= last_seq:
                raise TraceError(f"event seq {seq} not after {last_seq}", lineno)
            if tick < 0 or (last_tick is not None and tick < last_tick):
                raise TraceError(f"event seq {seq}: tick {tick} goes backwards", lineno)
            last_seq, last_tick = seq, tick
            events.append(TraceEvent(seq, tick, a, b))

    if header is None:
        raise TraceError("empty trace file", max(lineno, 1))
    if len(profiles) != header.object_count:
        raise TraceError(f"header says {header.object_count} objects, found {len(profiles)}",
                         header_line)
    if len(events) != header.event_count:
        raise TraceError(f"header says {header.event_count} events, found {len(events)}",
                         header_line)

    net = Network()
    try:
        net.add_objects(profiles)
    except GraphError as exc:
        raise TraceError(str(exc)) from None
    for oid in net.roster:
        behaviors.setdefault(oid, BehaviorModel())
    return Trace(net, events, dict(sorted(behaviors.items())), header.generator_seed)


def loads_trace(text: str) -> Trace:
    return parse_trace(text.splitlines())


def load_trace(path: Union[str, Path]) -> Trace:
    with open(path, encoding="utf-8") as fh:
        return parse_trace(fh)


def split_checkpoints(events: Sequence, checkpoints: Sequence[int]) -> list[int]:
    """Validate checkpoint prefix lengths against the event list.

    An empty checkpoint list means a single snapshot after the last event.
    """
    n = len(events)
    if not checkpoints:
        return [n]
    cuts = []
    prev = 0
    for c in checkpoints:
        if c <= prev:
            raise TraceError(f"checkpoints must be positive and strictly increasing: {list(checkpoints)}")
        if c > n:
            raise TraceError(f"checkpoint {c} exceeds event count {n}")
        cuts.append(int(c))
        prev = c
    return cuts


# --------------------------------------------------------------------------
# synthetic generation


@dataclass
class GeneratorConfig:
    object_count: int = 150
    target_event_count: int = 20000
    malicious_fraction: float = 0.10
    community_count: int = 4
    mean_friends_per_object: float = 8.0
    mean_communities_per_object: float = 2.0
    multicast_group_count: int = 8
    mean_multicast_groups: float = 3.0
    friend_bias: float = 0.7
    community_bias: float = 0.8
    duration_ticks: int = FOUR_DAYS
    p_good_service: float = 0.9
    p_bad_service: float = 0.2
    switch_point: float = 0.5
    on_off_period: Optional[int] = None
    malicious_mix: dict = field(default_factory=lambda: {Kind.MALICIOUS: 1.0})
    good_mix: dict = field(default_factory=lambda: {Kind.GOOD: 1.0})
    seed: int = 0

    def validate(self) -> None:
        n = self.object_count
        if n < 2:
            raise TraceError("object_count must be at least 2")
        if self.target_event_count < 1:
            raise TraceError("target_event_count must be positive")
        if not 0.0 <= self.malicious_fraction <= 1.0:
            raise TraceError("malicious_fraction must be in [0, 1]")
        if self.community_count < 1 or self.multicast_group_count < 1:
            raise TraceError("community and multicast group counts must be positive")
        if not 0 < self.mean_friends_per_object < n - 1:
            raise TraceError(
                f"mean_friends_per_object must be in (0, {n - 1}), got {self.mean_friends_per_object}")
        if not 1 <= self.mean_communities_per_object <= self.community_count:
            raise TraceError("mean_communities_per_object must be in [1, community_count]")
        if not 1 <= self.mean_multicast_groups <= self.multicast_group_count:
            raise TraceError("mean_multicast_groups must be in [1, multicast_group_count]")
        for name in ("friend_bias", "community_bias"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise TraceError(f"{name} must be in [0, 1]")
        if self.duration_ticks < 1:
            raise TraceError("duration_ticks must be positive")
        for kind in self.malicious_mix:
            if kind not in MALICIOUS_FAMILY:
                raise TraceError(f"{kind.value} is not a malicious-family behaviour")
        for kind in self.good_mix:
            if kind in MALICIOUS_FAMILY:
                raise TraceError(f"{kind.value} is a malicious-family behaviour")
        for mix in (self.malicious_mix, self.good_mix):
            if not mix or any(w < 0 for w in mix.values()) or sum(mix.values()) <= 0:
                raise TraceError("behaviour mixes need non-negative weights with a positive sum")
        try:
            self.behavior_template(Kind.GOOD)
        except BehaviorError as exc:
            raise TraceError(str(exc)) from None

    def behavior_template(self, kind: Kind) -> BehaviorModel:
        return BehaviorModel(kind, self.p_good_service, self.p_bad_service,
                             self.switch_point, self.on_off_period)

    @property
    def malicious_count(self) -> int:
        # round half up; Python's round() is banker's rounding
        return int(math.floor(self.malicious_fraction * self.object_count + 0.5))


def apportion(total: int, mix: Mapping[Kind, float]) -> list[tuple[Kind, int]]:
    """Split ``total`` slots over ``mix`` by largest remainder; ties go to earlier keys."""
    kinds = list(mix)
    weight_sum = sum(mix.values())
    quotas = [total * mix[k] / weight_sum for k in kinds]
    counts = [int(math.floor(q)) for q in quotas]
    remainder = total - sum(counts)
    by_frac = sorted(range(len(kinds)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in by_frac[:remainder]:
        counts[i] += 1
    return list(zip(kinds, counts))


def _membership_count(rng: np.random.Generator, mean: float, cap: int) -> int:
    return int(min(cap, 1 + rng.poisson(mean - 1.0)))


def generate_trace(cfg: Optional[GeneratorConfig] = None) -> Trace:
    """Build a SIGCOMM-shaped synthetic trace: profiles, behaviours and events."""
    cfg = cfg or GeneratorConfig()
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    n = cfg.object_count
    ids = list(range(n))

    community_ids = [f"c{k:02d}" for k in range(cfg.community_count)]
    group_ids = [f"g{k:02d}" for k in range(cfg.multicast_group_count)]

    communities = []
    members: dict[int, list[int]] = {k: [] for k in range(cfg.community_count)}
    for oid in ids:
        k = _membership_count(rng, cfg.mean_communities_per_object, cfg.community_count)
        chosen = sorted(int(c) for c in rng.choice(cfg.community_count, size=k, replace=False))
        communities.append(chosen)
        for c in chosen:
            members[c].append(oid)

    # each multicast group belongs to a home community; objects favour groups of their own
    groups = []
    for oid in ids:
        k = _membership_count(rng, cfg.mean_multicast_groups, cfg.multicast_group_count)
        home = [g for g in range(cfg.multicast_group_count)
                if g % cfg.community_count in communities[oid]]
        chosen: set = set()
        while len(chosen) < k:
            if home and rng.random() < cfg.community_bias:
                g = home[int(rng.integers(len(home)))]
            else:
                g = int(rng.integers(cfg.multicast_group_count))
            chosen.add(g)
        groups.append(sorted(chosen))

    friends: list[set] = [set() for _ in ids]
    target_edges = int(round(n * cfg.mean_friends_per_object / 2))
    edges = 0
    attempts = 0
    max_attempts = 200 * target_edges + 1000
    while edges < target_edges:
        attempts += 1
        if attempts > max_attempts:
            raise TraceError("could not place the requested number of friendships")
        i = int(rng.integers(n))
        if rng.random() < cfg.community_bias:
            c = communities[i][int(rng.integers(len(communities[i])))]
            pool = members[c]
            j = pool[int(rng.integers(len(pool)))]
        else:
            j = int(rng.integers(n))
        if i == j or j in friends[i]:
            continue
        friends[i].add(j)
        friends[j].add(i)
        edges += 1

    net = Network()
    net.add_objects(
        (oid, SocialProfile(
            frozenset(friends[oid]),
            frozenset(community_ids[c] for c in communities[oid]),
            frozenset(group_ids[g] for g in groups[oid]),
        ))
        for oid in ids
    )

    n_bad = cfg.malicious_count
    order = [int(x) for x in rng.permutation(n)]
    bad_ids = order[:n_bad]
    good_ids = sorted(order[n_bad:])
    behaviors: dict[ObjectId, BehaviorModel] = {}
    for pool, mix in ((sorted(bad_ids), cfg.malicious_mix), (good_ids, cfg.good_mix)):
        shuffled = [pool[int(x)] for x in rng.permutation(len(pool))]
        start = 0
        for kind, count in apportion(len(pool), mix):
            for oid in shuffled[start:start + count]:
                behaviors[oid] = cfg.behavior_template(kind)
            start += count

    m = cfg.target_event_count
    ticks = np.sort(rng.integers(0, cfg.duration_ticks, size=m))
    friend_lists = [sorted(f) for f in friends]
    events = []
    for seq in range(m):
        a = int(rng.integers(n))
        fl = friend_lists[a]
        if fl and rng.random() < cfg.friend_bias:
            b = fl[int(rng.integers(len(fl)))]
        else:
            b = int(rng.integers(n - 1))
            if b >= a:
                b += 1
        events.append(TraceEvent(seq + 1, int(ticks[seq]), a, b))

    log.debug("generated trace: %d objects, %d malicious, %d events", n, n_bad, m)
    return Trace(net, events, dict(sorted(behaviors.items())), cfg.seed)
