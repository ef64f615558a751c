"""Detection accuracy, trajectories, and the scheme/sweep experiment drivers."""

from __future__ import annotations

import csv
import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .behavior import MALICIOUS_FAMILY, default_policies
from .config import ConfigError, ExperimentConfig, derived_seed
from .engine import TrustSnapshot, run
from .trace import Trace, generate_trace, load_trace
from .trust import Label, WeightScheme

CHECKPOINT_PARTS = 5


@dataclass
class DetectionReport:
    checkpoint: int
    scheme: str
    true_malicious: int
    detected: int
    accuracy: Optional[float]
    good_count: int
    false_positives: int
    false_positive_rate: Optional[float]

    @property
    def missed(self) -> int:
        return self.true_malicious - self.detected


def ground_truth(behaviors, malicious_kinds=MALICIOUS_FAMILY) -> dict:
    """Object id -> True when it counts as malicious for scoring."""
    return {oid: b.kind in malicious_kinds for oid, b in behaviors.items()}


def detection_accuracy(snapshot: TrustSnapshot, behaviors, *, scheme: str = "",
                       malicious_kinds=MALICIOUS_FAMILY) -> DetectionReport:
    truth = ground_truth(behaviors, malicious_kinds)
    bad = [o for o, m in truth.items() if m]
    good = [o for o, m in truth.items() if not m]
    detected = sum(snapshot.labels[o] is Label.UNTRUSTWORTHY for o in bad)
    fps = sum(snapshot.labels[o] is Label.UNTRUSTWORTHY for o in good)
    return DetectionReport(
        checkpoint=snapshot.at_event,
        scheme=scheme,
        true_malicious=len(bad),
        detected=detected,
        accuracy=detected / len(bad) if bad else None,
        good_count=len(good),
        false_positives=fps,
        false_positive_rate=fps / len(good) if good else None,
    )


@dataclass(frozen=True)
class TrajectoryRow:
    checkpoint: int
    node: int
    score: float
    direct_score: Optional[float]


def trajectory_series(snapshots: Sequence[TrustSnapshot], nodes: Iterable[int]) -> list[TrajectoryRow]:
    """Long-format (checkpoint, node, score) table for plotting."""
    nodes = list(nodes)
    rows = []
    for snap in snapshots:
        for node in nodes:
            if node not in snap.global_scores:
                raise KeyError(f"unknown node {node!r}")
            rows.append(TrajectoryRow(snap.at_event, node, snap.global_scores[node],
                                      snap.direct_scores.get(node)))
    return rows


def count_reversals(series: Sequence[float], min_swing: float = 0.05) -> int:
    """Number of direction changes in ``series``, ignoring moves under ``min_swing``.

    Zig-zag filter: a reversal counts once the series has moved at least
    ``min_swing`` against the current trend from its latest extreme.
    """
    if not series:
        return 0
    direction = 0
    lo = hi = extreme = series[0]
    reversals = 0
    for x in series[1:]:
        if direction == 0:
            lo, hi = min(lo, x), max(hi, x)
            if x - lo >= min_swing:
                direction, extreme = 1, x
            elif hi - x >= min_swing:
                direction, extreme = -1, x
        elif direction > 0:
            if x > extreme:
                extreme = x
            elif extreme - x >= min_swing:
                direction, extreme = -1, x
                reversals += 1
        else:
            if x < extreme:
                extreme = x
            elif x - extreme >= min_swing:
                direction, extreme = 1, x
                reversals += 1
    return reversals


def default_checkpoints(n_events: int, parts: int = CHECKPOINT_PARTS) -> list[int]:
    cuts = sorted({max(1, round(n_events * k / parts)) for k in range(1, parts + 1)})
    return cuts


def select_tracked(behaviors, per_class: int, seed: int,
                   malicious_kinds=MALICIOUS_FAMILY) -> list[int]:
    """Pick up to ``per_class`` good and malicious nodes at random (seeded)."""
    rng = np.random.default_rng([seed, 0x7AC])
    truth = ground_truth(behaviors, malicious_kinds)
    picked = []
    for flag in (False, True):
        pool = sorted(o for o, m in truth.items() if m is flag)
        if not pool:
            continue
        k = min(per_class, len(pool))
        picked.extend(sorted(int(pool[i]) for i in rng.choice(len(pool), size=k, replace=False)))
    return picked


@dataclass
class RunResult:
    trace: Trace
    scheme: WeightScheme
    checkpoints: list
    snapshots: list
    tracked: list
    report: DetectionReport


def obtain_trace(cfg: ExperimentConfig) -> Trace:
    if cfg.trace_path is not None:
        return load_trace(cfg.trace_path)
    return generate_trace(cfg.generator)


def run_experiment(cfg: ExperimentConfig, scheme: Optional[WeightScheme] = None,
                   trace: Optional[Trace] = None) -> RunResult:
    cfg.validate()
    scheme = scheme or cfg.weight_scheme()
    trace = trace or obtain_trace(cfg)
    net, events, behaviors = trace
    checkpoints = list(cfg.checkpoints) if cfg.checkpoints else default_checkpoints(len(events))
    policies = default_policies(behaviors, bad_mouthing=cfg.bad_mouthing,
                                ballot_stuffing=cfg.ballot_stuffing)
    snapshots = run(net, events, behaviors, policies, scheme=scheme, theta=cfg.theta,
                    checkpoints=checkpoints, seed=cfg.seed, window=cfg.window,
                    observers=cfg.observers)
    tracked = list(cfg.track) if cfg.track else select_tracked(
        behaviors, cfg.track_per_class, cfg.seed, cfg.malicious_kinds)
    missing = [n for n in tracked if n not in net]
    if missing:
        raise ConfigError(f"tracked nodes not in network: {missing}")
    report = detection_accuracy(snapshots[-1], behaviors, scheme=scheme.name,
                                malicious_kinds=cfg.malicious_kinds)
    return RunResult(trace, scheme, checkpoints, snapshots, tracked, report)


@dataclass(frozen=True)
class ComparisonRow:
    scheme: str
    node: int
    checkpoint: int
    score: float


def scheme_comparison(cfg: ExperimentConfig, trace: Optional[Trace] = None):
    """Replay one trace under every configured scheme.

    Returns the long-format score table for the tracked nodes and the
    final-checkpoint detection report per scheme.
    """
    schemes = cfg.weight_schemes()
    if len(schemes) < 2:
        raise ConfigError("scheme comparison needs at least two schemes")
    trace = trace or obtain_trace(cfg)
    rows, reports = [], []
    for scheme in schemes:
        res = run_experiment(cfg, scheme, trace)
        reports.append(res.report)
        for r in trajectory_series(res.snapshots, res.tracked):
            rows.append(ComparisonRow(scheme.name, r.node, r.checkpoint, r.score))
    return rows, reports


@dataclass(frozen=True)
class SweepRow:
    fraction: float
    scheme: str
    seed: int
    true_malicious: int
    detected: int
    detection_accuracy: Optional[float]
    false_positive_rate: Optional[float]
    mean_good_score: Optional[float]


def _sweep_cell(cfg: ExperimentConfig, index: int, fraction: float) -> list[SweepRow]:
    seed = derived_seed(cfg.seed, index)
    cell = cfg.with_seed(seed)
    cell = dataclasses.replace(
        cell, generator=dataclasses.replace(cell.generator, malicious_fraction=fraction))
    trace = generate_trace(cell.generator)
    truth = ground_truth(trace.behaviors, cfg.malicious_kinds)
    good = [o for o, m in truth.items() if not m]
    rows = []
    # schemes share the trace and replay seed, so their rows are paired
    for scheme in cfg.weight_schemes():
        res = run_experiment(cell, scheme, trace)
        final = res.snapshots[-1]
        mean_good = (math.fsum(final.global_scores[o] for o in good) / len(good)) if good else None
        rep = res.report
        rows.append(SweepRow(fraction, scheme.name, seed, rep.true_malicious, rep.detected,
                             rep.accuracy, rep.false_positive_rate, mean_good))
    return rows


def malicious_sweep(cfg: ExperimentConfig) -> list[SweepRow]:
    if not cfg.sweep:
        raise ConfigError("sweep needs at least one malicious fraction")
    if cfg.trace_path is not None:
        raise ConfigError("a sweep generates its own traces; drop the trace path")
    cfg.validate()
    cells = list(enumerate(cfg.sweep))
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            parts = list(pool.map(_sweep_cell, [cfg] * len(cells),
                                  [i for i, _ in cells], [f for _, f in cells]))
    else:
        parts = [_sweep_cell(cfg, i, f) for i, f in cells]
    rows = [row for part in parts for row in part]
    return sorted(rows, key=lambda r: (r.fraction, r.scheme))


# ---- CSV output -------------------------------------------------------------


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, Label):
        return value.value
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def rows_of(items: Iterable) -> list[list]:
    return [list(dataclasses.astuple(it)) for it in items]


def header_of(cls) -> list[str]:
    return [f.name for f in dataclasses.fields(cls)]
