"""Command-line entry point: generate, validate, run, compare, sweep.

Every command writes CSV files plus ``manifest.json`` under ``--out``.
The manifest holds the full resolved config, so feeding its ``config``
block back through ``--config`` reproduces the CSVs byte for byte.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .config import ConfigError, ExperimentConfig, apply_settings, load_config
from .metrics import (
    ComparisonRow,
    DetectionReport,
    SweepRow,
    TrajectoryRow,
    detection_accuracy,
    header_of,
    malicious_sweep,
    rows_of,
    run_experiment,
    scheme_comparison,
    trajectory_series,
    write_csv,
)
from .trace import TraceError, generate_trace, load_trace, write_trace
from .trust import TrustError

CSV_SCHEMA_VERSION = 1
SNAPSHOT_COLUMNS = ["node", "kind", "malicious", "global_score", "direct_score", "label",
                    "observers"]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--seed", type=int, help="seed for trace generation and replay")
    p.add_argument("--scheme", help="ws1 | ws2 | mean | w1,w2,w3")
    p.add_argument("--theta", type=float, help="trust threshold (default 0.5)")
    p.add_argument("--checkpoints", help="comma-separated event counts to snapshot at")
    p.add_argument("--out", help="output directory (default: results)")
    p.add_argument("--trace", help="replay this trace file instead of generating one")
    p.add_argument("--window", help="sliding ledger window in events (default: cumulative)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key; repeatable")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="siot-trust",
        description="Trust quantification and attack simulation for Social-IoT networks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic trace file")
    _add_common(p)
    p.add_argument("--output", help="trace file path (default: <out>/trace.siot)")

    p = sub.add_parser("validate", help="check a trace file")
    p.add_argument("path")

    p = sub.add_parser("run", help="replay a trace and report trust and detection")
    _add_common(p)

    p = sub.add_parser("compare", help="replay one trace under several weight schemes")
    _add_common(p)
    p.add_argument("--schemes", help="schemes separated by ';' (default: ws1;ws2;mean)")

    p = sub.add_parser("sweep", help="detection accuracy over malicious fractions")
    _add_common(p)
    p.add_argument("--schemes", help="schemes separated by ';' (default: ws1;ws2;mean)")
    p.add_argument("--fractions", help="comma-separated malicious fractions")
    p.add_argument("--jobs", type=int, help="parallel worker processes")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if getattr(args, "config", None):
        cfg = load_config(args.config, cfg)
    settings = {}
    for item in getattr(args, "set", []) or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        settings[key] = value
    flag_keys = {"seed": "seed", "scheme": "scheme", "theta": "theta",
                 "checkpoints": "checkpoints", "out": "out", "trace": "trace_path",
                 "window": "window", "schemes": "schemes", "fractions": "sweep",
                 "jobs": "jobs"}
    for attr, key in flag_keys.items():
        value = getattr(args, attr, None)
        if value is not None:
            settings[key] = str(value)
    cfg = apply_settings(cfg, settings)
    cfg.validate()
    return cfg


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out: Path, command: str, cfg: ExperimentConfig, files: Sequence[Path],
                   extra: Optional[dict] = None) -> Path:
    manifest = {
        "tool": "siot-trust",
        "version": __version__,
        "command": command,
        "csv_schema_version": CSV_SCHEMA_VERSION,
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        "config_text": cfg.to_text(),
        "files": {p.name: _sha256(p) for p in sorted(files)},
    }
    if extra:
        manifest.update(extra)
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _report_line(rep: DetectionReport) -> str:
    acc = "n/a" if rep.accuracy is None else f"{rep.accuracy:.3f}"
    fpr = "n/a" if rep.false_positive_rate is None else f"{rep.false_positive_rate:.3f}"
    return (f"[{rep.scheme}] @{rep.checkpoint}: detected {rep.detected}/{rep.true_malicious} "
            f"malicious (accuracy {acc}), false positives {rep.false_positives}/"
            f"{rep.good_count} (rate {fpr})")


def cmd_generate(args, cfg: ExperimentConfig) -> int:
    trace = generate_trace(cfg.generator)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = Path(args.output) if args.output else out / "trace.siot"
    path.parent.mkdir(parents=True, exist_ok=True)
    write_trace(trace, path)
    n_bad = sum(b.is_malicious for b in trace.behaviors.values())
    print(f"wrote {path}: {len(trace.network)} objects ({n_bad} malicious), "
          f"{len(trace.events)} events")
    return 0


def cmd_validate(args) -> int:
    trace = load_trace(args.path)
    n_bad = sum(b.is_malicious for b in trace.behaviors.values())
    edges = sum(len(trace.network.profile(o).friends) for o in trace.network.roster) // 2
    print(f"{args.path}: ok, {len(trace.network)} objects ({n_bad} malicious), "
          f"{edges} friendships, {len(trace.events)} events")
    return 0


def cmd_run(args, cfg: ExperimentConfig) -> int:
    res = run_experiment(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    behaviors = res.trace.behaviors
    files = []
    for snap in res.snapshots:
        observers = {}
        for (i, j) in snap.scores:
            observers[j] = observers.get(j, 0) + 1
        rows = [[o, behaviors[o].kind.value, behaviors[o].kind in cfg.malicious_kinds,
                 snap.global_scores[o], snap.direct_scores[o], snap.labels[o],
                 observers.get(o, 0)] for o in sorted(snap.global_scores)]
        files.append(write_csv(out / f"snapshot_{snap.at_event:06d}.csv", SNAPSHOT_COLUMNS, rows))

    reports = [detection_accuracy(s, behaviors, scheme=res.scheme.name,
                                  malicious_kinds=cfg.malicious_kinds) for s in res.snapshots]
    files.append(write_csv(out / "detection.csv", header_of(DetectionReport), rows_of(reports)))
    traj = trajectory_series(res.snapshots, res.tracked)
    files.append(write_csv(out / "trajectory.csv", header_of(TrajectoryRow), rows_of(traj)))
    write_manifest(out, "run", cfg, files, {"tracked": res.tracked})
    print(_report_line(res.report))
    print(f"wrote {len(files)} CSV files to {out}")
    return 0


def cmd_compare(args, cfg: ExperimentConfig) -> int:
    rows, reports = scheme_comparison(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    files = [
        write_csv(out / "comparison.csv", header_of(ComparisonRow), rows_of(rows)),
        write_csv(out / "comparison_detection.csv", header_of(DetectionReport), rows_of(reports)),
    ]
    write_manifest(out, "compare", cfg, files)
    for rep in reports:
        print(_report_line(rep))
    return 0


def cmd_sweep(args, cfg: ExperimentConfig) -> int:
    rows = malicious_sweep(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    files = [write_csv(out / "sweep.csv", header_of(SweepRow), rows_of(rows))]
    write_manifest(out, "sweep", cfg, files)
    for r in rows:
        acc = "n/a" if r.detection_accuracy is None else f"{r.detection_accuracy:.3f}"
        good = "n/a" if r.mean_good_score is None else f"{r.mean_good_score:.3f}"
        print(f"fraction {r.fraction:.2f} {r.scheme:>5}: accuracy {acc}, mean good score {good}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "validate":
            return cmd_validate(args)
        cfg = resolve_config(args)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"siot-trust: error: {exc}", file=sys.stderr)
        return 2
    except (TraceError, OSError) as exc:
        print(f"siot-trust: error: {exc}", file=sys.stderr)
        return 1
    handlers = {"generate": cmd_generate, "run": cmd_run, "compare": cmd_compare,
                "sweep": cmd_sweep}
    try:
        return handlers[args.command](args, cfg)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"siot-trust: error: {exc}", file=sys.stderr)
        return 2
    except (TraceError, TrustError, ValueError, OSError, KeyError) as exc:
        print(f"siot-trust: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
