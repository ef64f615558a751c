"""Experiment configuration: a flat ``key = value`` file plus CLI overrides."""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .behavior import MALICIOUS_FAMILY, Kind
from .trace import GeneratorConfig
from .trust import DEFAULT_THETA, TrustError, WeightScheme, parse_scheme


class ConfigError(ValueError):
    pass


DEFAULT_SWEEP = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6)


@dataclass
class ExperimentConfig:
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    trace_path: Optional[str] = None
    scheme: str = "ws1"
    schemes: tuple = ("ws1", "ws2", "mean")
    theta: float = DEFAULT_THETA
    checkpoints: Optional[tuple] = None
    sweep: tuple = DEFAULT_SWEEP
    track: Optional[tuple] = None
    track_per_class: int = 5
    out: str = "results"
    seed: int = 0
    window: Optional[int] = None
    observers: str = "interacted"
    bad_mouthing: bool = True
    ballot_stuffing: bool = True
    malicious_kinds: frozenset = MALICIOUS_FAMILY
    jobs: int = 1

    def weight_scheme(self) -> WeightScheme:
        return parse_scheme(self.scheme)

    def weight_schemes(self) -> list[WeightScheme]:
        return [parse_scheme(s) for s in self.schemes]

    def validate(self) -> None:
        try:
            self.weight_scheme()
            self.weight_schemes()
        except TrustError as exc:
            raise ConfigError(str(exc)) from None
        if not 0.0 <= self.theta <= 1.0:
            raise ConfigError(f"theta must be in [0, 1], got {self.theta}")
        if any(not 0.0 <= f <= 1.0 for f in self.sweep):
            raise ConfigError(f"sweep fractions must be in [0, 1], got {list(self.sweep)}")
        if self.checkpoints is not None:
            cps = list(self.checkpoints)
            if any(c <= 0 for c in cps) or cps != sorted(set(cps)):
                raise ConfigError(f"checkpoints must be positive and strictly increasing: {cps}")
        if self.window is not None and self.window < 1:
            raise ConfigError("window must be >= 1")
        if self.observers not in ("interacted", "any"):
            raise ConfigError(f"observers must be 'interacted' or 'any', got {self.observers!r}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.trace_path is None:
            try:
                self.generator.validate()
            except ValueError as exc:
                raise ConfigError(str(exc)) from None

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return dataclasses.replace(
            self, seed=seed, generator=dataclasses.replace(self.generator, seed=seed))

    def to_dict(self) -> dict:
        g = dataclasses.asdict(self.generator)
        g["malicious_mix"] = _fmt_mix(self.generator.malicious_mix)
        g["good_mix"] = _fmt_mix(self.generator.good_mix)
        return {
            "generator": g,
            "trace_path": self.trace_path,
            "scheme": self.scheme,
            "schemes": list(self.schemes),
            "theta": self.theta,
            "checkpoints": None if self.checkpoints is None else list(self.checkpoints),
            "sweep": list(self.sweep),
            "track": None if self.track is None else list(self.track),
            "track_per_class": self.track_per_class,
            "seed": self.seed,
            "window": self.window,
            "observers": self.observers,
            "bad_mouthing": self.bad_mouthing,
            "ballot_stuffing": self.ballot_stuffing,
            "malicious_kinds": sorted(k.value for k in self.malicious_kinds),
        }

    def to_text(self) -> str:
        """Render as a flat config file that :func:`load_config` reads back."""
        d = self.to_dict()
        lines = []
        for key, value in d.pop("generator").items():
            if key == "seed":
                continue
            lines.append(f"{key} = {_fmt_value(value)}")
        for key, value in d.items():
            if key == "schemes":
                value = ";".join(value)
            lines.append(f"{key} = {_fmt_value(value)}")
        return "\n".join(lines) + "\n"


def derived_seed(seed: int, *key: int) -> int:
    """Deterministic child seed for a sweep cell."""
    return int(np.random.SeedSequence([seed, *key]).generate_state(1)[0])


def _fmt_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    return str(value)


def _fmt_mix(mix) -> str:
    return ",".join(f"{k.value}:{w!r}" for k, w in mix.items())


def _parse_mix(text: str) -> dict:
    mix = {}
    for part in text.split(","):
        if not part.strip():
            continue
        name, sep, weight = part.partition(":")
        mix[Kind.parse(name)] = float(weight) if sep else 1.0
    return mix


def _opt_int(text: str) -> Optional[int]:
    return None if text.strip().lower() in ("none", "auto", "") else int(text)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int_list(text: str) -> Optional[tuple]:
    if text.strip().lower() in ("none", ""):
        return None
    return tuple(int(x) for x in text.split(",") if x.strip())


def _float_list(text: str) -> tuple:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _str_list(text: str) -> tuple:
    # custom schemes contain commas, so entries are separated by ';' or whitespace
    if ";" in text:
        return tuple(s.strip() for s in text.split(";") if s.strip())
    return tuple(s for s in text.replace(",", " ").split() if s)


_GEN_KEYS = {
    "objects": ("object_count", int),
    "object_count": ("object_count", int),
    "events": ("target_event_count", int),
    "target_event_count": ("target_event_count", int),
    "malicious_fraction": ("malicious_fraction", float),
    "community_count": ("community_count", int),
    "mean_friends_per_object": ("mean_friends_per_object", float),
    "mean_communities_per_object": ("mean_communities_per_object", float),
    "multicast_group_count": ("multicast_group_count", int),
    "mean_multicast_groups": ("mean_multicast_groups", float),
    "friend_bias": ("friend_bias", float),
    "community_bias": ("community_bias", float),
    "duration_ticks": ("duration_ticks", int),
    "p_good_service": ("p_good_service", float),
    "p_bad_service": ("p_bad_service", float),
    "switch_point": ("switch_point", float),
    "on_off_period": ("on_off_period", _opt_int),
    "malicious_mix": ("malicious_mix", _parse_mix),
    "good_mix": ("good_mix", _parse_mix),
}

_EXP_KEYS = {
    "trace": ("trace_path", lambda s: None if s.lower() == "none" else s),
    "trace_path": ("trace_path", lambda s: None if s.lower() == "none" else s),
    "scheme": ("scheme", str),
    "schemes": ("schemes", _str_list),
    "theta": ("theta", float),
    "checkpoints": ("checkpoints", _int_list),
    "sweep": ("sweep", _float_list),
    "track": ("track", _int_list),
    "track_per_class": ("track_per_class", int),
    "out": ("out", str),
    "seed": ("seed", int),
    "window": ("window", _opt_int),
    "observers": ("observers", str),
    "bad_mouthing": ("bad_mouthing", _bool),
    "ballot_stuffing": ("ballot_stuffing", _bool),
    "malicious_kinds": ("malicious_kinds", lambda s: frozenset(Kind.parse(x) for x in _str_list(s))),
    "jobs": ("jobs", int),
}


def apply_settings(cfg: ExperimentConfig, settings: dict) -> ExperimentConfig:
    """Return a copy of ``cfg`` with flat string settings applied."""
    gen_changes, exp_changes = {}, {}
    for raw_key, raw_value in settings.items():
        key = raw_key.strip().lower().replace("-", "_")
        value = str(raw_value).strip()
        try:
            if key in _GEN_KEYS:
                name, conv = _GEN_KEYS[key]
                gen_changes[name] = conv(value)
            elif key in _EXP_KEYS:
                name, conv = _EXP_KEYS[key]
                exp_changes[name] = conv(value)
            else:
                raise ConfigError(f"unknown config key {raw_key!r}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"bad value for {raw_key!r}: {exc}") from None
    gen = dataclasses.replace(cfg.generator, **gen_changes)
    out = dataclasses.replace(cfg, generator=gen, **exp_changes)
    # one seed drives both trace generation and the replay
    return out.with_seed(out.seed)


def parse_config_text(text: str) -> dict:
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                       comment_prefixes=("#",), inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string("[experiment]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    return dict(parser["experiment"])


def load_config(path, base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return apply_settings(base or ExperimentConfig(), parse_config_text(text))
