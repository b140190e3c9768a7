"""Scenario configuration, profiles and the INI-style config loader.

A config file is a set of ``[section]`` blocks with ``key = value`` lines.
Every key is optional; an empty file yields the full paper scenario. Unknown
sections or keys are rejected so typos cannot pass silently::

    [geometry]
    num_rrs = 4
    area_radius = 500
    cell_radius = 100

    [radio]
    num_subcarriers = 32
    max_power_dbm = 40

    [users]
    sweep = 40, 80, 160, 240

    [run]
    mode = all
    train_slots = 4000
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Tuple

MODES = ("centralized", "distributed", "smart", "all")
LEARNERS = ("sac", "ddpg", "dqn")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    # geometry
    area_radius: float = 500.0
    cell_radius: float = 100.0
    num_rrs: int = 4
    # radio
    num_subcarriers: int = 32
    bandwidth_hz: float = 10e6
    max_power_dbm: float = 40.0
    noise_psd_dbm_hz: float = -174.0
    max_users_per_carrier: int = 2
    # users
    num_users: int = 40
    sweep: Tuple[int, ...] = (40, 80, 160, 240)
    # bits
    b_csi: int = 16
    b_sc: int = 4
    b_pw: int = 4
    # toc
    w_overhead: float = 1.0
    w_complexity: float = 1.0
    ref_users: int = 40
    monitoring: bool = True
    # rl
    hidden: Tuple[int, ...] = (128, 128)
    lr: float = 3e-4
    gamma: float = 0.95
    tau: float = 0.005
    alpha: float = 0.2
    batch_size: int = 64
    buffer_size: int = 100_000
    updates_per_slot: int = 1
    rap_learner: str = "sac"
    sdn_learner: str = "sac"
    rap_reward_scale: float = 10.0     # bit/s/Hz per carrier mapped to reward 1
    warmup_slots: int = 500
    toc_ema: float = 0.1
    stale_decay: float = 0.99
    phase_period: int = 100
    decision_epoch: int = 1
    # run
    train_slots: int = 4000
    eval_slots: int = 1000
    seed: int = 0
    mode: str = "all"

    def __post_init__(self):
        positive = ("area_radius", "cell_radius", "num_rrs", "num_subcarriers", "bandwidth_hz",
                    "max_users_per_carrier", "b_csi", "b_sc", "b_pw", "ref_users", "lr",
                    "batch_size", "buffer_size", "rap_reward_scale", "phase_period", "decision_epoch")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)!r}")
        for name in ("num_users", "updates_per_slot", "warmup_slots", "train_slots", "eval_slots",
                     "w_overhead", "w_complexity", "alpha"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.cell_radius > self.area_radius:
            raise ConfigError("cell_radius exceeds area_radius")
        if not 0 <= self.gamma < 1:
            raise ConfigError("gamma must lie in [0, 1)")
        if not 0 < self.tau <= 1:
            raise ConfigError("tau must lie in (0, 1]")
        if not 0 < self.toc_ema <= 1 or not 0 < self.stale_decay <= 1:
            raise ConfigError("toc_ema and stale_decay must lie in (0, 1]")
        if not self.sweep or any(k < 0 for k in self.sweep):
            raise ConfigError("sweep must be a non-empty list of user counts")
        if any(b <= a for a, b in zip(self.sweep, self.sweep[1:])):
            raise ConfigError(f"sweep must be strictly increasing, got {list(self.sweep)}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.rap_learner not in LEARNERS:
            raise ConfigError(f"rap_learner must be one of {LEARNERS}")
        if self.sdn_learner not in ("sac", "dqn"):
            raise ConfigError("sdn_learner must be 'sac' or 'dqn'")
        if not self.hidden or any(h <= 0 for h in self.hidden):
            raise ConfigError("hidden must list positive widths")

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def modes(self) -> Tuple[str, ...]:
        return ("centralized", "distributed", "smart") if self.mode == "all" else (self.mode,)


PROFILES: Dict[str, Dict[str, object]] = {
    "paper": {},
    "fast": {
        "num_subcarriers": 16,
        "sweep": (8, 16, 32, 64, 96),
        "num_users": 8,
        "train_slots": 1500,
        "eval_slots": 500,
    },
}

SECTIONS: Dict[str, Tuple[str, ...]] = {
    "geometry": ("area_radius", "cell_radius", "num_rrs"),
    "radio": ("num_subcarriers", "bandwidth_hz", "max_power_dbm", "noise_psd_dbm_hz",
              "max_users_per_carrier"),
    "users": ("num_users", "sweep"),
    "bits": ("b_csi", "b_sc", "b_pw"),
    "toc": ("w_overhead", "w_complexity", "ref_users", "monitoring"),
    "rl": ("hidden", "lr", "gamma", "tau", "alpha", "batch_size", "buffer_size", "updates_per_slot",
           "rap_learner", "sdn_learner", "rap_reward_scale", "warmup_slots", "toc_ema",
           "stale_decay", "phase_period", "decision_epoch"),
    "run": ("train_slots", "eval_slots", "seed", "mode"),
}

_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}


def _parse(name: str, raw: str):
    default = _FIELDS[name].default
    try:
        if isinstance(default, bool):
            low = raw.strip().lower()
            if low not in ("true", "false", "yes", "no", "1", "0", "on", "off"):
                raise ValueError(raw)
            return low in ("true", "yes", "1", "on")
        if isinstance(default, tuple):
            return tuple(int(v) for v in raw.replace(",", " ").split())
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw.strip()
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None


def profile_config(profile: str = "paper", **overrides) -> ScenarioConfig:
    if profile not in PROFILES:
        raise ConfigError(f"unknown profile {profile!r}; choose from {sorted(PROFILES)}")
    values = dict(PROFILES[profile])
    values.update(overrides)
    return ScenarioConfig(**values)


def load_config(path=None, profile: str = "paper", **overrides) -> ScenarioConfig:
    """Read a config file on top of a profile; keyword overrides win last."""
    values: Dict[str, object] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            parser.read_string(path.read_text(), source=str(path))
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from None
        for section in parser.sections():
            if section not in SECTIONS:
                raise ConfigError(f"unknown section [{section}]")
            for key, raw in parser.items(section):
                if key not in SECTIONS[section]:
                    raise ConfigError(f"unknown key {key!r} in section [{section}]")
                values[key] = _parse(key, raw)
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return profile_config(profile, **values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
