"""YAML experiment configuration."""

from __future__ import annotations

from dataclasses import fields
from pathlib import Path

import yaml

from .experiments import ExperimentConfig
from .simulation import KNOWN_SCHEMES, MobilityConfig
from .traffic import BURSTY, STREAMING, TrafficConfig


class ConfigError(ValueError):
    pass


_TOP = {f.name for f in fields(ExperimentConfig)}
_TRAFFIC = {f.name for f in fields(TrafficConfig)}
_MOBILITY = {f.name for f in fields(MobilityConfig)}


def _unknown(section: str, given, allowed):
    extra = sorted(set(given) - set(allowed))
    if extra:
        raise ConfigError(f"unknown key(s) in {section}: {', '.join(extra)}")


def config_from_dict(data: dict | None) -> ExperimentConfig:
    data = dict(data or {})
    _unknown("config", data, _TOP)
    traffic = data.pop("traffic", None) or {}
    if not isinstance(traffic, dict):
        raise ConfigError("traffic must be a mapping")
    _unknown("traffic", traffic, _TRAFFIC)
    for key in ("streaming_rate", "bursty_rate"):
        if key in traffic:
            traffic[key] = tuple(float(v) for v in traffic[key])
    tcfg = TrafficConfig(**traffic)
    if tcfg.pattern not in (STREAMING, BURSTY):
        raise ConfigError(f"traffic.pattern must be {STREAMING} or {BURSTY}")

    mob = data.pop("mobility", None)
    mcfg = None
    if mob is not None:
        if not isinstance(mob, dict):
            raise ConfigError("mobility must be a mapping")
        _unknown("mobility", mob, _MOBILITY)
        mcfg = MobilityConfig(**mob)

    if "nodes" in data and isinstance(data["nodes"], int):
        data["nodes"] = [data["nodes"]]
    cfg = ExperimentConfig(traffic=tcfg, mobility=mcfg, **data)

    if not cfg.nodes or any(int(n) < 2 for n in cfg.nodes):
        raise ConfigError("nodes must list sizes of at least 2")
    if cfg.networks < 1 or cfg.realizations < 1 or cfg.T < 1:
        raise ConfigError("networks, realizations and T must be positive")
    bad = [s for s in cfg.schemes if s not in KNOWN_SCHEMES]
    if bad:
        raise ConfigError(f"unknown scheme(s) {bad}; known: {sorted(KNOWN_SCHEMES)}")
    if cfg.rate_mode not in ("deterministic", "jittered"):
        raise ConfigError("rate_mode must be deterministic or jittered")
    if cfg.scheduler not in ("greedy", "exact"):
        raise ConfigError("scheduler must be greedy or exact")
    if any(m not in ("ideal", "neighbor") for m in cfg.modes):
        raise ConfigError("modes may only contain ideal and neighbor")
    if cfg.multipliers is not None and any(a <= 0 for a in cfg.multipliers):
        raise ConfigError("multipliers must be positive")
    return cfg


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        data = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{p}: {exc}") from exc
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"{p}: top level must be a mapping")
    try:
        return config_from_dict(data)
    except TypeError as exc:
        raise ConfigError(f"{p}: {exc}") from exc
