"""Test-instance construction and the delay/delivery experiments."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .bias import DistanceScheme
from .netgraph import generate_network, redraw_rates
from .simulation import (
    Instance,
    MobilityConfig,
    SchemeSpec,
    edr_scheme,
    mobility_trajectory,
    run_instance,
    scheme,
)
from .traffic import TrafficConfig, arrival_matrix, generate_flows

log = logging.getLogger(__name__)

SWEEP_COLUMNS = ["scheme", "nodes", "instances", "mean_delay", "delay_ci95", "delivery_rate", "delivery_std"]
MOBILITY_COLUMNS = ["scheme", "mode", "instances", "mean_delay", "delay_std", "delivery_rate", "delivery_std"]


@dataclass
class ExperimentConfig:
    nodes: list[int] = field(default_factory=lambda: [20])
    networks: int = 10
    realizations: int = 10
    T: int = 1000
    seed: int = 0
    target_degree: float = 6.0
    connect_radius: float = 1.0
    interference_radius: float | None = None
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    rate_mode: str = "jittered"
    schemes: list[str] = field(default_factory=lambda: ["BP", "EDR-rbar"])
    multipliers: list[float] | None = None
    scheduler: str = "greedy"
    mobility: MobilityConfig | None = None
    modes: list[str] = field(default_factory=lambda: ["ideal", "neighbor"])


def make_instance(cfg: ExperimentConfig, n: int, net_idx: int, real_idx: int) -> Instance:
    """Instance ``(net_idx, real_idx)`` of size ``n``.

    The layout depends only on ``(seed, n, net_idx)``; link rates, flows,
    arrivals, mobility and per-slot rate draws also depend on ``real_idx``.
    """
    net = generate_network(
        n,
        np.random.SeedSequence([cfg.seed, n, net_idx]),
        target_degree=cfg.target_degree,
        connect_radius=cfg.connect_radius,
        interference_radius=cfg.interference_radius,
    )
    ss = np.random.SeedSequence([cfg.seed, n, net_idx, real_idx])
    s_traffic, s_mob, s_rate = ss.spawn(3)
    rng = np.random.default_rng(s_traffic)
    net = redraw_rates(net, rng)
    flows = generate_flows(n, rng, cfg.traffic)
    arr = arrival_matrix(flows, cfg.T, rng)
    topo = []
    if cfg.mobility is not None:
        topo = mobility_trajectory(net, cfg.T, cfg.mobility, np.random.default_rng(s_mob))
    return Instance(
        net=net,
        flows=flows,
        arrivals=arr,
        T=cfg.T,
        rate_mode=cfg.rate_mode,
        rate_seed=int(s_rate.generate_state(1)[0]),
        topologies=topo,
    )


def _specs(cfg: ExperimentConfig) -> list[SchemeSpec]:
    specs = []
    for name in cfg.schemes:
        if cfg.multipliers:
            for a in cfg.multipliers:
                specs.append(_scaled(name, a).with_(scheduler=cfg.scheduler))
        else:
            specs.append(scheme(name).with_(scheduler=cfg.scheduler))
    return specs


def _scaled(name: str, a: float) -> SchemeSpec:
    if name.startswith("EDR"):
        base = scheme(name)
        spec = edr_scheme(a, base.backlog)
        return spec.with_(name=f"{name}@a={a:g}")
    if name.startswith("SP"):
        base = scheme(name)
        dist = DistanceScheme("sp_over_xr", base.distance.scale, a)
        return base.with_(name=f"{name}-min@a={a:g}", distance=dist)
    raise ValueError(f"scheme {name!r} has no per-hop distance to scale")


def summarize(values) -> tuple[float, float, float]:
    """Mean, sample std and normal-approximation 95% half-width."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return math.nan, math.nan, math.nan
    mean = float(v.mean())
    std = float(v.std(ddof=1)) if v.size > 1 else 0.0
    return mean, std, 1.96 * std / math.sqrt(v.size)


def _run_cell(cfg, n, specs):
    """All instances at one grid point; per-scheme lists of (delay, delivery)."""
    out = {s.name: [] for s in specs}
    failures = []
    for ni in range(cfg.networks):
        for ri in range(cfg.realizations):
            try:
                inst = make_instance(cfg, n, ni, ri)
            except Exception as exc:  # noqa: BLE001 - recorded, sweep continues
                failures.append((n, ni, ri, None, repr(exc)))
                log.warning("instance n=%d net=%d real=%d failed: %s", n, ni, ri, exc)
                continue
            for s in specs:
                try:
                    res = run_instance(inst, s)
                except Exception as exc:  # noqa: BLE001
                    failures.append((n, ni, ri, s.name, repr(exc)))
                    log.warning("%s on n=%d net=%d real=%d failed: %s", s.name, n, ni, ri, exc)
                    continue
                out[s.name].append((res.mean_delay, res.delivery_rate))
    return out, failures


def run_sweep(cfg: ExperimentConfig) -> tuple[list[dict], list]:
    """One row per (scheme, network size), in grid order."""
    specs = _specs(cfg)
    rows, failures = [], []
    for n in cfg.nodes:
        cell, fails = _run_cell(cfg, n, specs)
        failures += fails
        for s in specs:
            vals = cell[s.name]
            d_mean, _, d_ci = summarize([v[0] for v in vals])
            r_mean, r_std, _ = summarize([v[1] for v in vals])
            rows.append(
                {
                    "scheme": s.name,
                    "nodes": n,
                    "instances": len(vals),
                    "mean_delay": d_mean,
                    "delay_ci95": d_ci,
                    "delivery_rate": r_mean,
                    "delivery_std": r_std,
                }
            )
    return rows, failures


def mobility_experiment(cfg: ExperimentConfig) -> tuple[list[dict], list]:
    """EDR and SP biases under node mobility, with each bias-maintenance mode."""
    if cfg.mobility is None:
        cfg = replace(cfg, mobility=MobilityConfig())
    specs = [
        scheme(name).with_(maintenance=mode, scheduler=cfg.scheduler, name=name)
        for name in cfg.schemes
        for mode in cfg.modes
    ]
    n = cfg.nodes[0]
    results: dict[tuple[str, str], list] = {(s.name, s.maintenance): [] for s in specs}
    failures = []
    for ni in range(cfg.networks):
        for ri in range(cfg.realizations):
            inst = make_instance(cfg, n, ni, ri)
            for s in specs:
                try:
                    res = run_instance(inst, s)
                except Exception as exc:  # noqa: BLE001
                    failures.append((n, ni, ri, f"{s.name}/{s.maintenance}", repr(exc)))
                    continue
                results[(s.name, s.maintenance)].append((res.mean_delay, res.delivery_rate))
    rows = []
    for (name, mode), vals in results.items():
        d_mean, d_std, _ = summarize([v[0] for v in vals])
        r_mean, r_std, _ = summarize([v[1] for v in vals])
        rows.append(
            {
                "scheme": name,
                "mode": mode,
                "instances": len(vals),
                "mean_delay": d_mean,
                "delay_std": d_std,
                "delivery_rate": r_mean,
                "delivery_std": r_std,
            }
        )
    return rows, failures


def single_run(cfg: ExperimentConfig, trace: bool = False) -> tuple[list[dict], dict]:
    """Every configured scheme on instance (0, 0) of the first network size."""
    n = cfg.nodes[0]
    inst = make_instance(cfg, n, 0, 0)
    rows, traces = [], {}
    for s in _specs(cfg):
        res = run_instance(inst, s)
        rows.append(
            {
                "scheme": s.name,
                "nodes": n,
                "packets": res.n_packets,
                "delivered": int(res.delivered.sum()),
                "mean_delay": res.mean_delay,
                "delivery_rate": res.delivery_rate,
            }
        )
        if trace:
            traces[s.name] = res.records()
    return rows, traces

