"""Flow generation and per-slot exogenous arrivals."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

STREAMING = "streaming"
BURSTY = "bursty"


@dataclass(frozen=True)
class FlowSpec:
    source: int
    destination: int
    rate: float
    pattern: str = STREAMING
    cutoff: int = 30

    def __post_init__(self):
        if self.source == self.destination:
            raise ValueError("flow source and destination must differ")
        if self.rate < 0:
            raise ValueError("flow rate must be nonnegative")
        if self.pattern not in (STREAMING, BURSTY):
            raise ValueError(f"unknown traffic pattern {self.pattern!r}")


@dataclass(frozen=True)
class TrafficConfig:
    pattern: str = STREAMING
    min_fraction: float = 0.30
    max_fraction: float = 0.50
    streaming_rate: tuple[float, float] = (0.2, 1.0)
    bursty_rate: tuple[float, float] = (2.0, 10.0)
    bursty_cutoff: int = 30

    def flow_count_range(self, n: int) -> tuple[int, int]:
        return math.floor(self.min_fraction * n), math.ceil(self.max_fraction * n)


def generate_flows(n_nodes: int, rng, config: TrafficConfig = TrafficConfig()) -> list[FlowSpec]:
    if n_nodes < 2:
        raise ValueError("need at least two nodes")
    lo, hi = config.flow_count_range(n_nodes)
    count = int(rng.integers(lo, hi + 1))
    low, high = config.streaming_rate if config.pattern == STREAMING else config.bursty_rate
    flows = []
    for _ in range(count):
        src = int(rng.integers(n_nodes))
        dst = int(rng.integers(n_nodes - 1))
        if dst >= src:
            dst += 1
        flows.append(
            FlowSpec(src, dst, float(rng.uniform(low, high)), config.pattern, config.bursty_cutoff)
        )
    return flows


def arrivals(flow: FlowSpec, t: int, rng) -> int:
    """Poisson packet count injected by ``flow`` in slot ``t``."""
    if t < 0:
        raise ValueError("slot must be nonnegative")
    if flow.pattern == BURSTY and t >= flow.cutoff:
        return 0
    return int(rng.poisson(flow.rate))


def arrival_matrix(flows, T: int, rng) -> np.ndarray:
    """Arrivals for every flow and slot, shape ``(len(flows), T)``.

    Drawn up front so every scheme run on the same instance sees the same
    packets.
    """
    out = np.zeros((len(flows), T), dtype=np.int64)
    for k, f in enumerate(flows):
        horizon = min(T, f.cutoff) if f.pattern == BURSTY else T
        out[k, :horizon] = rng.poisson(f.rate, size=horizon)
    return out


def save_flows(path, flows) -> None:
    Path(path).write_text(json.dumps([asdict(f) for f in flows], indent=1))


def load_flows(path) -> list[FlowSpec]:
    return [FlowSpec(**d) for d in json.loads(Path(path).read_text())]
