"""Shortest-path biases: per-hop distances, Bellman-Ford tables, scaling and
neighbourhood maintenance under topology change."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .netgraph import ConflictGraph, Network

UNREACHABLE = 1e12


class BiasError(ValueError):
    pass


@dataclass(frozen=True)
class DistanceScheme:
    """How per-hop distances are assigned.

    ``kind`` is ``"none"``, ``"edr"`` (uniform ``scale``) or ``"sp_over_xr"``
    (``scale / (x_e r_e)``). ``scale=None`` means the mean link rate.
    ``min_multiplier``, when set, rescales the result so that its smallest
    entry equals ``min_multiplier`` times the mean link rate.
    """

    kind: str = "none"
    scale: float | None = None
    min_multiplier: float | None = None

    def __post_init__(self):
        if self.kind not in ("none", "edr", "sp_over_xr"):
            raise BiasError(f"unknown distance scheme {self.kind!r}")
        if self.min_multiplier is not None and self.min_multiplier <= 0:
            raise BiasError("min_multiplier must be positive")

    @property
    def biased(self) -> bool:
        return self.kind != "none"


def per_hop_distances(net: Network, kind: str, mean_rate: float, scale=None, duty_cycle=None) -> np.ndarray:
    if mean_rate <= 0:
        raise BiasError("mean link rate must be positive")
    scale = mean_rate if scale is None else scale
    if kind == "edr":
        return np.full(net.n_links, float(scale))
    if kind == "sp_over_xr":
        if duty_cycle is None:
            raise BiasError("sp_over_xr needs per-link duty cycles")
        x = np.asarray(duty_cycle, dtype=float)
        if x.shape != (net.n_links,):
            raise BiasError("one duty cycle per link required")
        return scale / (x * net.rates)
    if kind == "none":
        return np.zeros(net.n_links)
    raise BiasError(f"unknown distance scheme {kind!r}")


def scale_min(delta, a: float, mean_rate: float) -> np.ndarray:
    """Rescale so the smallest per-hop distance is exactly ``a * mean_rate``."""
    d = np.asarray(delta, dtype=float)
    if d.size == 0:
        raise BiasError("no links to scale")
    if a <= 0 or np.any(d <= 0):
        raise BiasError("multiplier and distances must be positive")
    target = a * mean_rate
    out = d * (target / d.min())
    out[d == d.min()] = target
    return out


def distances_for(net: Network, scheme: DistanceScheme, mean_rate: float, duty_cycle=None) -> np.ndarray:
    d = per_hop_distances(net, scheme.kind, mean_rate, scheme.scale, duty_cycle)
    if scheme.min_multiplier is not None and scheme.biased:
        d = scale_min(d, scheme.min_multiplier, mean_rate)
    return d


def compute_biases_sssp(net: Network, delta, commodities) -> np.ndarray:
    """Bellman-Ford distances to each commodity, one column per commodity.

    Synchronous relaxation over all links until nothing changes; raises if a
    node cannot reach some commodity.
    """
    commodities = list(commodities)
    n = net.n_nodes
    d = np.asarray(delta, dtype=float)
    table = np.full((n, len(commodities)), UNREACHABLE)
    for col, c in enumerate(commodities):
        table[c, col] = 0.0
    if not commodities:
        return table
    src, dst = net.endpoints()
    for _ in range(n):
        prev = table.copy()
        # relax both directions of every link
        np.minimum.at(table, src, prev[dst] + d[:, None])
        np.minimum.at(table, dst, prev[src] + d[:, None])
        if np.array_equal(prev, table):
            break
    if np.any(table >= UNREACHABLE):
        raise BiasError("network is disconnected")
    return table


def neighbor_update_round(table, net: Network, delta, commodities, active=None) -> np.ndarray:
    """One synchronous round of the 1-hop min-plus rule.

    Every node in ``active`` (all nodes by default) replaces its bias by the
    minimum over current neighbours of neighbour bias plus per-hop distance;
    destinations stay at 0. Reads only the previous table. A node with no
    finite neighbour value gets ``UNREACHABLE``.
    """
    old = np.asarray(table, dtype=float)
    n = net.n_nodes
    d = np.asarray(delta, dtype=float)
    best = np.full_like(old, np.inf)
    if net.n_links:
        src, dst = net.endpoints()
        np.minimum.at(best, src, old[dst] + d[:, None])
        np.minimum.at(best, dst, old[src] + d[:, None])
    best = np.minimum(best, UNREACHABLE)
    if active is None:
        new = best
    else:
        new = old.copy()
        idx = np.fromiter(active, dtype=int)
        new[idx] = best[idx]
    for col, c in enumerate(commodities):
        new[c, col] = 0.0
    assert new.shape == (n, len(commodities))
    return new


def converge_neighbor_updates(table, net: Network, delta, commodities, max_rounds=None):
    """Iterate full rounds to a fixpoint; returns (table, rounds that changed something)."""
    limit = net.n_nodes if max_rounds is None else max_rounds
    cur = np.asarray(table, dtype=float)
    for r in range(limit + 1):
        nxt = neighbor_update_round(cur, net, delta, commodities)
        if np.array_equal(nxt, cur):
            return cur, r
        cur = nxt
    return cur, limit + 1


def initial_table(n: int, commodities) -> np.ndarray:
    commodities = list(commodities)
    table = np.full((n, len(commodities)), UNREACHABLE)
    for col, c in enumerate(commodities):
        table[c, col] = 0.0
    return table


def estimate_duty_cycle(conflict: ConflictGraph) -> np.ndarray:
    """Airtime-share heuristic ``1 / (1 + conflict degree)``."""
    return 1.0 / (1.0 + conflict.degree().astype(float))


def load_duty_cycle(path, net: Network) -> np.ndarray:
    """Read ``u v x`` records (one link per line, ``#`` comments allowed)."""
    vals = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise BiasError(f"{path}:{lineno}: expected 'u v x'")
        i, j, x = int(parts[0]), int(parts[1]), float(parts[2])
        if not 0 < x <= 1:
            raise BiasError(f"{path}:{lineno}: duty cycle {x} outside (0, 1]")
        vals[(min(i, j), max(i, j))] = x
    missing = [e for e in net.links if e not in vals]
    if missing:
        raise BiasError(f"duty cycle missing for links {missing[:5]}")
    return np.array([vals[e] for e in net.links])


def save_duty_cycle(path, net: Network, x) -> None:
    lines = ["# u v duty_cycle"]
    lines += [f"{i} {j} {float(v)!r}" for (i, j), v in zip(net.links, x)]
    Path(path).write_text("\n".join(lines) + "\n")
