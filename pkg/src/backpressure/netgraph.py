"""Connectivity graph, unit-disk conflict graph, link rates and node mobility."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import pdist, squareform

RATE_LOW = 10.0
RATE_HIGH = 42.0
MAX_RETRIES = 100


class NetworkError(RuntimeError):
    pass


@dataclass
class Network:
    """Undirected wireless network.

    ``links`` is sorted and every pair is stored as ``(i, j)`` with ``i < j``;
    ``rates[k]`` is the long-term rate of ``links[k]`` in packets per slot.
    """

    positions: np.ndarray
    links: list[tuple[int, int]]
    rates: np.ndarray
    connect_radius: float = 1.0
    interference_radius: float = 1.0
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    @property
    def n_nodes(self) -> int:
        return len(self.positions)

    @property
    def n_links(self) -> int:
        return len(self.links)

    @property
    def link_index(self) -> dict[tuple[int, int], int]:
        if self._index is None:
            self._index = {e: k for k, e in enumerate(self.links)}
        return self._index

    def link_id(self, i: int, j: int) -> int:
        return self.link_index[(i, j) if i < j else (j, i)]

    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.links:
            return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
        arr = np.asarray(self.links, dtype=int)
        return arr[:, 0], arr[:, 1]

    def neighbors(self) -> list[list[int]]:
        nbrs: list[list[int]] = [[] for _ in range(self.n_nodes)]
        for i, j in self.links:
            nbrs[i].append(j)
            nbrs[j].append(i)
        return nbrs

    def mean_rate(self) -> float:
        return float(np.mean(self.rates))

    def is_connected(self) -> bool:
        return _connected(self.n_nodes, self.links)

    def hop_diameter(self) -> int:
        nbrs = self.neighbors()
        best = 0
        for s in range(self.n_nodes):
            dist = _bfs(nbrs, s)
            best = max(best, max(dist))
        return best

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return (
            np.array_equal(self.positions, other.positions)
            and self.links == other.links
            and np.array_equal(self.rates, other.rates)
            and self.connect_radius == other.connect_radius
            and self.interference_radius == other.interference_radius
        )

    def to_dict(self) -> dict:
        return {
            "connect_radius": self.connect_radius,
            "interference_radius": self.interference_radius,
            "nodes": [
                {"id": i, "x": float(x), "y": float(y)}
                for i, (x, y) in enumerate(self.positions)
            ],
            "links": [
                {"u": i, "v": j, "rate": float(r)}
                for (i, j), r in zip(self.links, self.rates)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Network":
        nodes = sorted(data["nodes"], key=lambda d: d["id"])
        if [d["id"] for d in nodes] != list(range(len(nodes))):
            raise NetworkError("node ids must be 0..n-1")
        positions = np.array([[d["x"], d["y"]] for d in nodes], dtype=float)
        pairs = {}
        for d in data["links"]:
            i, j = int(d["u"]), int(d["v"])
            if i == j:
                raise NetworkError(f"self-loop on node {i}")
            pairs[(min(i, j), max(i, j))] = float(d["rate"])
        links = sorted(pairs)
        return cls(
            positions=positions.reshape(-1, 2),
            links=links,
            rates=np.array([pairs[e] for e in links], dtype=float),
            connect_radius=float(data["connect_radius"]),
            interference_radius=float(data.get("interference_radius", data["connect_radius"])),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path) -> "Network":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class ConflictGraph:
    """Links as vertices; ``adj[k]`` lists the links that interfere with link ``k``."""

    n_vertices: int
    adj: list[list[int]]

    @property
    def conflicts(self) -> set[tuple[int, int]]:
        return {(a, b) for a in range(self.n_vertices) for b in self.adj[a] if a < b}

    def degree(self) -> np.ndarray:
        return np.array([len(a) for a in self.adj], dtype=int)

    def is_independent(self, chosen) -> bool:
        chosen = set(int(c) for c in chosen)
        return all(not (chosen & set(self.adj[c])) for c in chosen)

    @classmethod
    def from_edges(cls, n: int, edges) -> "ConflictGraph":
        adj: list[set] = [set() for _ in range(n)]
        for a, b in edges:
            if a == b:
                continue
            adj[a].add(b)
            adj[b].add(a)
        return cls(n, [sorted(s) for s in adj])


def _bfs(nbrs, source):
    dist = [-1] * len(nbrs)
    dist[source] = 0
    frontier = [source]
    while frontier:
        nxt = []
        for u in frontier:
            for v in nbrs[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    return dist


def _connected(n, links) -> bool:
    if n <= 1:
        return True
    if not links:
        return False
    arr = np.asarray(links)
    g = coo_matrix((np.ones(len(arr)), (arr[:, 0], arr[:, 1])), shape=(n, n))
    return connected_components(g, directed=False)[0] == 1


def _links_from_positions(positions: np.ndarray, radius: float) -> list[tuple[int, int]]:
    n = len(positions)
    if n < 2:
        return []
    d = squareform(pdist(positions))
    i, j = np.nonzero(np.triu(d <= radius, k=1))
    return list(zip(i.tolist(), j.tolist()))


def square_side(n: int, connect_radius: float, target_degree: float) -> float:
    return math.sqrt(n * math.pi * connect_radius**2 / target_degree)


def generate_network(
    n: int,
    seed,
    target_degree: float = 6.0,
    connect_radius: float = 1.0,
    interference_radius: float | None = None,
    max_retries: int = MAX_RETRIES,
) -> Network:
    """Uniform random points in a square, linked when within ``connect_radius``.

    Resamples positions until the graph is connected. Rates are drawn
    from U(10, 42) once a connected layout is found.
    """
    if n < 2:
        raise ValueError("need at least two nodes")
    rng = np.random.default_rng(seed)
    side = square_side(n, connect_radius, target_degree)
    for _ in range(max_retries):
        pos = rng.uniform(0.0, side, size=(n, 2))
        links = _links_from_positions(pos, connect_radius)
        if _connected(n, links):
            rates = rng.uniform(RATE_LOW, RATE_HIGH, size=len(links))
            return Network(
                positions=pos,
                links=links,
                rates=rates,
                connect_radius=connect_radius,
                interference_radius=interference_radius
                if interference_radius is not None
                else connect_radius,
            )
    raise NetworkError(f"no connected {n}-node network after {max_retries} draws")


def redraw_rates(net: Network, rng) -> Network:
    return replace(net, rates=rng.uniform(RATE_LOW, RATE_HIGH, size=net.n_links))


def build_conflict_graph(net: Network) -> ConflictGraph:
    """Two links conflict if they share a node or any pair of their endpoints
    lies within ``interference_radius``."""
    L = net.n_links
    if L < 2:
        return ConflictGraph(L, [[] for _ in range(L)])
    d = squareform(pdist(net.positions))
    close = d <= net.interference_radius
    np.fill_diagonal(close, True)
    src, dst = net.endpoints()
    # link-to-node closeness: near[k, v] if either endpoint of k is close to v
    near = close[src] | close[dst]
    conf = near[:, src] | near[:, dst]
    np.fill_diagonal(conf, False)
    adj = [np.flatnonzero(row).tolist() for row in conf]
    return ConflictGraph(L, adj)


@dataclass
class MobilityReport:
    created: list[tuple[int, int]]
    destroyed: list[tuple[int, int]]
    moved: list[int]

    @property
    def changed(self) -> bool:
        return bool(self.created or self.destroyed)


def apply_mobility_step(
    net: Network,
    k_moving: int,
    step_std: float,
    rng,
    max_retries: int = MAX_RETRIES,
) -> tuple[Network, MobilityReport]:
    """Move ``k_moving`` random nodes by a Gaussian step per coordinate.

    Nodes are moved one at a time; a step that disconnects the graph is
    redrawn, and after ``max_retries`` failures the node stays put.
    """
    n = net.n_nodes
    k = min(k_moving, n)
    movers = rng.choice(n, size=k, replace=False).tolist() if k > 0 else []
    pos = net.positions.copy()
    links = list(net.links)
    moved = []
    for v in movers:
        for _ in range(max_retries):
            trial = pos.copy()
            trial[v] = pos[v] + rng.normal(0.0, step_std, size=2)
            trial_links = _links_from_positions(trial, net.connect_radius)
            if _connected(n, trial_links):
                pos, links = trial, trial_links
                moved.append(v)
                break
    old = set(net.links)
    new = set(links)
    created = sorted(new - old)
    destroyed = sorted(old - new)
    old_rate = dict(zip(net.links, net.rates.tolist()))
    fresh = dict(zip(created, rng.uniform(RATE_LOW, RATE_HIGH, size=len(created)).tolist()))
    rates = np.array([old_rate[e] if e in old_rate else fresh[e] for e in links], dtype=float)
    out = Network(
        positions=pos,
        links=links,
        rates=rates,
        connect_radius=net.connect_radius,
        interference_radius=net.interference_radius,
    )
    return out, MobilityReport(created=created, destroyed=destroyed, moved=moved)


def realize_rates(net: Network, t: int, mode: str = "deterministic", rng=None) -> np.ndarray:
    """Per-slot integer link rates.

    ``deterministic`` rounds the long-term rate (half to even); ``jittered``
    draws uniformly from ``[ceil(0.7 r), floor(1.3 r)]``.
    """
    if mode == "deterministic":
        return np.rint(net.rates).astype(np.int64)
    if mode == "jittered":
        lo = np.ceil(0.7 * net.rates).astype(np.int64)
        hi = np.maximum(np.floor(1.3 * net.rates).astype(np.int64), lo)
        return rng.integers(lo, hi + 1)
    raise ValueError(f"unknown rate mode {mode!r}")
