import itertools

import numpy as np
import pytest

from backpressure.netgraph import ConflictGraph, Network


def line_network(n, spacing=1.0, rate=26.0, radius=1.0):
    pos = np.array([[k * spacing, 0.0] for k in range(n)])
    links = [(k, k + 1) for k in range(n - 1)]
    return Network(pos, links, np.full(n - 1, rate), radius, radius)


def random_conflict_graph(rng, n_max=12):
    n = int(rng.integers(1, n_max + 1))
    p = rng.uniform(0.1, 0.7)
    edges = [(a, b) for a, b in itertools.combinations(range(n), 2) if rng.random() < p]
    return ConflictGraph.from_edges(n, edges)


def brute_force_mwis(conflict, weights):
    """Every subset of positive-weight vertices; best weight, then lexicographically smallest."""
    w = np.asarray(weights, dtype=float)
    verts = [v for v in range(conflict.n_vertices) if w[v] > 0]
    best = (0.0, ())
    for r in range(1, len(verts) + 1):
        for sub in itertools.combinations(verts, r):
            s = set(sub)
            if any(s.intersection(conflict.adj[v]) for v in sub):
                continue
            tot = float(w[list(sub)].sum())
            if tot > best[0] or (tot == best[0] and sub < best[1]):
                best = (tot, sub)
    return list(best[1]), best[0]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
