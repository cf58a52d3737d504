"""MaxWeight link scheduling on the conflict graph.

Both solvers take a ``ConflictGraph`` and a nonnegative utility per link and
return the activated link ids as a sorted list. Links with zero utility are
never activated.
"""

from __future__ import annotations

import numpy as np

from .netgraph import ConflictGraph

EXACT_SIZE_CAP = 25


class ScheduleError(ValueError):
    pass


def _check(conflict: ConflictGraph, utility) -> np.ndarray:
    u = np.asarray(utility, dtype=float)
    if u.shape != (conflict.n_vertices,):
        raise ScheduleError(
            f"expected {conflict.n_vertices} utilities, got shape {u.shape}"
        )
    if np.any(u < 0):
        raise ScheduleError("utilities must be nonnegative")
    return u


def greedy_schedule(conflict: ConflictGraph, utility) -> list[int]:
    """Local greedy scheduler, run centrally.

    Links are resolved in order of decreasing utility (smaller id first on
    ties); a link is activated unless a conflicting link was already
    activated. This yields the same set as the distributed rule where a link
    fires once it holds the locally highest utility among unresolved
    neighbours.
    """
    u = _check(conflict, utility)
    cand = np.flatnonzero(u > 0)
    if cand.size == 0:
        return []
    order = cand[np.lexsort((cand, -u[cand]))]
    blocked = np.zeros(conflict.n_vertices, dtype=bool)
    adj = conflict.adj
    chosen = []
    for k in order.tolist():
        if blocked[k]:
            continue
        chosen.append(k)
        blocked[adj[k]] = True
    chosen.sort()
    return chosen


def exact_mwis(
    conflict: ConflictGraph, utility, size_cap: int = EXACT_SIZE_CAP
) -> tuple[list[int], float]:
    """Maximum weight independent set by branch and bound.

    Branches on the remaining vertex of highest degree (include / exclude),
    pruning when the current weight plus all remaining weight cannot reach the
    incumbent. Among optimal sets the lexicographically smallest sorted id
    tuple is returned, so pruning only discards strictly worse subtrees.
    """
    u = _check(conflict, utility)
    if conflict.n_vertices > size_cap:
        raise ScheduleError(
            f"conflict graph has {conflict.n_vertices} vertices, cap is {size_cap}"
        )
    verts = [int(v) for v in np.flatnonzero(u > 0)]
    if not verts:
        return [], 0.0
    w = {v: float(u[v]) for v in verts}
    nbr_mask = {}
    bit = {v: 1 << k for k, v in enumerate(verts)}
    for v in verts:
        m = 0
        for x in conflict.adj[v]:
            if x in bit:
                m |= bit[x]
        nbr_mask[v] = m

    best_w = -1.0
    best_set: tuple = ()

    def remaining(mask):
        return [v for v in verts if mask & bit[v]]

    def search(mask: int, chosen: list[int], acc: float):
        nonlocal best_w, best_set
        rest = remaining(mask)
        if not rest:
            cand = tuple(sorted(chosen))
            if acc > best_w or (acc == best_w and cand < best_set):
                best_w, best_set = acc, cand
            return
        if acc + sum(w[v] for v in rest) < best_w:
            return
        pivot = max(rest, key=lambda v: (bin(nbr_mask[v] & mask).count("1"), -v))
        if nbr_mask[pivot] & mask == 0:
            # isolated in the remaining graph: always worth taking
            search(mask & ~bit[pivot], chosen + [pivot], acc + w[pivot])
            return
        search(mask & ~bit[pivot] & ~nbr_mask[pivot], chosen + [pivot], acc + w[pivot])
        search(mask & ~bit[pivot], chosen, acc)

    search((1 << len(verts)) - 1, [], 0.0)
    return list(best_set), best_w


def schedule_utility(utility, chosen) -> float:
    u = np.asarray(utility, dtype=float)
    return float(u[list(chosen)].sum()) if len(chosen) else 0.0


def is_maximal(conflict: ConflictGraph, utility, chosen) -> bool:
    """True if no positive-utility link can join ``chosen`` without conflict."""
    u = np.asarray(utility, dtype=float)
    s = set(chosen)
    for k in np.flatnonzero(u > 0).tolist():
        if k in s:
            continue
        if not s.intersection(conflict.adj[k]):
            return False
    return True


SOLVERS = {"greedy": greedy_schedule, "exact": lambda c, u: exact_mwis(c, u)[0]}
