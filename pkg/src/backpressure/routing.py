"""One backpressure slot: commodity choice, link weights, utilities, quotas
and FIFO transfers.

Backlogs are held as an ``(n_nodes, n_commodities)`` array ``U`` whose column
order is the sorted commodity list; links are the network's sorted ``(i, j)``
pairs with ``i < j``, so "forward" means ``i -> j``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def select_commodity(U_i, U_j, eligible=None):
    """Commodity with the largest backlog difference ``U_i - U_j``.

    ``U_i`` and ``U_j`` map commodity id to backlog. Ties go to the smallest
    commodity id. ``eligible`` optionally restricts the candidates. Returns
    ``(commodity, difference)``; the difference may be negative.
    """
    keys = sorted(set(U_i) | set(U_j))
    if eligible is not None:
        keys = [c for c in keys if c in eligible]
    if not keys:
        raise ValueError("no commodities to choose from")
    best, best_diff = None, None
    for c in keys:
        diff = U_i.get(c, 0.0) - U_j.get(c, 0.0)
        if best_diff is None or diff > best_diff:
            best, best_diff = c, diff
    return best, best_diff


def link_weight(backpressure):
    return np.maximum(backpressure, 0.0) if isinstance(backpressure, np.ndarray) else max(backpressure, 0.0)


@dataclass
class SlotDecision:
    """Per-link routing/scheduling state for one slot (arrays indexed by link)."""

    c_fwd: np.ndarray
    w_fwd: np.ndarray
    c_bwd: np.ndarray
    w_bwd: np.ndarray
    weight: np.ndarray = None
    forward: np.ndarray = None
    utility: np.ndarray = None
    scheduled: np.ndarray = None
    quota: np.ndarray = None

    def commodity(self) -> np.ndarray:
        return np.where(self.forward, self.c_fwd, self.c_bwd)

    def transmitter(self, src, dst) -> np.ndarray:
        return np.where(self.forward, src, dst)

    def receiver(self, src, dst) -> np.ndarray:
        return np.where(self.forward, dst, src)


def _directed(D: np.ndarray, mask) -> tuple[np.ndarray, np.ndarray]:
    if mask is not None:
        D = np.where(mask, D, -np.inf)
    c = np.argmax(D, axis=1)
    best = D[np.arange(len(D)), c]
    w = np.where(np.isfinite(best), np.maximum(best, 0.0), 0.0)
    return c, w


def select_all(U: np.ndarray, src, dst, holding=None) -> SlotDecision:
    """Optimal commodity and weight on both directions of every link.

    ``holding`` is an optional boolean ``(n_nodes, n_commodities)`` array; a
    commodity is a candidate on ``i -> j`` only where ``holding[i]`` is set.
    Without it every commodity competes, as in the textbook argmax.
    """
    L, K = len(src), U.shape[1]
    if L == 0 or K == 0:
        z = np.zeros(L, dtype=int)
        return SlotDecision(z, np.zeros(L), z.copy(), np.zeros(L))
    D = U[src] - U[dst]
    c_fwd, w_fwd = _directed(D, None if holding is None else holding[src])
    c_bwd, w_bwd = _directed(-D, None if holding is None else holding[dst])
    return SlotDecision(c_fwd, w_fwd, c_bwd, w_bwd)


def assemble_utilities(dec: SlotDecision, rates) -> np.ndarray:
    """Fill in the undirected weight, the chosen direction and the utility.

    Direction goes to the larger directed weight; on a tie the lower node id
    (the forward end) transmits.
    """
    dec.forward = dec.w_fwd >= dec.w_bwd
    dec.weight = np.maximum(dec.w_fwd, dec.w_bwd)
    dec.utility = np.asarray(rates, dtype=float) * dec.weight
    return dec.utility


def allocate(dec: SlotDecision, schedule, rates) -> np.ndarray:
    """All of a scheduled link's rate goes to its chosen commodity, if its weight is positive."""
    L = len(dec.weight)
    s = np.zeros(L, dtype=bool)
    s[list(schedule)] = True
    dec.scheduled = s
    dec.quota = np.where(s & (dec.weight > 0), np.asarray(rates), 0).astype(np.int64)
    return dec.quota


@dataclass
class TransferResult:
    n_tx: np.ndarray
    n_rx: np.ndarray
    delivered: list[int]
    moves: list[tuple[int, int, int, int]]  # (tx, rx, commodity column, count)


def execute_transfers(queues, qlen, dec: SlotDecision, src, dst, commodities, t: int) -> TransferResult:
    """Move packets FIFO on every link with a positive quota.

    ``queues[i][col]`` is the ``CommodityQueue`` of commodity column ``col``
    at node ``i``; ``qlen`` holds the start-of-slot lengths and is not
    modified. Packets reaching their destination are returned as delivered
    instead of being enqueued.
    """
    n_tx = np.zeros_like(qlen)
    n_rx = np.zeros_like(qlen)
    delivered: list[int] = []
    moves = []
    active = np.flatnonzero(dec.quota > 0)
    if active.size == 0:
        return TransferResult(n_tx, n_rx, delivered, moves)
    tx = dec.transmitter(src, dst)[active]
    rx = dec.receiver(src, dst)[active]
    col = dec.commodity()[active]
    quota = dec.quota[active]
    for i, j, c, mu in zip(tx.tolist(), rx.tolist(), col.tolist(), quota.tolist()):
        n = min(mu, int(qlen[i, c]))
        if n == 0:
            continue
        pkts = queues[i][c].dequeue(n)
        n_tx[i, c] += n
        if j == commodities[c]:
            delivered.extend(pkts)
        else:
            queues[j][c].enqueue(pkts, t)
            n_rx[j, c] += n
        moves.append((i, j, c, n))
    return TransferResult(n_tx, n_rx, delivered, moves)
