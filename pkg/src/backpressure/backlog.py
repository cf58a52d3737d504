"""Per-(node, commodity) FIFO queues and the queue-state part of the backlog metric."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

QUEUE_LENGTH = "queue_length"
HOL = "hol"
SJB = "sjb"
EXPQ = "expq"
KINDS = (QUEUE_LENGTH, HOL, SJB, EXPQ)


@dataclass(frozen=True)
class BacklogMetric:
    kind: str = QUEUE_LENGTH
    epsilon: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown backlog metric {self.kind!r}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")


@dataclass
class Packet:
    id: int
    commodity: int
    origin: int
    created_at: int
    node_arrival_at: int


class CommodityQueue:
    """FIFO of packets held at one node for one commodity.

    Packets are stored in runs that share a node-arrival slot, so moving a
    batch costs O(runs) rather than O(packets). ``stamp_sum`` is the sum of
    node-arrival slots over all queued packets.
    """

    __slots__ = ("_runs", "length", "stamp_sum", "expq_value")

    def __init__(self):
        self._runs: deque[list] = deque()  # [arrival_slot, [packet ids]]
        self.length = 0
        self.stamp_sum = 0
        self.expq_value = 0.0

    def __len__(self):
        return self.length

    def enqueue(self, packet_ids, t: int) -> None:
        ids = list(packet_ids)
        if not ids:
            return
        if self._runs and self._runs[-1][0] == t:
            self._runs[-1][1].extend(ids)
        else:
            self._runs.append([t, ids])
        self.length += len(ids)
        self.stamp_sum += t * len(ids)

    def dequeue(self, n: int) -> list[int]:
        """Remove and return the ``n`` oldest packet ids."""
        if n < 0 or n > self.length:
            raise ValueError(f"cannot dequeue {n} from a queue of {self.length}")
        out: list[int] = []
        while n > 0:
            stamp, ids = self._runs[0]
            if len(ids) <= n:
                self._runs.popleft()
                take = ids
            else:
                take = ids[:n]
                del ids[:n]
            out.extend(take)
            n -= len(take)
            self.length -= len(take)
            self.stamp_sum -= stamp * len(take)
        return out

    def head_arrival(self) -> int | None:
        return self._runs[0][0] if self._runs else None

    def arrivals(self) -> list[int]:
        """Node-arrival slot of every queued packet, head first."""
        return [s for s, ids in self._runs for _ in ids]

    def packet_ids(self) -> list[int]:
        return [p for _, ids in self._runs for p in ids]


def backlog_value(q: CommodityQueue, metric: BacklogMetric, t: int) -> float:
    if metric.kind == QUEUE_LENGTH:
        return float(q.length)
    if metric.kind == EXPQ:
        return q.expq_value
    if q.length == 0:
        return 0.0
    if metric.kind == HOL:
        return float(t - q.head_arrival())
    return float(t * q.length - q.stamp_sum)


def expq_step(old, epsilon: float, q_len_before, n_tx, n_rx):
    """One step of the exponential delay-aware accumulator.

    ``(1 + eps) * old * (1 - n_tx / q_len_before) + n_rx``, with the bracket
    taken as 1 for an empty queue. Works elementwise on arrays; uses only slot
    counts, never packet timestamps.
    """
    old = np.asarray(old, dtype=float)
    q = np.asarray(q_len_before)
    tx = np.asarray(n_tx)
    if np.any(tx < 0) or np.any(tx > q):
        raise ValueError("n_tx must lie in [0, q_len_before]")
    if np.any(np.asarray(n_rx) < 0):
        raise ValueError("n_rx must be nonnegative")
    # old * (q - tx) / q rather than old * (1 - tx / q): exact when old == q
    safe_q = np.where(q > 0, q, 1)
    scaled = (1.0 + epsilon) * old
    new = np.where(q > 0, scaled * (q - tx) / safe_q, scaled) + n_rx
    new = np.maximum(new, 0.0)
    return float(new) if new.ndim == 0 else new


def update_expq(q: CommodityQueue, epsilon: float, q_len_before: int, n_tx: int, n_rx: int) -> float:
    q.expq_value = expq_step(q.expq_value, epsilon, q_len_before, n_tx, n_rx)
    return q.expq_value
