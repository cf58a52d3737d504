"""Four-node last-packets scenario.

Nodes A, B, C, D (ids 0-3) with D the destination; A is two hops away, B and
C one hop. Links A-B, A-C, B-C, B-D, C-D all carry the same rate, and ``q``
packets for D sit at A with nothing else in the network. With a per-hop
distance at least the link rate the packets walk straight down to D; without
bias the backpressure flips and they bounce back.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .backlog import BacklogMetric
from .bias import DistanceScheme
from .netgraph import Network
from .simulation import Instance, SchemeSpec, Simulation
from .traffic import BURSTY, FlowSpec

A, B, C, D = 0, 1, 2, 3
HOPS = {A: 2, B: 1, C: 1, D: 0}
POSITIONS = np.array([[0.0, 0.0], [0.8, 0.5], [0.8, -0.45], [1.6, 0.0]])


def diamond_network(rate: float) -> Network:
    links = [(A, B), (A, C), (B, C), (B, D), (C, D)]
    net = Network(POSITIONS.copy(), links, np.full(len(links), float(rate)), 1.0, 1.0)
    assert net.links == sorted(net.links)
    return net


def diamond_instance(q: int, rate: int, slots: int = 12) -> Instance:
    # the q packets are injected at the end of slot 0, so slot 1 is "time t"
    flow = FlowSpec(A, D, float(q), BURSTY, cutoff=1)
    arr = np.zeros((1, slots), dtype=np.int64)
    arr[0, 0] = q
    return Instance(net=diamond_network(rate), flows=[flow], arrivals=arr, T=slots)


@dataclass
class ScenarioRun:
    delta: float
    moves: list[tuple[int, int, int, int]] = field(default_factory=list)  # (slot, tx, rx, n)
    delivered: int = 0
    post_transfer_pressure: float | None = None

    @property
    def backward(self) -> list[tuple[int, int, int, int]]:
        return [m for m in self.moves if HOPS[m[2]] > HOPS[m[1]]]

    @property
    def forward(self) -> list[tuple[int, int, int, int]]:
        return [m for m in self.moves if HOPS[m[2]] < HOPS[m[1]]]

    def monotone(self) -> bool:
        return all(HOPS[rx] == HOPS[tx] - 1 for _, tx, rx, _ in self.moves)


def run_scenario(q: int, rate: int, delta: float, slots: int = 12, scheduler: str = "greedy") -> ScenarioRun:
    if not 0 < q <= rate:
        raise ValueError("need 0 < q <= rate")
    dist = DistanceScheme("edr", scale=delta) if delta > 0 else DistanceScheme("none")
    spec = SchemeSpec(f"delta={delta:g}", BacklogMetric(), dist, scheduler=scheduler)
    sim = Simulation(diamond_instance(q, rate, slots), spec)
    out = ScenarioRun(delta=delta)
    first = {}

    def on_slot(t, s):
        for tx, rx, _, n in s.last_moves:
            out.moves.append((t, tx, rx, n))
        if s.last_moves and not first:
            tx, rx, _, _ = s.last_moves[0]
            first.update(tx=tx, rx=rx)
            # backpressure on the link just used, from next slot's state
            U = s.pressure_state(t + 1)[:, 0]
            out.post_transfer_pressure = float(U[tx] - U[rx])

    res = sim.run(on_slot)
    out.delivered = int(res.delivered.sum())
    return out


@dataclass
class Lemma1Report:
    q: int
    rate: int
    biased: ScenarioRun
    unbiased: ScenarioRun

    def checks(self) -> list[tuple[str, bool]]:
        b, u = self.biased, self.unbiased
        first_fwd = u.forward[0][0] if u.forward else None
        bounce = first_fwd is not None and any(
            first_fwd < m[0] <= first_fwd + 2 for m in u.backward
        )
        return [
            ("biased: no backward transfers", not b.backward),
            ("biased: every transfer moves one hop closer", b.monotone()),
            ("biased: all packets delivered", b.delivered == self.q),
            (
                "biased: post-transfer backpressure equals delta - q >= 0",
                b.post_transfer_pressure is not None
                and abs(b.post_transfer_pressure - (b.delta - self.q)) < 1e-9
                and b.post_transfer_pressure >= 0,
            ),
            ("unbiased: backward transfer within 2 slots of first forward move", bounce),
        ]

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.checks())


def lemma1_check(q: int = 26, rate: int = 26, slots: int = 12, scheduler: str = "greedy") -> Lemma1Report:
    return Lemma1Report(
        q=q,
        rate=rate,
        biased=run_scenario(q, rate, float(rate), slots, scheduler),
        unbiased=run_scenario(q, rate, 0.0, slots, scheduler),
    )
