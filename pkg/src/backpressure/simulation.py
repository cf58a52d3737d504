"""Slot-by-slot simulation of one test instance under one routing scheme."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import bias as biasmod
from .backlog import EXPQ, HOL, QUEUE_LENGTH, SJB, BacklogMetric, CommodityQueue, expq_step
from .bias import DistanceScheme
from .netgraph import (
    ConflictGraph,
    MobilityReport,
    Network,
    apply_mobility_step,
    build_conflict_graph,
    realize_rates,
)
from .routing import allocate, assemble_utilities, execute_transfers, select_all
from .scheduler import exact_mwis, greedy_schedule
from .traffic import FlowSpec


class ContractViolation(AssertionError):
    pass


@dataclass(frozen=True)
class SchemeSpec:
    """A routing scheme: backlog metric, bias, bias maintenance and scheduler.

    ``holding_only`` restricts the commodity choice on ``i -> j`` to
    commodities that node ``i`` currently holds packets of.
    """

    name: str
    backlog: BacklogMetric = BacklogMetric()
    distance: DistanceScheme = DistanceScheme()
    maintenance: str = "ideal"
    scheduler: str = "greedy"
    holding_only: bool = True

    def __post_init__(self):
        if self.maintenance not in ("ideal", "neighbor"):
            raise ValueError(f"unknown bias maintenance {self.maintenance!r}")
        if self.scheduler not in ("greedy", "exact"):
            raise ValueError(f"unknown scheduler {self.scheduler!r}")

    def with_(self, **kw) -> "SchemeSpec":
        from dataclasses import replace

        return replace(self, **kw)


def _schemes(eps: float = 0.01) -> dict[str, SchemeSpec]:
    ql = BacklogMetric(QUEUE_LENGTH)
    sjb = BacklogMetric(SJB)
    hol = BacklogMetric(HOL)
    expq = BacklogMetric(EXPQ, eps)
    edr = DistanceScheme("edr")
    sp = DistanceScheme("sp_over_xr")
    sp_min = DistanceScheme("sp_over_xr", min_multiplier=1.0)
    specs = [
        SchemeSpec("BP", ql),
        SchemeSpec("BP-SJB", sjb),
        SchemeSpec("BP-HOL", hol),
        SchemeSpec("EDR-rbar", ql, edr),
        SchemeSpec("SP-rbar/(xr)", ql, sp),
        SchemeSpec("SP-rbar/(xr)-min", ql, sp_min),
        SchemeSpec("EDR-rbar-SJB", sjb, edr),
        SchemeSpec("EDR-rbar-HOL", hol, edr),
        SchemeSpec("EDR-rbar-expQ", expq, edr),
        SchemeSpec("SP-rbar/(xr)-expQ", expq, sp),
    ]
    return {s.name: s for s in specs}


KNOWN_SCHEMES = _schemes()


def scheme(name: str, **overrides) -> SchemeSpec:
    try:
        base = KNOWN_SCHEMES[name]
    except KeyError:
        raise ValueError(f"unknown scheme {name!r}; known: {sorted(KNOWN_SCHEMES)}") from None
    return base.with_(**overrides) if overrides else base


def edr_scheme(a: float, backlog: BacklogMetric = BacklogMetric()) -> SchemeSpec:
    """Uniform per-hop distance ``a`` times the mean link rate."""
    return SchemeSpec(f"EDR-{a:g}rbar", backlog, DistanceScheme("edr", min_multiplier=a))


@dataclass
class MobilityConfig:
    period: int = 100
    k_moving: int = 10
    step_std: float = 0.1


@dataclass
class Instance:
    """Everything random about a test instance, fixed before any scheme runs."""

    net: Network
    flows: list[FlowSpec]
    arrivals: np.ndarray  # (n_flows, T)
    T: int
    rate_mode: str = "deterministic"
    rate_seed: int = 0
    topologies: list[tuple[int, Network, MobilityReport]] = field(default_factory=list)

    @property
    def commodities(self) -> list[int]:
        return sorted({f.destination for f in self.flows})


def mobility_trajectory(net: Network, T: int, cfg: MobilityConfig, rng):
    """Topology snapshots taking effect at slots ``period, 2*period, ... < T``."""
    out = []
    cur = net
    if cfg.period <= 0:
        return out
    for t in range(cfg.period, T, cfg.period):
        cur, rep = apply_mobility_step(cur, cfg.k_moving, cfg.step_std, rng)
        out.append((t, cur, rep))
    return out


@dataclass
class SimResult:
    T: int
    created_at: np.ndarray
    delivered_at: np.ndarray  # -1 if undelivered
    origin: np.ndarray
    destination: np.ndarray
    occupancy: np.ndarray
    scheme: str = ""

    @property
    def n_packets(self) -> int:
        return len(self.created_at)

    @property
    def empty(self) -> bool:
        return self.n_packets == 0

    @property
    def delivered(self) -> np.ndarray:
        return self.delivered_at >= 0

    def delays(self) -> np.ndarray:
        return np.where(self.delivered, self.delivered_at - self.created_at, self.T - self.created_at)

    @property
    def mean_delay(self) -> float:
        return float(self.delays().mean()) if self.n_packets else 0.0

    @property
    def delivery_rate(self) -> float:
        return float(self.delivered.mean()) if self.n_packets else 0.0

    def records(self) -> list[dict]:
        return [
            {
                "id": k,
                "origin": int(o),
                "destination": int(d),
                "t0": int(t0),
                "t1": int(t1) if t1 >= 0 else None,
            }
            for k, (o, d, t0, t1) in enumerate(
                zip(self.origin, self.destination, self.created_at, self.delivered_at)
            )
        ]


class Simulation:
    """Mutable state of one scheme running on one instance.

    ``step()`` advances a single slot; ``run()`` does all ``T``. Queue state is
    kept both in ``CommodityQueue`` objects (packet identities and FIFO order)
    and in dense ``(n_nodes, n_commodities)`` arrays used for the decisions.
    """

    def __init__(self, inst: Instance, spec: SchemeSpec, duty_cycle=None, check=True):
        self.inst = inst
        self.spec = spec
        self.check = check
        self.T = inst.T
        self.commodities = inst.commodities
        self.col = {c: k for k, c in enumerate(self.commodities)}
        n, K = inst.net.n_nodes, len(self.commodities)
        self.queues = [[CommodityQueue() for _ in range(K)] for _ in range(n)]
        self.qlen = np.zeros((n, K), dtype=np.int64)
        self.head = np.zeros((n, K), dtype=np.int64)
        self.stamp_sum = np.zeros((n, K), dtype=np.int64)
        self.expq = np.zeros((n, K), dtype=float)

        total = int(inst.arrivals.sum())
        self.created_at = np.full(total, -1, dtype=np.int64)
        self.delivered_at = np.full(total, -1, dtype=np.int64)
        self.origin = np.zeros(total, dtype=np.int64)
        self.destination = np.zeros(total, dtype=np.int64)
        self.n_created = 0
        self.n_delivered = 0
        self.occupancy = np.zeros(self.T, dtype=np.int64)
        self.flow_src = [f.source for f in inst.flows]
        self.flow_col = [self.col[f.destination] for f in inst.flows]

        self.rate_rng = np.random.default_rng(inst.rate_seed)
        self.mean_rate = inst.net.mean_rate()
        self._fixed_duty = duty_cycle
        self._pending = list(inst.topologies)
        self.active: set[int] = set()
        self.bias_rounds = 0
        self.last_decision = None
        self.last_moves = []
        self.t = 0
        self._set_topology(inst.net, None)

    # topology and biases

    def _set_topology(self, net: Network, report: MobilityReport | None):
        old_net = getattr(self, "net", None)
        old_delta = getattr(self, "delta", None)
        self.net = net
        self.conflict: ConflictGraph = build_conflict_graph(net)
        self.src, self.dst = net.endpoints()
        self.det_rates = realize_rates(net, 0, "deterministic")
        if self.spec.distance.biased:
            duty = self._fixed_duty if report is None and self._fixed_duty is not None else None
            if duty is None and self.spec.distance.kind == "sp_over_xr":
                duty = biasmod.estimate_duty_cycle(self.conflict)
            self.delta = biasmod.distances_for(net, self.spec.distance, self.mean_rate, duty)
        else:
            self.delta = np.zeros(net.n_links)

        if not self.spec.distance.biased:
            self.B = np.zeros((net.n_nodes, len(self.commodities)))
            return
        if report is None or self.spec.maintenance == "ideal":
            self.B = biasmod.compute_biases_sssp(net, self.delta, self.commodities)
            return
        # neighbour maintenance: wake nodes whose incident links changed
        touched = set()
        for e in report.created + report.destroyed:
            touched.update(e)
        old_d = dict(zip(old_net.links, old_delta.tolist()))
        for e, d in zip(net.links, self.delta.tolist()):
            if e in old_d and old_d[e] != d:
                touched.update(e)
        self.active |= touched

    def _maintain_biases(self):
        if not self.active:
            return
        new = biasmod.neighbor_update_round(
            self.B, self.net, self.delta, self.commodities, active=self.active
        )
        changed = np.flatnonzero(np.any(new != self.B, axis=1))
        self.B = new
        self.bias_rounds += 1
        nbrs = self.net.neighbors()
        self.active = {j for i in changed.tolist() for j in nbrs[i]}

    # metrics

    def backlog(self, t: int) -> np.ndarray:
        kind = self.spec.backlog.kind
        if kind == QUEUE_LENGTH:
            return self.qlen.astype(float)
        if kind == EXPQ:
            return self.expq.copy()
        if kind == HOL:
            return np.where(self.qlen > 0, t - self.head, 0).astype(float)
        return (t * self.qlen - self.stamp_sum).astype(float)

    def pressure_state(self, t: int) -> np.ndarray:
        return self.backlog(t) + self.B

    # slot

    def step(self):
        t = self.t
        while self._pending and self._pending[0][0] == t:
            _, net, rep = self._pending.pop(0)
            self._set_topology(net, rep)
        if self.spec.maintenance == "neighbor":
            self._maintain_biases()

        if self.inst.rate_mode == "deterministic":
            R = self.det_rates
        else:
            R = realize_rates(self.net, t, self.inst.rate_mode, self.rate_rng)

        U = self.pressure_state(t)
        holding = self.qlen > 0 if self.spec.holding_only else None
        dec = select_all(U, self.src, self.dst, holding)
        util = assemble_utilities(dec, R)
        if self.spec.scheduler == "greedy":
            sched = greedy_schedule(self.conflict, util)
        else:
            sched = _exact_on_support(self.conflict, util)
        allocate(dec, sched, R)
        if self.check:
            self._check_duplex(dec)

        res = execute_transfers(self.queues, self.qlen, dec, self.src, self.dst, self.commodities, t)
        n_tx, n_rx = res.n_tx, res.n_rx
        touched = {(i, c) for i, _, c, _ in res.moves} | {(j, c) for _, j, c, _ in res.moves}
        if res.delivered:
            self.delivered_at[res.delivered] = t
            self.n_delivered += len(res.delivered)

        for k, a in enumerate(self.inst.arrivals[:, t].tolist()):
            if a == 0:
                continue
            ids = range(self.n_created, self.n_created + a)
            src, c = self.flow_src[k], self.flow_col[k]
            self.created_at[ids.start:ids.stop] = t
            self.origin[ids.start:ids.stop] = src
            self.destination[ids.start:ids.stop] = self.commodities[c]
            self.n_created += a
            self.queues[src][c].enqueue(ids, t)
            n_rx[src, c] += a
            touched.add((src, c))

        q_before = self.qlen
        self.qlen = q_before - n_tx + n_rx
        self.expq = expq_step(self.expq, self.spec.backlog.epsilon, q_before, n_tx, n_rx)
        for i, c in touched:
            q = self.queues[i][c]
            self.stamp_sum[i, c] = q.stamp_sum
            self.head[i, c] = q.head_arrival() if q.length else 0

        if self.check:
            queued = int(self.qlen.sum())
            if self.n_created != queued + self.n_delivered:
                raise ContractViolation(
                    f"slot {t}: {self.n_created} created != {queued} queued + {self.n_delivered} delivered"
                )
        self.occupancy[t] = self.qlen.sum()
        self.last_decision = dec
        self.last_moves = res.moves
        self.t += 1

    def _check_duplex(self, dec):
        on = np.flatnonzero(dec.scheduled)
        ends = np.concatenate([self.src[on], self.dst[on]])
        if len(np.unique(ends)) != len(ends):
            raise ContractViolation(f"slot {self.t}: a node is on two scheduled links")

    def run(self, on_slot=None) -> SimResult:
        while self.t < self.T:
            self.step()
            if on_slot is not None:
                on_slot(self.t - 1, self)
        return self.result()

    def result(self) -> SimResult:
        k = self.n_created
        return SimResult(
            T=self.T,
            created_at=self.created_at[:k].copy(),
            delivered_at=self.delivered_at[:k].copy(),
            origin=self.origin[:k].copy(),
            destination=self.destination[:k].copy(),
            occupancy=self.occupancy.copy(),
            scheme=self.spec.name,
        )


def _exact_on_support(conflict: ConflictGraph, util) -> list[int]:
    # zero-utility links never enter the schedule, so solve on the positive ones
    support = np.flatnonzero(util > 0).tolist()
    if not support:
        return []
    pos = {k: i for i, k in enumerate(support)}
    adj = [[pos[x] for x in conflict.adj[k] if x in pos] for k in support]
    chosen, _ = exact_mwis(ConflictGraph(len(support), adj), util[support])
    return sorted(support[i] for i in chosen)


def run_instance(inst: Instance, spec: SchemeSpec, duty_cycle=None, on_slot=None, check=True) -> SimResult:
    return Simulation(inst, spec, duty_cycle=duty_cycle, check=check).run(on_slot)
