"""Backpressure routing for wireless multi-hop networks: simulator and algorithms."""

from .backlog import BacklogMetric, CommodityQueue, backlog_value, update_expq
from .bias import (
    DistanceScheme,
    compute_biases_sssp,
    estimate_duty_cycle,
    neighbor_update_round,
    per_hop_distances,
    scale_min,
)
from .netgraph import (
    ConflictGraph,
    Network,
    apply_mobility_step,
    build_conflict_graph,
    generate_network,
    realize_rates,
)
from .scheduler import exact_mwis, greedy_schedule
from .simulation import KNOWN_SCHEMES, Instance, SchemeSpec, SimResult, run_instance, scheme
from .traffic import FlowSpec, TrafficConfig, arrivals, generate_flows

__version__ = "0.1.0"
