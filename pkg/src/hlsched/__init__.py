"""Scheduling, allocation and hardware/software partitioning for data-flow graphs."""

from .allocation import allocation_report, bind_fus, clique_partition, left_edge, lifetimes
from .dfg import Dfg, LatencyModel, OpKind, critical_path_length, evaluate, load_fixture, parse_dfg
from .errors import HlsError
from .partition import CostModel, Side, partition_by_clique, partition_by_cycles, partition_metrics
from .saa import find_chains, rebalance_chain
from .schedule import ResourceConstraints, Schedule, alap, asap, fds, fdls, list_schedule, mbs

__version__ = "0.1.0"

__all__ = [
    "CostModel",
    "Dfg",
    "HlsError",
    "LatencyModel",
    "OpKind",
    "ResourceConstraints",
    "Schedule",
    "Side",
    "alap",
    "allocation_report",
    "asap",
    "bind_fus",
    "clique_partition",
    "critical_path_length",
    "evaluate",
    "fds",
    "fdls",
    "find_chains",
    "left_edge",
    "lifetimes",
    "list_schedule",
    "load_fixture",
    "mbs",
    "parse_dfg",
    "partition_by_clique",
    "partition_by_cycles",
    "partition_metrics",
    "rebalance_chain",
]
