"""Completion-cost model: pure functions over tasks and outcomes.

A task's completion cost splits into communication (transfer of input and
output over the chosen path), execution (complexity over the executing
server's capacity rate), and reuse (table lookup plus any residual
computation).  Hop latency is an additive term on the communication cost so
that hop counts have an observable effect; setting ``per_hop_latency`` to 0
recovers the pure transfer-time model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import CostParams, Outcome, Task


def communication_cost(task: Task, at_edge: bool, params: CostParams) -> float:
    """Transfer time of input+output on the edge or cloud path, plus hop latency."""
    if at_edge:
        transfer = (task.input_size + task.output_size) / params.edge_bandwidth
        return transfer + params.edge_hops * params.per_hop_latency
    transfer = (task.input_size + task.output_size) / params.cloud_bandwidth
    return transfer + params.cloud_hops * params.per_hop_latency


def execution_cost(task: Task, at_edge: bool, params: CostParams) -> float:
    """From-scratch execution time at the edge or the cloud."""
    rate = params.edge_capacity_rate if at_edge else params.cloud_capacity_rate
    return task.complexity / rate


def reuse_cost(
    task: Task, full: bool, remaining_fraction: float, params: CostParams
) -> float:
    """Lookup cost, plus the residual edge execution for a partial hit.

    ``remaining_fraction`` is the share of the task's complexity still to be
    computed after the partial match; the residual always runs at the edge.
    """
    if not 0.0 <= remaining_fraction <= 1.0:
        raise ValueError("remaining_fraction must lie in [0, 1]")
    if full:
        if remaining_fraction != 0.0:
            raise ValueError("a full reuse leaves no remaining fraction")
        return params.lookup_cost
    residual = remaining_fraction * task.complexity / params.edge_capacity_rate
    return params.lookup_cost + residual


@dataclass(frozen=True)
class CostBreakdown:
    """Component costs of one task under one outcome, all in seconds.

    ``total`` is communication + (1-reused)*execution + reused*reuse, where
    the flags mirror the outcome; ``execution`` is always the would-be
    from-scratch cost at the chosen location, even when reuse avoided it.
    """

    communication: float
    execution: float
    reuse: float
    total: float
    at_edge: bool
    full_reuse: bool
    reused: bool


def completion_cost(task: Task, outcome: Outcome, params: CostParams) -> CostBreakdown:
    """Assemble the completion cost of a task from its outcome."""
    at_edge = outcome.at_edge
    reused = outcome.is_reuse
    comm = communication_cost(task, at_edge, params)
    execution = execution_cost(task, at_edge, params)
    if reused:
        remaining = 0.0 if outcome.is_full_reuse else 1.0 - outcome.reused_fraction
        reuse = reuse_cost(task, outcome.is_full_reuse, remaining, params)
        total = comm + reuse
    else:
        reuse = 0.0
        total = comm + execution
    return CostBreakdown(
        communication=comm,
        execution=execution,
        reuse=reuse,
        total=total,
        at_edge=at_edge,
        full_reuse=outcome.is_full_reuse,
        reused=reused,
    )


@dataclass(frozen=True)
class FeasibilityReport:
    compute_ok: bool
    bandwidth_ok: bool
    compute_load: float
    bandwidth_load: float


def check_feasibility(
    tasks: Sequence[Task], params: CostParams, window: float
) -> FeasibilityReport:
    """Check edge compute and bandwidth budgets for a batch of edge-assigned tasks.

    Loads are ratios of demand to capacity over the window; a load of exactly
    1.0 is still feasible (boundary inclusive).
    """
    if window <= 0:
        raise ValueError("window must be > 0")
    total_complexity = sum(t.complexity for t in tasks)
    total_input = sum(t.input_size for t in tasks)
    compute_load = total_complexity / (params.edge_capacity_rate * window)
    bandwidth_load = total_input / (params.edge_bandwidth * window)
    return FeasibilityReport(
        compute_ok=compute_load <= 1.0,
        bandwidth_ok=bandwidth_load <= 1.0,
        compute_load=compute_load,
        bandwidth_load=bandwidth_load,
    )
