"""Per-task forwarding policy at an edge node.

``decide`` picks one of four outcomes: tasks for services not offloaded to
this node go to the cloud; otherwise the reuse store classifies the input as
a full hit, a partial hit, or a miss (miss -> compute from scratch at the
edge).  ``complete`` stores freshly computed results: after a from-scratch
edge computation and after the residual of a partial hit, never after a full
hit, and never for cloud results (the cloud path is a pure fallback and its
outputs are not cached at the edge).

The decision never reads a task's ground-truth label.  Each node is a
single-writer sequence of decide/complete calls; nodes with independent
stores may run in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import Outcome, OutcomeKind, Task
from .reuse_store import LookupKind, ResultPayload, ReuseStore


@dataclass
class EdgeNode:
    """An edge server: its offloaded services, reuse store, and slot count.

    ``store`` may be None to model an edge without reuse; every lookup then
    degrades to a from-scratch computation.
    """

    offloaded_services: frozenset[str]
    store: Optional[ReuseStore] = None
    compute_slots: int = 15

    def __post_init__(self) -> None:
        self.offloaded_services = frozenset(self.offloaded_services)
        if self.compute_slots < 1:
            raise ValueError("compute_slots must be >= 1")

    def decide(self, task: Task, now: float) -> Outcome:
        if task.service not in self.offloaded_services:
            return Outcome(OutcomeKind.CLOUD_OFFLOAD)
        if self.store is None:
            return Outcome(OutcomeKind.EDGE_COMPUTE)
        result = self.store.lookup(task.service, task.features, now)
        if result.kind is LookupKind.FULL:
            return Outcome(
                OutcomeKind.FULL_REUSE, reused_fraction=1.0, matched_entry=result.entry
            )
        if result.kind is LookupKind.PARTIAL:
            return Outcome(
                OutcomeKind.PARTIAL_REUSE,
                reused_fraction=1.0 - result.remaining_fraction,
                matched_entry=result.entry,
            )
        return Outcome(OutcomeKind.EDGE_COMPUTE)

    def complete(
        self, task: Task, outcome: Outcome, result: ResultPayload, now: float
    ) -> None:
        """Record a finished task; stores the result when it was computed here."""
        if outcome.kind in (OutcomeKind.EDGE_COMPUTE, OutcomeKind.PARTIAL_REUSE):
            if self.store is not None:
                self.store.place(task.service, task.features, result, now)
