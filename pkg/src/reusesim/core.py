"""Shared value types: feature vectors, tasks, cost parameters, outcomes.

Everything here is an immutable value type after construction and safe to
share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from .reuse_store import ReuseEntry


class DimensionMismatch(ValueError):
    """Raised when two feature vectors live in incompatible feature spaces."""


@dataclass(frozen=True)
class FeatureVector:
    """Fixed-dimension real-valued feature vector (pre-extracted upstream)."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 1:
            raise ValueError("feature vector needs dimension >= 1")
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("feature vector values must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def dimension(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)


def distance(a: FeatureVector, b: FeatureVector) -> float:
    """Euclidean distance between two feature vectors.

    Cosine distance (``cosine_distance``) is a drop-in alternative with the
    same contract for workloads where direction matters more than magnitude.
    """
    if a.dimension != b.dimension:
        raise DimensionMismatch(
            f"cannot compare vectors of dimension {a.dimension} and {b.dimension}"
        )
    return math.dist(a.values, b.values)


def cosine_distance(a: FeatureVector, b: FeatureVector) -> float:
    """1 - cosine similarity; raises on zero-norm inputs."""
    if a.dimension != b.dimension:
        raise DimensionMismatch(
            f"cannot compare vectors of dimension {a.dimension} and {b.dimension}"
        )
    na = math.hypot(*a.values)
    nb = math.hypot(*b.values)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine distance undefined for zero vectors")
    dot = sum(x * y for x, y in zip(a.values, b.values))
    return 1.0 - dot / (na * nb)


@dataclass(frozen=True)
class Task:
    """One service invocation.

    ``object_label`` is ground truth used only for correctness scoring; the
    forwarding plane never receives it as an input.  Sizes are in megabits,
    complexity in abstract compute-units, times in seconds.
    """

    id: int
    service: str
    object_label: str
    features: FeatureVector
    input_size: float
    output_size: float
    complexity: float
    arrival_time: float = 0.0

    def __post_init__(self) -> None:
        if self.input_size < 0 or self.output_size < 0:
            raise ValueError("task data sizes must be >= 0")
        if self.complexity <= 0:
            raise ValueError("task complexity must be > 0")
        if self.arrival_time < 0:
            raise ValueError("task arrival time must be >= 0")


@dataclass(frozen=True)
class CostParams:
    """Network and compute parameters of the user/edge/cloud paths.

    Bandwidths are megabits/second, capacity rates compute-units/second,
    lookup cost and per-hop latency in seconds.  Defaults are the experiment
    defaults (hop counts from the midpoints of the published ranges; the
    remaining values are desk-scale choices documented in the README).
    """

    edge_bandwidth: float = 100.0
    cloud_bandwidth: float = 4.0
    edge_capacity_rate: float = 100.0
    cloud_capacity_rate: float = 1000.0
    lookup_cost: float = 0.001
    edge_hops: int = 1
    cloud_hops: int = 6
    per_hop_latency: float = 0.005

    def __post_init__(self) -> None:
        if min(self.edge_bandwidth, self.cloud_bandwidth) <= 0:
            raise ValueError("bandwidths must be > 0")
        if min(self.edge_capacity_rate, self.cloud_capacity_rate) <= 0:
            raise ValueError("capacity rates must be > 0")
        if self.lookup_cost < 0:
            raise ValueError("lookup cost must be >= 0")
        if not (self.cloud_hops >= self.edge_hops >= 1):
            raise ValueError("need cloud_hops >= edge_hops >= 1")
        if self.per_hop_latency < 0:
            raise ValueError("per-hop latency must be >= 0")


class OutcomeKind(Enum):
    FULL_REUSE = "full_reuse"
    PARTIAL_REUSE = "partial_reuse"
    EDGE_COMPUTE = "edge_compute"
    CLOUD_OFFLOAD = "cloud_offload"


@dataclass(frozen=True)
class Outcome:
    """How a task was satisfied, plus the matched store entry when reused."""

    kind: OutcomeKind
    reused_fraction: float = 0.0
    matched_entry: Optional["ReuseEntry"] = None

    def __post_init__(self) -> None:
        if self.kind is OutcomeKind.FULL_REUSE:
            if self.reused_fraction != 1.0 or self.matched_entry is None:
                raise ValueError("full reuse requires fraction 1 and a matched entry")
        elif self.kind is OutcomeKind.PARTIAL_REUSE:
            if not (0.0 < self.reused_fraction < 1.0) or self.matched_entry is None:
                raise ValueError(
                    "partial reuse requires fraction in (0,1) and a matched entry"
                )
        else:
            if self.reused_fraction != 0.0 or self.matched_entry is not None:
                raise ValueError(
                    "non-reuse outcomes carry no reused fraction or matched entry"
                )

    @property
    def at_edge(self) -> bool:
        """Offloading flag: True when the task is handled by the edge server."""
        return self.kind is not OutcomeKind.CLOUD_OFFLOAD

    @property
    def is_reuse(self) -> bool:
        """Reuse flag: True when a stored result satisfies (part of) the task."""
        return self.kind in (OutcomeKind.FULL_REUSE, OutcomeKind.PARTIAL_REUSE)

    @property
    def is_full_reuse(self) -> bool:
        return self.kind is OutcomeKind.FULL_REUSE
