"""Edge computation-reuse simulator.

A similarity-indexed reuse store at the network edge satisfies repeated
service invocations from previously computed results instead of recomputing
them, alongside a completion-cost model, a per-task forwarding policy, a
synthetic workload generator, and a deterministic discrete-event simulator.
"""

from .core import (
    CostParams,
    DimensionMismatch,
    FeatureVector,
    Outcome,
    OutcomeKind,
    Task,
    cosine_distance,
    distance,
)
from .cost import (
    CostBreakdown,
    FeasibilityReport,
    check_feasibility,
    communication_cost,
    completion_cost,
    execution_cost,
    reuse_cost,
)
from .forwarding import EdgeNode
from .lsh import LshIndex, LshParams, Signature
from .reuse_store import (
    LookupKind,
    LookupResult,
    ResultPayload,
    ReuseEntry,
    ReuseStore,
)
from .sim import (
    LshSettings,
    MetricsReport,
    Mode,
    ReuseGain,
    SimConfig,
    StoreSettings,
    TaskRecord,
    reuse_gain,
    run,
    simulate,
)
from .workload import (
    ObjectCatalog,
    WorkloadFileError,
    WorkloadSpec,
    generate,
    ingest,
    ramp_rate,
    redundancy_ramp,
)

__version__ = "0.1.0"

__all__ = [
    "CostBreakdown",
    "CostParams",
    "DimensionMismatch",
    "EdgeNode",
    "FeasibilityReport",
    "FeatureVector",
    "LookupKind",
    "LookupResult",
    "LshIndex",
    "LshParams",
    "LshSettings",
    "MetricsReport",
    "Mode",
    "ObjectCatalog",
    "Outcome",
    "OutcomeKind",
    "ResultPayload",
    "ReuseEntry",
    "ReuseGain",
    "ReuseStore",
    "Signature",
    "SimConfig",
    "StoreSettings",
    "Task",
    "TaskRecord",
    "WorkloadFileError",
    "WorkloadSpec",
    "check_feasibility",
    "communication_cost",
    "completion_cost",
    "cosine_distance",
    "distance",
    "execution_cost",
    "generate",
    "ingest",
    "ramp_rate",
    "redundancy_ramp",
    "reuse_cost",
    "reuse_gain",
    "run",
    "simulate",
]
