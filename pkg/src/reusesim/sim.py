"""Deterministic discrete-event simulation of users -> edge -> cloud.

Task timeline (edge modes)::

    arrival --uplink--> received at edge --queue--> slot service --downlink--> done

* uplink carries the input plus the whole path's hop latency
  (I/b_e + edge_hops * per_hop_latency); downlink carries the output (O/b_e),
  so transfer time plus service time reproduces the completion-cost model
  exactly when a task never waits.
* the edge has ``edge_slots`` identical slots served FIFO from one queue;
  a slot is held for the full execution time on a miss, for the lookup cost
  on a full reuse hit, and for lookup plus residual execution on a partial
  hit.  Lookup cost is charged only on hits, mirroring the cost model, where
  a from-scratch task's completion carries no lookup term.
* results are stored (placement) the moment execution finishes, before the
  downlink transfer.

``CloudOnly`` bypasses the edge: tasks travel the user<->cloud path and run
immediately (unbounded cloud parallelism).

With ``max_queue_delay`` set, a task that has waited that long abandons the
edge queue and is offloaded: it repeats its transfer on the user<->cloud
path and executes there, keeping the time already spent waiting.

The event loop is single-threaded; events at equal timestamps fire in
scheduling order, so runs are exactly reproducible.  Independent trials may
run in parallel and merge afterwards.
"""

from __future__ import annotations

import hashlib
import heapq
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .core import CostParams, Outcome, OutcomeKind, Task
from .cost import execution_cost, reuse_cost
from .forwarding import EdgeNode
from .reuse_store import ResultPayload, ReuseStore
from .workload import WorkloadSpec, generate, ingest


class Mode(Enum):
    CLOUD_ONLY = "cloud_only"
    EDGE_NO_REUSE = "edge_no_reuse"
    EDGE_WITH_REUSE = "edge_with_reuse"


@dataclass(frozen=True)
class StoreSettings:
    capacity: Optional[int] = 500
    tau_full: float = 1.0
    tau_partial: float = 2.0
    partial_fraction: float = 0.5
    decay_interval: Optional[float] = None


@dataclass(frozen=True)
class LshSettings:
    num_tables: int = 8
    bits_per_table: int = 8
    max_candidates: int = 16


@dataclass
class SimConfig:
    mode: Mode
    workload: WorkloadSpec = field(default_factory=WorkloadSpec)
    cost: CostParams = field(default_factory=CostParams)
    edge_slots: int = 15
    store: StoreSettings = field(default_factory=StoreSettings)
    lsh: LshSettings = field(default_factory=LshSettings)
    trials: int = 10
    seed: int = 42
    max_queue_delay: Optional[float] = None
    features_file: Optional[str] = None

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.edge_slots < 1:
            raise ValueError("edge_slots must be >= 1")
        if self.max_queue_delay is not None and self.max_queue_delay <= 0:
            raise ValueError("max_queue_delay must be > 0 when set")


@dataclass(frozen=True)
class TaskRecord:
    task_id: int
    service: str
    label: str
    outcome: str
    location: str
    arrival_s: float
    start_s: float
    finish_s: float
    waiting_s: float
    computation_s: float
    completion_s: float
    correct: bool


@dataclass(frozen=True)
class MetricsReport:
    mode: Mode
    records: tuple[TaskRecord, ...]
    mean_completion_s: float
    p90_completion_s: float
    mean_computation_s: float
    p90_computation_s: float
    mean_waiting_s: float
    p90_waiting_s: float
    utilization_pct: float
    load_cloud: float
    load_edge: float
    load_reuse: float
    correctness_rate: float
    busy_slot_time: float
    makespan: float
    edge_slots: int
    peak_concurrency: int
    time_avg_in_system: float
    mean_time_in_system: float
    n_full_reuse: int
    n_partial_reuse: int
    n_edge_compute: int
    n_cloud: int
    workload_digest: str


def task_correct(outcome: Outcome, task: Task) -> bool:
    """Whether the task's final output matches from-scratch computation.

    From-scratch execution (edge or cloud) is ground truth by definition; a
    reuse hit is correct iff the matched entry was produced from the same
    object.  For a partial hit the residual is computed from scratch, but the
    reused fraction still has to match.
    """
    if outcome.kind in (OutcomeKind.EDGE_COMPUTE, OutcomeKind.CLOUD_OFFLOAD):
        return True
    return outcome.matched_entry.output.label == task.object_label


def workload_digest(tasks: Sequence[Task]) -> str:
    h = hashlib.blake2b(digest_size=16)
    for t in tasks:
        h.update(
            f"{t.id},{t.object_label},{t.arrival_time!r},{t.input_size!r},"
            f"{t.output_size!r},{t.complexity!r}|".encode()
        )
    return h.hexdigest()


def _service_duration(outcome: Outcome, task: Task, cost: CostParams) -> float:
    """Time a task holds an edge slot, given its outcome."""
    if outcome.kind is OutcomeKind.FULL_REUSE:
        return reuse_cost(task, True, 0.0, cost)
    if outcome.kind is OutcomeKind.PARTIAL_REUSE:
        return reuse_cost(task, False, 1.0 - outcome.reused_fraction, cost)
    return execution_cost(task, True, cost)


def _cloud_record(
    task: Task, depart: float, waiting: float, cost: CostParams
) -> TaskRecord:
    """Record for a task served on the cloud path starting at ``depart``."""
    start = depart + task.input_size / cost.cloud_bandwidth + (
        cost.cloud_hops * cost.per_hop_latency
    )
    computation = execution_cost(task, False, cost)
    finish = start + computation + task.output_size / cost.cloud_bandwidth
    return TaskRecord(
        task_id=task.id,
        service=task.service,
        label=task.object_label,
        outcome=OutcomeKind.CLOUD_OFFLOAD.value,
        location="cloud",
        arrival_s=task.arrival_time,
        start_s=start,
        finish_s=finish,
        waiting_s=waiting,
        computation_s=computation,
        completion_s=finish - task.arrival_time,
        correct=True,
    )


_RECV, _FINISH, _RENEGE = 0, 1, 2


def simulate(
    tasks: Sequence[Task],
    mode: Mode,
    cost: CostParams,
    edge_slots: int = 15,
    store: Optional[ReuseStore] = None,
    max_queue_delay: Optional[float] = None,
) -> MetricsReport:
    """Run one trial over a fixed task list and return its metrics."""
    if mode is Mode.EDGE_WITH_REUSE and store is None:
        raise ValueError("EDGE_WITH_REUSE needs a reuse store")
    digest = workload_digest(tasks)
    if mode is Mode.CLOUD_ONLY:
        records = [_cloud_record(t, t.arrival_time, 0.0, cost) for t in tasks]
        return _aggregate(mode, records, 0.0, edge_slots, 0, 0.0, 0.0, 0, digest)

    node = EdgeNode(
        offloaded_services=frozenset(t.service for t in tasks),
        store=store if mode is Mode.EDGE_WITH_REUSE else None,
        compute_slots=edge_slots,
    )
    by_id = {t.id: t for t in tasks}
    recv_time: dict[int, float] = {}
    state: dict[int, str] = {}
    queue: list[int] = []
    head = 0  # queue is consumed from the front; bounced tasks are skipped
    heap: list[tuple[float, int, int, object]] = []
    seq = 0

    def push(when: float, kind: int, payload) -> None:
        nonlocal seq
        heapq.heappush(heap, (when, seq, kind, payload))
        seq += 1

    for t in sorted(tasks, key=lambda t: (t.arrival_time, t.id)):
        recv = t.arrival_time + t.input_size / cost.edge_bandwidth + (
            cost.edge_hops * cost.per_hop_latency
        )
        recv_time[t.id] = recv
        push(recv, _RECV, t.id)

    free = edge_slots
    running = 0
    peak = 0
    busy = 0.0
    records: list[TaskRecord] = []
    n_in_system = 0
    area = 0.0
    first_event: Optional[float] = None
    last_event: Optional[float] = None
    sum_time_in_system = 0.0
    edge_served = 0

    def dispatch(now: float) -> None:
        nonlocal head, free, running, peak
        while free > 0 and head < len(queue):
            tid = queue[head]
            head += 1
            if state[tid] != "queued":
                continue
            state[tid] = "running"
            task = by_id[tid]
            outcome = node.decide(task, now)
            duration = _service_duration(outcome, task, cost)
            free -= 1
            running += 1
            peak = max(peak, running)
            push(now + duration, _FINISH, (tid, outcome, now, duration))

    while heap:
        now, _, kind, payload = heapq.heappop(heap)
        if first_event is None:
            first_event = now
        else:
            area += n_in_system * (now - last_event)
        last_event = now

        if kind == _RECV:
            tid = payload
            state[tid] = "queued"
            queue.append(tid)
            n_in_system += 1
            if max_queue_delay is not None:
                push(now + max_queue_delay, _RENEGE, tid)
            dispatch(now)
        elif kind == _FINISH:
            tid, outcome, start, duration = payload
            task = by_id[tid]
            free += 1
            running -= 1
            busy += duration
            n_in_system -= 1
            state[tid] = "done"
            node.complete(
                task, outcome, ResultPayload(task.object_label, task.output_size), now
            )
            finish = now + task.output_size / cost.edge_bandwidth
            records.append(
                TaskRecord(
                    task_id=tid,
                    service=task.service,
                    label=task.object_label,
                    outcome=outcome.kind.value,
                    location="edge",
                    arrival_s=task.arrival_time,
                    start_s=start,
                    finish_s=finish,
                    waiting_s=start - recv_time[tid],
                    computation_s=duration,
                    completion_s=finish - task.arrival_time,
                    correct=task_correct(outcome, task),
                )
            )
            sum_time_in_system += now - recv_time[tid]
            edge_served += 1
            dispatch(now)
        else:  # _RENEGE
            tid = payload
            if state.get(tid) != "queued":
                continue
            state[tid] = "bounced"
            n_in_system -= 1
            task = by_id[tid]
            records.append(_cloud_record(task, now, now - recv_time[tid], cost))

    span = (last_event - first_event) if first_event is not None else 0.0
    time_avg = area / span if span > 0 else 0.0
    mean_tis = sum_time_in_system / edge_served if edge_served else 0.0
    return _aggregate(
        mode, records, busy, edge_slots, peak, time_avg, mean_tis, edge_served, digest
    )


def _aggregate(
    mode: Mode,
    records: list[TaskRecord],
    busy: float,
    edge_slots: int,
    peak: int,
    time_avg: float,
    mean_tis: float,
    edge_served: int,
    digest: str,
) -> MetricsReport:
    records = sorted(records, key=lambda r: r.task_id)
    n = len(records)
    if n == 0:
        raise ValueError("cannot aggregate an empty run")
    completion = np.array([r.completion_s for r in records])
    computation = np.array([r.computation_s for r in records])
    waiting = np.array([r.waiting_s for r in records])
    makespan = float(max(r.finish_s for r in records))
    counts = {k: 0 for k in OutcomeKind}
    for r in records:
        counts[OutcomeKind(r.outcome)] += 1
    n_cloud = counts[OutcomeKind.CLOUD_OFFLOAD]
    n_edge = counts[OutcomeKind.EDGE_COMPUTE]
    n_reuse = counts[OutcomeKind.FULL_REUSE] + counts[OutcomeKind.PARTIAL_REUSE]
    utilization = (
        100.0 * busy / (edge_slots * makespan) if makespan > 0 and edge_slots else 0.0
    )
    return MetricsReport(
        mode=mode,
        records=tuple(records),
        mean_completion_s=float(completion.mean()),
        p90_completion_s=float(np.percentile(completion, 90)),
        mean_computation_s=float(computation.mean()),
        p90_computation_s=float(np.percentile(computation, 90)),
        mean_waiting_s=float(waiting.mean()),
        p90_waiting_s=float(np.percentile(waiting, 90)),
        utilization_pct=utilization,
        load_cloud=n_cloud / n,
        load_edge=n_edge / n,
        load_reuse=n_reuse / n,
        correctness_rate=sum(r.correct for r in records) / n,
        busy_slot_time=busy,
        makespan=makespan,
        edge_slots=edge_slots,
        peak_concurrency=peak,
        time_avg_in_system=time_avg,
        mean_time_in_system=mean_tis,
        n_full_reuse=counts[OutcomeKind.FULL_REUSE],
        n_partial_reuse=counts[OutcomeKind.PARTIAL_REUSE],
        n_edge_compute=n_edge,
        n_cloud=n_cloud,
        workload_digest=digest,
    )


def build_store(config: SimConfig, seed: int) -> ReuseStore:
    return ReuseStore(
        dimension=config.workload.dimension,
        capacity=config.store.capacity,
        tau_full=config.store.tau_full,
        tau_partial=config.store.tau_partial,
        partial_fraction=config.store.partial_fraction,
        num_tables=config.lsh.num_tables,
        bits_per_table=config.lsh.bits_per_table,
        max_candidates=config.lsh.max_candidates,
        seed=seed,
        decay_interval=config.store.decay_interval,
    )


def run(config: SimConfig, trial: int = 0) -> MetricsReport:
    """Generate (or ingest) the workload for one trial and simulate it.

    Trial ``i`` uses seed ``config.seed + i`` for both the workload and the
    store's hash functions.
    """
    seed = config.seed + trial
    spec = replace(config.workload, seed=seed)
    if config.features_file is not None:
        tasks = ingest(config.features_file, spec)
    else:
        tasks = generate(spec)
    store = build_store(config, seed) if config.mode is Mode.EDGE_WITH_REUSE else None
    return simulate(
        tasks,
        config.mode,
        config.cost,
        edge_slots=config.edge_slots,
        store=store,
        max_queue_delay=config.max_queue_delay,
    )


@dataclass(frozen=True)
class ReuseGain:
    delay_gain: float
    resource_gain: float


def reuse_gain(report_reuse: MetricsReport, report_plain: MetricsReport) -> ReuseGain:
    """Relative delay/resource savings of reuse versus from-scratch at the edge.

    Both reports must come from the same workload (same seed and spec) with
    modes EDGE_WITH_REUSE and EDGE_NO_REUSE respectively.
    """
    if report_reuse.mode is not Mode.EDGE_WITH_REUSE:
        raise ValueError("first report must be an EDGE_WITH_REUSE run")
    if report_plain.mode is not Mode.EDGE_NO_REUSE:
        raise ValueError("second report must be an EDGE_NO_REUSE run")
    if report_reuse.workload_digest != report_plain.workload_digest:
        raise ValueError("reports come from different workloads")
    if report_plain.mean_completion_s <= 0 or report_plain.utilization_pct <= 0:
        raise ValueError("baseline report has degenerate metrics")
    return ReuseGain(
        delay_gain=1.0 - report_reuse.mean_completion_s / report_plain.mean_completion_s,
        resource_gain=1.0 - report_reuse.utilization_pct / report_plain.utilization_pct,
    )
