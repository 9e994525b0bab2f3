"""Reuse store: previously computed results keyed by input similarity.

Each service gets its own LSH index plus an entry map.  A lookup classifies
the nearest stored input as a full hit (distance <= tau_full), a partial hit
(distance <= tau_partial, covering ``partial_fraction`` of the task), or a
miss.  Hits bump the entry's reuse frequency; when a service's table is at
capacity the least-frequently-used entry is evicted (ties: least recently
used, then smallest id).

Admission is unconditional: every freshly computed result is stored and LFU
filters out unpopular inputs over time.  Frequencies count over the entry's
whole lifetime by default; setting ``decay_interval`` halves all counts every
interval to approximate windowed popularity.

Single-writer, multi-reader: lookups mutate frequency counters, so they need
the writer role; the structure itself is sendable between threads.
"""

from __future__ import annotations

import zlib
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .core import FeatureVector
from .lsh import LshIndex, LshParams


@dataclass
class ResultPayload:
    """Opaque computed output: the produced label and its size in megabits."""

    label: str
    output_size: float = 0.0


@dataclass
class ReuseEntry:
    id: int
    service: str
    features: FeatureVector
    output: ResultPayload
    frequency: int = 0
    inserted_at: float = 0.0
    last_used_at: float = 0.0


class LookupKind(Enum):
    FULL = "full"
    PARTIAL = "partial"
    MISS = "miss"


@dataclass(frozen=True)
class LookupResult:
    kind: LookupKind
    entry: Optional[ReuseEntry] = None
    remaining_fraction: float = 0.0

    @property
    def is_hit(self) -> bool:
        return self.kind is not LookupKind.MISS


MISS = LookupResult(LookupKind.MISS)


@dataclass(frozen=True)
class ServiceStats:
    entries: int
    hits: int
    misses: int


def _service_seed(base_seed: int, service: str) -> int:
    # crc32 keeps the derivation stable across runs and platforms (the
    # builtin hash() is salted per process).
    return (base_seed * 0x9E3779B1 + zlib.crc32(service.encode("utf-8"))) & (
        2**63 - 1
    )


class ReuseStore:
    """Per-service similarity-indexed cache of computed results."""

    def __init__(
        self,
        dimension: int,
        capacity: Optional[int] = 500,
        tau_full: float = 1.0,
        tau_partial: float = 2.0,
        partial_fraction: float = 0.5,
        num_tables: int = 8,
        bits_per_table: int = 8,
        max_candidates: int = 16,
        seed: int = 0,
        decay_interval: Optional[float] = None,
    ):
        if capacity is not None and capacity < 1:
            raise ValueError("capacity must be >= 1 (or None for unbounded)")
        if tau_full < 0 or tau_partial <= tau_full:
            raise ValueError("need 0 <= tau_full < tau_partial")
        if not 0.0 < partial_fraction < 1.0:
            raise ValueError("partial_fraction must lie in (0, 1)")
        if decay_interval is not None and decay_interval <= 0:
            raise ValueError("decay_interval must be > 0 when set")
        self.dimension = dimension
        self.capacity = capacity
        self.tau_full = tau_full
        self.tau_partial = tau_partial
        self.partial_fraction = partial_fraction
        self.max_candidates = max_candidates
        self.seed = seed
        self.decay_interval = decay_interval
        self._lsh_template = dict(
            num_tables=num_tables, bits_per_table=bits_per_table, dimension=dimension
        )
        self._entries: dict[str, dict[int, ReuseEntry]] = {}
        self._indexes: dict[str, LshIndex] = {}
        self._hits: Counter[str] = Counter()
        self._misses: Counter[str] = Counter()
        self._next_id = 0
        self._last_decay = 0.0
        self.eviction_log: list[tuple[str, int]] = []

    def _index_for(self, service: str) -> LshIndex:
        index = self._indexes.get(service)
        if index is None:
            params = LshParams(
                seed=_service_seed(self.seed, service), **self._lsh_template
            )
            index = LshIndex(params)
            self._indexes[service] = index
        return index

    def _maybe_decay(self, now: float) -> None:
        if self.decay_interval is None:
            return
        while now - self._last_decay >= self.decay_interval:
            for table in self._entries.values():
                for entry in table.values():
                    entry.frequency //= 2
            self._last_decay += self.decay_interval

    def lookup(self, service: str, q: FeatureVector, now: float) -> LookupResult:
        """Classify the nearest stored input for ``service`` against the thresholds.

        A full or partial hit increments the matched entry's frequency and
        stamps its last use; a miss (including an unknown service) leaves the
        store untouched apart from the miss counter.
        """
        if not service:
            raise ValueError("service name must be non-empty")
        self._maybe_decay(now)
        table = self._entries.get(service)
        if not table:
            self._misses[service] += 1
            return MISS
        ranked = self._index_for(service).query(q, self.max_candidates)
        if not ranked:
            self._misses[service] += 1
            return MISS
        best_id, best_dist = ranked[0]
        if best_dist > self.tau_partial:
            self._misses[service] += 1
            return MISS
        entry = table[best_id]
        entry.frequency += 1
        entry.last_used_at = now
        self._hits[service] += 1
        if best_dist <= self.tau_full:
            return LookupResult(LookupKind.FULL, entry)
        return LookupResult(
            LookupKind.PARTIAL, entry, remaining_fraction=1.0 - self.partial_fraction
        )

    def place(
        self,
        service: str,
        features: FeatureVector,
        output: ResultPayload,
        now: float,
    ) -> int:
        """Admit a freshly computed result, evicting LFU first if at capacity.

        Returns the new entry's id.
        """
        self._maybe_decay(now)
        table = self._entries.setdefault(service, {})
        if self.capacity is not None and len(table) >= self.capacity:
            self.evict_lfu(service)
        entry_id = self._next_id
        self._next_id += 1
        entry = ReuseEntry(
            id=entry_id,
            service=service,
            features=features,
            output=output,
            frequency=0,
            inserted_at=now,
            last_used_at=now,
        )
        table[entry_id] = entry
        self._index_for(service).insert(entry_id, features)
        return entry_id

    def evict_lfu(self, service: str) -> int:
        """Remove and return the id of the least-frequently-used entry."""
        table = self._entries.get(service)
        if not table:
            raise KeyError(f"no entries stored for service {service!r}")
        victim = min(
            table.values(), key=lambda e: (e.frequency, e.last_used_at, e.id)
        )
        del table[victim.id]
        self._index_for(service).remove(victim.id)
        self.eviction_log.append((service, victim.id))
        return victim.id

    def entry_count(self, service: str) -> int:
        return len(self._entries.get(service, {}))

    def entries(self, service: str) -> list[ReuseEntry]:
        return list(self._entries.get(service, {}).values())

    def stats(self) -> dict[str, ServiceStats]:
        services = set(self._entries) | set(self._hits) | set(self._misses)
        return {
            s: ServiceStats(
                entries=len(self._entries.get(s, {})),
                hits=self._hits[s],
                misses=self._misses[s],
            )
            for s in sorted(services)
        }

    # -- snapshot/restore -------------------------------------------------
    #
    # Flat text format, one entry per line:
    #   service,id,frequency,inserted_at,last_used_at,label,v1,...,vd
    # Hit/miss counters are not part of the snapshot.

    def save(self, path) -> None:
        lines = []
        for service in sorted(self._entries):
            if "," in service:
                raise ValueError("service names must not contain commas")
            for entry_id in sorted(self._entries[service]):
                e = self._entries[service][entry_id]
                if "," in e.output.label:
                    raise ValueError("labels must not contain commas")
                values = ",".join(repr(v) for v in e.features.values)
                lines.append(
                    f"{service},{e.id},{e.frequency},{e.inserted_at!r},"
                    f"{e.last_used_at!r},{e.output.label},{values}"
                )
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines))
            if lines:
                fh.write("\n")

    @classmethod
    def load(cls, path, **kwargs) -> "ReuseStore":
        """Rebuild a store from a snapshot; keyword args mirror the constructor.

        The feature dimension is inferred from the file, so ``dimension``
        must not be passed.
        """
        rows = []
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line:
                    continue
                parts = line.split(",")
                if len(parts) < 7:
                    raise ValueError(f"line {lineno}: too few fields")
                service, entry_id, freq, inserted, used, label = parts[:6]
                values = tuple(float(v) for v in parts[6:])
                rows.append(
                    (
                        service,
                        int(entry_id),
                        int(freq),
                        float(inserted),
                        float(used),
                        label,
                        values,
                    )
                )
        if "dimension" in kwargs:
            raise TypeError("dimension is inferred from the snapshot")
        dim = len(rows[0][6]) if rows else 1
        store = cls(dimension=dim, **kwargs)
        for service, entry_id, freq, inserted, used, label, values in rows:
            features = FeatureVector(values)
            entry = ReuseEntry(
                id=entry_id,
                service=service,
                features=features,
                output=ResultPayload(label=label),
                frequency=freq,
                inserted_at=inserted,
                last_used_at=used,
            )
            store._entries.setdefault(service, {})[entry_id] = entry
            store._index_for(service).insert(entry_id, features)
            store._next_id = max(store._next_id, entry_id + 1)
        return store
