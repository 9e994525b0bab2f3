"""Locality-sensitive similarity index over real-valued feature vectors.

The hash family is sign-of-random-projection: each of ``num_tables`` tables
hashes a vector to a ``bits_per_table``-bit bucket key, one bit per random
unit hyperplane (bit j is 1 iff the projection onto hyperplane j is >= 0,
so the boundary case is deterministic).  Two unit vectors at angle theta
agree on one bit with probability 1 - theta/pi, hence collide on a whole
k-bit key with probability (1 - theta/pi)^k.  Multiple tables raise the
chance that near neighbours share at least one bucket.

Hyperplanes come from ``numpy.random.default_rng(seed)`` (PCG64), whose
stream is stable across platforms, so a given (params, seed) pair always
builds the same index.

Reads (``signature``, ``query``, ``candidate_ids``) may run concurrently;
``insert``/``remove`` need exclusive access.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .core import DimensionMismatch, FeatureVector

VectorLike = Union[FeatureVector, Sequence[float], np.ndarray]


@dataclass(frozen=True)
class LshParams:
    num_tables: int = 8
    bits_per_table: int = 8
    dimension: int = 32
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_tables < 1:
            raise ValueError("num_tables must be >= 1")
        if not 1 <= self.bits_per_table <= 62:
            raise ValueError("bits_per_table must be in [1, 62]")
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")


@dataclass(frozen=True)
class Signature:
    """Per-table bucket keys of one vector; key i addresses table i."""

    per_table_keys: tuple[int, ...]


class LshIndex:
    """In-memory LSH index mapping entry ids to feature vectors."""

    def __init__(self, params: LshParams):
        rng = np.random.default_rng(params.seed)
        planes = rng.standard_normal(
            (params.num_tables, params.bits_per_table, params.dimension)
        )
        planes /= np.linalg.norm(planes, axis=2, keepdims=True)
        self.params = params
        self.hyperplanes = planes
        self._proj = planes.reshape(-1, params.dimension)
        self._bit_weights = 1 << np.arange(params.bits_per_table, dtype=np.int64)
        self._tables: list[dict[int, set[int]]] = [
            {} for _ in range(params.num_tables)
        ]
        self._vectors: dict[int, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, entry_id: int) -> bool:
        return entry_id in self._vectors

    def _coerce(self, v: VectorLike) -> np.ndarray:
        arr = np.asarray(
            v.values if isinstance(v, FeatureVector) else v, dtype=np.float64
        )
        if arr.shape != (self.params.dimension,):
            raise DimensionMismatch(
                f"expected a vector of dimension {self.params.dimension}, "
                f"got shape {arr.shape}"
            )
        return arr

    def signature(self, v: VectorLike) -> Signature:
        arr = self._coerce(v)
        bits = (self._proj @ arr) >= 0.0
        keys = bits.reshape(
            self.params.num_tables, self.params.bits_per_table
        ).astype(np.int64) @ self._bit_weights
        return Signature(tuple(int(k) for k in keys))

    def insert(self, entry_id: int, v: VectorLike) -> None:
        if entry_id in self._vectors:
            raise ValueError(f"entry id {entry_id} already present")
        arr = self._coerce(v)
        for table, key in zip(self._tables, self.signature(arr).per_table_keys):
            table.setdefault(key, set()).add(entry_id)
        self._vectors[entry_id] = arr

    def remove(self, entry_id: int) -> None:
        if entry_id not in self._vectors:
            raise KeyError(f"unknown entry id {entry_id}")
        arr = self._vectors.pop(entry_id)
        for table, key in zip(self._tables, self.signature(arr).per_table_keys):
            bucket = table[key]
            bucket.discard(entry_id)
            if not bucket:
                del table[key]

    def candidate_ids(self, q: VectorLike) -> frozenset[int]:
        """Union of the buckets addressed by the query's signature."""
        arr = self._coerce(q)
        ids: set[int] = set()
        for table, key in zip(self._tables, self.signature(arr).per_table_keys):
            ids |= table.get(key, set())
        return frozenset(ids)

    def query(
        self, q: VectorLike, max_candidates: int = 16
    ) -> list[tuple[int, float]]:
        """Nearest candidates from the addressed buckets.

        Returns (entry_id, euclidean distance) pairs sorted ascending by
        distance (ties by ascending id), truncated to ``max_candidates``.
        """
        if max_candidates < 1:
            raise ValueError("max_candidates must be >= 1")
        arr = self._coerce(q)
        ids = sorted(self.candidate_ids(arr))
        if not ids:
            return []
        stacked = np.stack([self._vectors[i] for i in ids])
        dists = np.sqrt(((stacked - arr) ** 2).sum(axis=1))
        ranked = sorted(zip(ids, dists.tolist()), key=lambda p: (p[1], p[0]))
        return ranked[:max_candidates]

    def bucket_sizes(self) -> Iterable[int]:
        for table in self._tables:
            for bucket in table.values():
                yield len(bucket)
