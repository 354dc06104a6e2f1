"""Exact top-k similarity index over id-tagged unit vectors.

Deliberately a brute-force scan: at desk scale exactness beats speed, and an
exact index makes every downstream pipeline oracle-testable. Scores are inner
products, which equal cosine similarity for the unit-norm vectors the
embedder produces. Ties are broken by ascending item id so results are
reproducible.
"""

from __future__ import annotations

import struct
import threading
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import DimensionMismatchError, DuplicateIdError, UnknownIdError

KIND_DOCUMENT = "document"
KIND_ENTITY = "entity"
_KINDS = (KIND_DOCUMENT, KIND_ENTITY)

_MAGIC = b"CMVI"
_VERSION = 1


class Hit(NamedTuple):
    item_id: str
    score: float


@dataclass(frozen=True)
class IndexedItem:
    item_id: str
    kind: str
    vector: np.ndarray


class VectorIndex:
    """Flat in-memory index; many readers or one writer per call.

    All operations take the internal lock, so a query always sees either the
    state before or after any concurrent add/remove, never a partial one.
    """

    def __init__(self, dimension: int):
        if dimension < 1:
            raise ValueError("dimension must be positive")
        self.dimension = dimension
        self._lock = threading.RLock()
        self._ids: list[str] = []
        self._kinds: list[str] = []
        self._vectors: list[np.ndarray] = []
        self._pos: dict[str, int] = {}
        self._matrix: np.ndarray | None = None

    def __len__(self) -> int:
        with self._lock:
            return len(self._ids)

    def ids(self) -> list[str]:
        with self._lock:
            return list(self._ids)

    def __contains__(self, item_id: str) -> bool:
        with self._lock:
            return item_id in self._pos

    def kind_of(self, item_id: str) -> str:
        with self._lock:
            pos = self._pos.get(item_id)
            if pos is None:
                raise UnknownIdError(f"unknown item id {item_id!r}")
            return self._kinds[pos]

    def vector(self, item_id: str) -> np.ndarray:
        with self._lock:
            pos = self._pos.get(item_id)
            if pos is None:
                raise UnknownIdError(f"unknown item id {item_id!r}")
            return self._vectors[pos].copy()

    def add(self, item: IndexedItem) -> None:
        vector = np.asarray(item.vector, dtype=np.float64)
        if vector.shape != (self.dimension,):
            raise DimensionMismatchError(
                f"vector has shape {vector.shape}, index dimension is {self.dimension}"
            )
        if not item.item_id:
            raise ValueError("item_id must be non-empty")
        if item.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}")
        with self._lock:
            if item.item_id in self._pos:
                raise DuplicateIdError(f"item id {item.item_id!r} already indexed")
            self._pos[item.item_id] = len(self._ids)
            self._ids.append(item.item_id)
            self._kinds.append(item.kind)
            self._vectors.append(vector)
            self._matrix = None

    def remove(self, item_id: str) -> None:
        with self._lock:
            pos = self._pos.pop(item_id, None)
            if pos is None:
                raise UnknownIdError(f"unknown item id {item_id!r}")
            self._ids.pop(pos)
            self._kinds.pop(pos)
            self._vectors.pop(pos)
            for moved in range(pos, len(self._ids)):
                self._pos[self._ids[moved]] = moved
            self._matrix = None

    def query(
        self,
        query_vector: np.ndarray,
        k: int,
        restrict: set[str] | None = None,
        kind_filter: str | None = None,
    ) -> list[Hit]:
        """Top-min(k, candidates) hits by inner product, ties by ascending id.

        ``restrict`` limits candidates to the given ids; ``kind_filter`` to one
        item kind. An empty index or empty candidate set yields [].
        """
        query = np.asarray(query_vector, dtype=np.float64)
        if query.shape != (self.dimension,):
            raise DimensionMismatchError(
                f"query has shape {query.shape}, index dimension is {self.dimension}"
            )
        if k < 1:
            raise ValueError("k must be >= 1")
        if kind_filter is not None and kind_filter not in _KINDS:
            raise ValueError(f"kind_filter must be one of {_KINDS}")
        with self._lock:
            if not self._ids:
                return []
            if self._matrix is None:
                self._matrix = np.vstack(self._vectors)
            scores = self._matrix @ query
            candidates: Iterable[int] = range(len(self._ids))
            if restrict is not None:
                candidates = (
                    pos for pos in (self._pos.get(i) for i in restrict) if pos is not None
                )
            if kind_filter is not None:
                candidates = (pos for pos in candidates if self._kinds[pos] == kind_filter)
            ranked = sorted(candidates, key=lambda pos: (-scores[pos], self._ids[pos]))
            return [Hit(self._ids[pos], float(scores[pos])) for pos in ranked[:k]]

    def save(self, path) -> None:
        """Write the snapshot file; see the format notes in the README.

        Layout: magic ``CMVI``, version byte, uint32 dimension, uint64 count,
        then per item a uint16 id length, the utf-8 id, a kind byte
        (0 document, 1 entity) and ``dimension`` little-endian float32 values.
        """
        with self._lock, open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<BIQ", _VERSION, self.dimension, len(self._ids)))
            for item_id, kind, vector in zip(self._ids, self._kinds, self._vectors):
                raw_id = item_id.encode("utf-8")
                fh.write(struct.pack("<H", len(raw_id)))
                fh.write(raw_id)
                fh.write(struct.pack("<B", _KINDS.index(kind)))
                fh.write(vector.astype("<f4").tobytes())

    @classmethod
    def load(cls, path) -> "VectorIndex":
        with open(path, "rb") as fh:
            if fh.read(4) != _MAGIC:
                raise ValueError("not an index snapshot file")
            version, dimension, count = struct.unpack("<BIQ", fh.read(13))
            if version != _VERSION:
                raise ValueError(f"unsupported snapshot version {version}")
            index = cls(dimension)
            for _ in range(count):
                (id_len,) = struct.unpack("<H", fh.read(2))
                item_id = fh.read(id_len).decode("utf-8")
                (kind_code,) = struct.unpack("<B", fh.read(1))
                vector = np.frombuffer(fh.read(4 * dimension), dtype="<f4").astype(np.float64)
                index.add(IndexedItem(item_id, _KINDS[kind_code], vector))
        return index
