"""Text embedding: hashed character n-grams pushed through a seeded random projection.

The local backend lower-cases and whitespace-collapses the input, extracts
character n-grams (sizes ``ngram_min..ngram_max``), feature-hashes them into
2**18 count buckets, and multiplies the counts by a fixed +-1/sqrt(D)
projection matrix whose rows are generated on demand from the config seed by
a counter-based generator (SplitMix64). Results are L2-normalized, so inner
product between vectors equals cosine similarity.

The whole path is dependency-free arithmetic over fixed inputs, which makes
output bitwise reproducible across processes for one (text, config) pair.
A remote backend can replace the local one; it speaks the HTTP ``/embed``
contract exposed by the api service and never falls back silently.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import httpx
import numpy as np

from .errors import DimensionMismatchError, EmptyTextError, RemoteUnavailableError

NUM_BUCKETS = 1 << 18

BACKEND_LOCAL = "deterministic_local"
BACKEND_REMOTE = "remote_service"

# SplitMix64 constants (Steele et al.); the generator is a pure function of
# (seed, counter), which is what makes rows reproducible without storing the
# 2**18 x D matrix.
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


@dataclass(frozen=True)
class EmbedderConfig:
    """Immutable embedding configuration; one instance defines one vector space."""

    dimension: int = 512
    seed: int = 42
    ngram_min: int = 3
    ngram_max: int = 5
    backend: str = BACKEND_LOCAL
    remote_url: str | None = None
    remote_timeout: float = 5.0

    def __post_init__(self) -> None:
        if self.dimension < 2:
            raise ValueError("dimension must be >= 2")
        if not 1 <= self.ngram_min <= self.ngram_max:
            raise ValueError("need 1 <= ngram_min <= ngram_max")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.backend not in (BACKEND_LOCAL, BACKEND_REMOTE):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.backend == BACKEND_REMOTE and not self.remote_url:
            raise ValueError("remote_service backend requires remote_url")


def _normalize_text(text: str) -> str:
    return " ".join(text.lower().split())


def _ngrams(text: str, n_min: int, n_max: int) -> list[str]:
    grams: list[str] = []
    for n in range(n_min, n_max + 1):
        grams.extend(text[i : i + n] for i in range(len(text) - n + 1))
    if not grams:
        # Text shorter than ngram_min: fall back to the whole text as one
        # feature so every non-empty input still embeds.
        grams = [text]
    return grams


def _bucket(gram: str) -> int:
    digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % NUM_BUCKETS


def _projection_rows(buckets: np.ndarray, dimension: int, seed: int) -> np.ndarray:
    """Rows of the +-1/sqrt(D) projection matrix for the given bucket ids.

    Row ``b`` is derived from SplitMix64 outputs at counters
    ``b*W .. b*W+W-1`` where W words of 64 bits cover the dimension, so any
    subset of rows can be regenerated independently and identically.
    """
    words = (dimension + 63) // 64
    counters = buckets.astype(np.uint64)[:, None] * np.uint64(words) + np.arange(
        words, dtype=np.uint64
    )
    z = np.uint64(seed) + (counters + np.uint64(1)) * np.uint64(_GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    z = z ^ (z >> np.uint64(31))
    bits = np.unpackbits(
        z.astype("<u8").view(np.uint8).reshape(len(buckets), -1),
        axis=1,
        bitorder="little",
    )
    signs = 1.0 - 2.0 * bits[:, :dimension].astype(np.float64)
    return signs / math.sqrt(dimension)


def _embed_local(text: str, config: EmbedderConfig) -> np.ndarray:
    normalized = _normalize_text(text)
    if not normalized:
        raise EmptyTextError()
    grams = _ngrams(normalized, config.ngram_min, config.ngram_max)
    buckets, counts = np.unique(
        np.fromiter((_bucket(g) for g in grams), dtype=np.int64, count=len(grams)),
        return_counts=True,
    )
    rows = _projection_rows(buckets, config.dimension, config.seed)
    vector = counts.astype(np.float64) @ rows
    norm = float(np.linalg.norm(vector))
    if norm == 0.0:  # all-cancelling signs; unreachable in practice
        raise RuntimeError("degenerate embedding: projection cancelled exactly")
    return vector / norm


def _remote_embed_batch(texts: list[str], config: EmbedderConfig) -> list[np.ndarray]:
    url = config.remote_url.rstrip("/") + "/embed"
    try:
        response = httpx.post(url, json={"texts": texts}, timeout=config.remote_timeout)
    except httpx.HTTPError as exc:
        raise RemoteUnavailableError(f"embed service at {url} unreachable: {exc}") from exc
    if response.status_code != 200:
        raise RemoteUnavailableError(
            f"embed service at {url} answered HTTP {response.status_code}"
        )
    payload = response.json()
    vectors = [np.asarray(v, dtype=np.float64) for v in payload.get("vectors", [])]
    if len(vectors) != len(texts):
        raise RemoteUnavailableError("embed service returned wrong vector count")
    for v in vectors:
        if v.shape != (config.dimension,):
            raise DimensionMismatchError(
                f"remote returned dimension {v.shape}, expected {config.dimension}"
            )
    return vectors


def embed_text(text: str, config: EmbedderConfig) -> np.ndarray:
    """Embed one text as a unit-norm vector of length ``config.dimension``.

    Raises EmptyTextError for whitespace-only input and RemoteUnavailableError
    when the remote backend cannot be reached.
    """
    if config.backend == BACKEND_REMOTE:
        if not text.strip():
            raise EmptyTextError()
        return _remote_embed_batch([text], config)[0]
    return _embed_local(text, config)


def embed_batch(texts: list[str], config: EmbedderConfig) -> list[np.ndarray]:
    """Embed texts in order; element i equals ``embed_text(texts[i], config)``."""
    for i, text in enumerate(texts):
        if not text.strip():
            raise EmptyTextError(index=i)
    if not texts:
        return []
    if config.backend == BACKEND_REMOTE:
        return _remote_embed_batch(list(texts), config)
    return [_embed_local(text, config) for text in texts]


class Embedder:
    """Embedding frontend bound to one config; safe for concurrent callers."""

    def __init__(self, config: EmbedderConfig | None = None):
        self.config = config or EmbedderConfig()

    @property
    def dimension(self) -> int:
        return self.config.dimension

    def embed(self, text: str) -> np.ndarray:
        return embed_text(text, self.config)

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        return embed_batch(texts, self.config)
