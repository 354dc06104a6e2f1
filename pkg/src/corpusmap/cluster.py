"""Agglomerative clustering of 2D layout points into a dendrogram.

Average linkage (UPGMA) over Euclidean distance, maintained with the
Lance-Williams update. Linkage is monotone, so merge heights never decrease
and cutting the merge sequence at any prefix yields properly nested flat
clusterings, which is what lets a map split parent clusters into children on
zoom. Tie-break between equal-distance pairs is by the lexicographically
least (smaller id, larger id) tuple, so merge sequences are reproducible.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import OutOfRangeError
from .tsne import LayoutPoint

_TOKEN_RE = re.compile(r"[a-z0-9]+")
MIN_TOKEN_LEN = 3
LABEL_TOKENS = 3
LABEL_SEPARATOR = " · "


class Merge(NamedTuple):
    left: int  # smaller cluster id
    right: int  # larger cluster id
    height: float
    new_id: int


@dataclass
class Dendrogram:
    """Full merge history; leaf i has cluster id i, merges get ids N, N+1, ..."""

    leaves: list[str]
    coordinates: np.ndarray  # (N, 2), used for cut centroids
    merges: list[Merge]


@dataclass
class Cluster:
    cluster_id: int
    member_ids: list[str]  # in leaf (input) order
    centroid: tuple[float, float]
    label: str = ""


@dataclass
class ClusterCut:
    clusters: list[Cluster] = field(default_factory=list)


def linkage_fit(points: list[LayoutPoint]) -> Dendrogram:
    """Average-linkage dendrogram over the points' Euclidean distances."""
    n = len(points)
    leaves = [p.item_id for p in points]
    coords = np.array([[p.x, p.y] for p in points], dtype=np.float64).reshape(n, 2)
    if not np.all(np.isfinite(coords)):
        raise ValueError("coordinates must be finite")
    merges: list[Merge] = []
    if n <= 1:
        return Dendrogram(leaves, coords, merges)

    sizes = {i: 1 for i in range(n)}
    dist: dict[tuple[int, int], float] = {}
    for i in range(n):
        for j in range(i + 1, n):
            dist[(i, j)] = float(np.linalg.norm(coords[i] - coords[j]))

    next_id = n
    while len(sizes) > 1:
        (a, b), height = min(dist.items(), key=lambda kv: (kv[1], kv[0]))
        size_a, size_b = sizes.pop(a), sizes.pop(b)
        merged_size = size_a + size_b
        updated: dict[tuple[int, int], float] = {}
        for other in sizes:
            d_a = dist.pop((min(a, other), max(a, other)))
            d_b = dist.pop((min(b, other), max(b, other)))
            updated[(other, next_id)] = (size_a * d_a + size_b * d_b) / merged_size
        del dist[(a, b)]
        dist.update(updated)
        merges.append(Merge(a, b, height, next_id))
        sizes[next_id] = merged_size
        next_id += 1
    return Dendrogram(leaves, coords, merges)


def _members_at(dendrogram: Dendrogram, kept_merges: int) -> dict[int, list[int]]:
    members = {i: [i] for i in range(len(dendrogram.leaves))}
    for merge in dendrogram.merges[:kept_merges]:
        combined = sorted(members.pop(merge.left) + members.pop(merge.right))
        members[merge.new_id] = combined
    return members


def cut_dendrogram(dendrogram: Dendrogram, target_clusters: int) -> ClusterCut:
    """Partition into exactly target_clusters by keeping a prefix of merges."""
    n = len(dendrogram.leaves)
    if not 1 <= target_clusters <= n:
        raise OutOfRangeError(f"target_clusters must be in [1, {n}], got {target_clusters}")
    members = _members_at(dendrogram, n - target_clusters)
    clusters = []
    for cluster_id in sorted(members):
        leaf_indices = members[cluster_id]
        centroid = dendrogram.coordinates[leaf_indices].mean(axis=0)
        clusters.append(
            Cluster(
                cluster_id=cluster_id,
                member_ids=[dendrogram.leaves[i] for i in leaf_indices],
                centroid=(float(centroid[0]), float(centroid[1])),
            )
        )
    return ClusterCut(clusters)


def tokenize(text: str) -> list[str]:
    return [t for t in _TOKEN_RE.findall(text.lower()) if len(t) >= MIN_TOKEN_LEN]


def label_cluster(member_ids, store) -> str:
    """Caption a cluster with its most distinctive tokens.

    Tokens are scored by term frequency inside the cluster divided by document
    frequency over every text in the store; the top three (lexicographic
    tie-break) are joined with a middle dot.
    """
    term_freq: Counter[str] = Counter()
    for member_id in member_ids:
        term_freq.update(tokenize(store.get_text(member_id)))
    if not term_freq:
        return ""
    doc_freq: Counter[str] = Counter()
    wanted = set(term_freq)
    for _, text in store.all_texts():
        doc_freq.update(wanted.intersection(tokenize(text)))
    scored = sorted(
        term_freq,
        key=lambda token: (-term_freq[token] / max(doc_freq[token], 1), token),
    )
    return LABEL_SEPARATOR.join(scored[:LABEL_TOKENS])
