"""Hierarchical-context search over the vector index.

The root of a query tree searches the whole index at breadth B; each child
then searches only inside its parent's breadth-B neighborhood id set, depth
first, so a structured query partitions the meaning space level by level.
Every node reports its top per_node_k hits, and its own breadth-B
neighborhood (within its restriction) becomes the candidate set for its
children. Group search ranks against the normalized centroid of a set of
already-indexed items, excluding the members themselves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCentroidError, InvalidTreeError
from .index import Hit, VectorIndex

CENTROID_NORM_FLOOR = 1e-9


@dataclass
class EntityTreeNode:
    node_id: str
    text: str
    children: list["EntityTreeNode"] = field(default_factory=list)
    anchor: tuple[float, float] | None = None


@dataclass(frozen=True)
class ContextSearchParams:
    root_breadth: int = 256
    per_node_k: int = 20
    kind_filter: str | None = None

    def __post_init__(self) -> None:
        if self.root_breadth < 1 or self.per_node_k < 1:
            raise ValueError("root_breadth and per_node_k must be positive")
        if self.per_node_k > self.root_breadth:
            raise ValueError("per_node_k must not exceed root_breadth")


@dataclass
class NodeResult:
    node_id: str
    hits: list[Hit]


def walk_tree(root: EntityTreeNode) -> list[EntityTreeNode]:
    """Nodes in depth-first preorder; rejects duplicate node ids."""
    seen: set[str] = set()
    ordered: list[EntityTreeNode] = []

    def visit(node: EntityTreeNode) -> None:
        if node.node_id in seen:
            raise InvalidTreeError(f"duplicate node id {node.node_id!r}")
        seen.add(node.node_id)
        ordered.append(node)
        for child in node.children:
            visit(child)

    visit(root)
    return ordered


def search_tree(
    tree: EntityTreeNode,
    params: ContextSearchParams,
    index: VectorIndex,
    embedder,
) -> list[NodeResult]:
    """One NodeResult per tree node, in depth-first preorder.

    The root queries unrestricted; a child's candidate set is exactly its
    parent's breadth-B neighborhood id set. Anchors never influence ranking.
    """
    nodes = walk_tree(tree)
    vectors = embedder.embed_batch([node.text for node in nodes])
    vector_of = {node.node_id: vec for node, vec in zip(nodes, vectors)}
    results: list[NodeResult] = []

    def visit(node: EntityTreeNode, restrict: set[str] | None) -> None:
        neighborhood = index.query(
            vector_of[node.node_id],
            k=params.root_breadth,
            restrict=restrict,
            kind_filter=params.kind_filter,
        )
        results.append(NodeResult(node.node_id, neighborhood[: params.per_node_k]))
        child_candidates = {hit.item_id for hit in neighborhood}
        for child in node.children:
            visit(child, child_candidates)

    visit(tree, None)
    return results


def group_search(member_ids, k: int, index: VectorIndex) -> list[Hit]:
    """Top-k items nearest the members' normalized centroid, members excluded."""
    members = sorted(set(member_ids))
    if not members:
        raise ValueError("group_search needs at least one member id")
    if k < 1:
        raise ValueError("k must be >= 1")
    vectors = np.array([index.vector(m) for m in members])
    centroid = vectors.mean(axis=0)
    norm = float(np.linalg.norm(centroid))
    if norm < CENTROID_NORM_FLOOR:
        raise DegenerateCentroidError("group centroid has near-zero norm")
    rest = set(index.ids()).difference(members)
    if not rest:
        return []
    return index.query(centroid / norm, k, restrict=rest)
