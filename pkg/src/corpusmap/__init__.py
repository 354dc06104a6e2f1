"""corpusmap: a spatial knowledge-map engine for document corpora.

Texts are embedded as unit vectors, searched in hierarchical context,
reduced to 2D, clustered into a dendrogram, and projected near the querying
structure on a shared map.
"""

from .cluster import Cluster, ClusterCut, Dendrogram, Merge, cut_dendrogram, label_cluster, linkage_fit
from .embedding import Embedder, EmbedderConfig, embed_batch, embed_text
from .errors import EngineError
from .geometry import ProjectionSpec, project_near
from .index import Hit, IndexedItem, VectorIndex, KIND_DOCUMENT, KIND_ENTITY
from .search import ContextSearchParams, EntityTreeNode, NodeResult, group_search, search_tree
from .service import Engine, create_app, zoom_to_target_clusters
from .store import DocumentRecord, EntityRecord, KnowledgeStore, MapRecord, MenuState
from .tsne import (
    LayoutPoint,
    TsneParams,
    calibrate_affinities,
    kl_divergence,
    kl_gradient,
    tsne_fit,
)

__all__ = [
    "Cluster",
    "ClusterCut",
    "ContextSearchParams",
    "Dendrogram",
    "DocumentRecord",
    "Embedder",
    "EmbedderConfig",
    "Engine",
    "EngineError",
    "EntityRecord",
    "EntityTreeNode",
    "Hit",
    "IndexedItem",
    "KIND_DOCUMENT",
    "KIND_ENTITY",
    "KnowledgeStore",
    "LayoutPoint",
    "MapRecord",
    "MenuState",
    "Merge",
    "NodeResult",
    "ProjectionSpec",
    "TsneParams",
    "VectorIndex",
    "calibrate_affinities",
    "create_app",
    "cut_dendrogram",
    "embed_batch",
    "embed_text",
    "group_search",
    "kl_divergence",
    "kl_gradient",
    "label_cluster",
    "linkage_fit",
    "project_near",
    "search_tree",
    "tsne_fit",
    "zoom_to_target_clusters",
]
