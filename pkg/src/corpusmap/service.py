"""HTTP service exposing the engine's add and query pipelines plus map CRUD.

The query pipeline runs, in order: embed the tree's node texts, search the
index in hierarchical context, lay each node's hits out in 2D, cluster the
layout into a dendrogram and cut it, then project the layout into map space
near the querying node. Responses are deterministic for a fixed store state,
request body, and engine seed (echoed in the X-Engine-Seed header).
"""

from __future__ import annotations

import math
import threading
from typing import Literal

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import cluster as clustering
from .embedding import Embedder, EmbedderConfig
from .errors import (
    CrossMapLinkError,
    CycleDetectedError,
    DegenerateCentroidError,
    DimensionMismatchError,
    DuplicateIdError,
    EmptyTextError,
    EngineError,
    InvalidTreeError,
    OutOfRangeError,
    RemoteUnavailableError,
    TooFewPointsError,
    UnknownIdError,
)
from .geometry import ProjectionSpec, project_near
from .index import IndexedItem, VectorIndex, KIND_ENTITY, KIND_DOCUMENT
from .search import ContextSearchParams, EntityTreeNode, group_search, search_tree
from .store import KnowledgeStore
from .tsne import TsneParams, tsne_fit

DEFAULT_SEED = 42
DEFAULT_DIMENSION = 512
DEFAULT_RADIUS = 1.0

# Children without an anchor of their own fan out from their parent's anchor
# at 2*radius, one compass direction per sibling, widening every full turn.
_DIAG = math.sqrt(0.5)
COMPASS = [
    (0.0, 1.0),
    (1.0, 0.0),
    (0.0, -1.0),
    (-1.0, 0.0),
    (_DIAG, _DIAG),
    (_DIAG, -_DIAG),
    (-_DIAG, -_DIAG),
    (-_DIAG, _DIAG),
]


def zoom_to_target_clusters(zoom: float, max_zoom: float, n: int) -> int:
    """Exponential zoom schedule: z=0 shows one cluster, z=max shows n."""
    if n < 1:
        return 0
    if max_zoom <= 0:
        return 1
    return max(1, min(n, round(n ** (zoom / max_zoom))))


class Engine:
    """All engine modules wired together around one store and one index."""

    def __init__(self, data_dir=None, seed: int = DEFAULT_SEED, dimension: int = DEFAULT_DIMENSION):
        self.seed = seed
        self.config = EmbedderConfig(dimension=dimension, seed=seed)
        self.embedder = Embedder(self.config)
        self.index = VectorIndex(dimension)
        self.store = KnowledgeStore(data_dir, index=self.index)
        self._lock = threading.RLock()
        self._reindex()

    def _reindex(self) -> None:
        """Rebuild the index from persisted texts (embedding is deterministic)."""
        documents = self.store.documents()
        entities = self.store.entities()
        texts = [d.text for d in documents] + [e.text for e in entities]
        if not texts:
            return
        vectors = self.embedder.embed_batch(texts)
        for record, vector in zip(documents, vectors[: len(documents)]):
            self.index.add(IndexedItem(record.document_id, KIND_DOCUMENT, vector))
        for record, vector in zip(entities, vectors[len(documents) :]):
            self.index.add(IndexedItem(record.entity_id, KIND_ENTITY, vector))

    def close(self) -> None:
        self.store.close()

    # -- add pipeline ------------------------------------------------------

    def add_document(self, title: str, url: str, text: str):
        vector = self.embedder.embed(text)
        with self._lock:
            record = self.store.add_document(title, url, text)
            self.index.add(IndexedItem(record.document_id, KIND_DOCUMENT, vector))
        return record

    def create_entity(self, map_id, text, coordinates, parent_entity_id=None):
        vector = self.embedder.embed(text)
        with self._lock:
            record = self.store.create_entity(map_id, text, coordinates, parent_entity_id)
            self.index.add(IndexedItem(record.entity_id, KIND_ENTITY, vector))
        return record

    def retext_entity(self, entity_id: str, text: str):
        vector = self.embedder.embed(text)
        with self._lock:
            record = self.store.retext_entity(entity_id, text)
            self.index.remove(entity_id)
            self.index.add(IndexedItem(entity_id, KIND_ENTITY, vector))
        return record

    def delete_entity(self, entity_id: str) -> None:
        with self._lock:
            self.store.delete_entity(entity_id)  # store drops the vector too

    # -- query pipeline ----------------------------------------------------

    def query(
        self,
        map_id: str,
        tree: EntityTreeNode,
        params: ContextSearchParams,
        target_clusters: int | None = None,
        radius: float = DEFAULT_RADIUS,
    ) -> dict:
        self.store.get_map(map_id)
        results = search_tree(tree, params, self.index, self.embedder)
        anchors = self._resolve_anchors(tree, radius)
        nodes = []
        for result in results:
            hits = result.hits
            anchor = anchors[result.node_id]
            vectors = [self.index.vector(h.item_id) for h in hits]
            layout = tsne_fit(
                np.array(vectors).reshape(len(hits), self.config.dimension),
                TsneParams(seed=self.seed),
                ids=[h.item_id for h in hits],
            )
            projected = project_near(layout, ProjectionSpec(anchor=anchor, radius=radius))
            position = {p.item_id: (p.x, p.y) for p in projected}
            clusters = []
            if hits:
                dendrogram = clustering.linkage_fit(layout)
                target = target_clusters if target_clusters is not None else round(math.sqrt(len(hits)))
                cut = clustering.cut_dendrogram(dendrogram, max(1, min(len(hits), target)))
                for item in cut.clusters:
                    centroid = np.array([position[m] for m in item.member_ids]).mean(axis=0)
                    clusters.append(
                        {
                            "clusterId": item.cluster_id,
                            "memberIds": list(item.member_ids),
                            "centroid": [float(centroid[0]), float(centroid[1])],
                            "label": clustering.label_cluster(item.member_ids, self.store),
                        }
                    )
            nodes.append(
                {
                    "nodeId": result.node_id,
                    "anchor": [anchor[0], anchor[1]],
                    "hits": [{"itemId": h.item_id, "score": h.score} for h in hits],
                    "clusters": clusters,
                    "projectedPoints": [
                        {"itemId": p.item_id, "x": p.x, "y": p.y} for p in projected
                    ],
                }
            )
        return {"mapId": map_id, "seed": self.seed, "nodes": nodes}

    def _resolve_anchors(self, tree: EntityTreeNode, radius: float) -> dict[str, tuple[float, float]]:
        """Anchor per node: its own, else its entity's coordinates, else fanned
        out from the parent anchor (root without either sits at the origin)."""
        anchors: dict[str, tuple[float, float]] = {}

        def own_anchor(node: EntityTreeNode) -> tuple[float, float] | None:
            if node.anchor is not None:
                return (float(node.anchor[0]), float(node.anchor[1]))
            try:
                entity = self.store.get_entity(node.node_id)
            except UnknownIdError:
                return None
            return entity.coordinates

        def visit(node: EntityTreeNode, fallback: tuple[float, float]) -> None:
            anchor = own_anchor(node) or fallback
            anchors[node.node_id] = anchor
            for position, child in enumerate(node.children):
                dx, dy = COMPASS[position % len(COMPASS)]
                step = 2.0 * radius * (1 + position // len(COMPASS))
                visit(child, (anchor[0] + step * dx, anchor[1] + step * dy))

        visit(tree, (0.0, 0.0))
        return anchors

    def group_search(self, member_ids, k: int):
        return group_search(member_ids, k, self.index)

    def validate(self) -> dict:
        problems = self.store.validate()
        stored = {d.document_id for d in self.store.documents()}
        stored.update(e.entity_id for e in self.store.entities())
        indexed = set(self.index.ids())
        for missing in sorted(stored - indexed):
            problems.append(f"{missing}: stored but not indexed")
        for orphan in sorted(indexed - stored):
            problems.append(f"{orphan}: indexed but not stored")
        return {
            "ok": not problems,
            "problems": problems,
            "documents": len(self.store.documents()),
            "entities": len(self.store.entities()),
            "indexed": len(self.index),
        }


# -- request bodies ----------------------------------------------------------


class DocumentIn(BaseModel):
    title: str = ""
    url: str = ""
    text: str


class MapIn(BaseModel):
    name: str


class EntityIn(BaseModel):
    text: str
    coordinates: tuple[float, float] = (0.0, 0.0)
    parentEntityId: str | None = None


class EntityPatch(BaseModel):
    text: str | None = None
    coordinates: tuple[float, float] | None = None
    parentEntityId: str | None = None


class TreeIn(BaseModel):
    nodeId: str
    text: str
    children: list["TreeIn"] = Field(default_factory=list)
    anchor: tuple[float, float] | None = None

    def to_node(self) -> EntityTreeNode:
        return EntityTreeNode(
            node_id=self.nodeId,
            text=self.text,
            children=[child.to_node() for child in self.children],
            anchor=self.anchor,
        )


TreeIn.model_rebuild()


class SearchParamsIn(BaseModel):
    root_breadth: int = 256
    per_node_k: int = 20
    kind_filter: Literal["document", "entity"] | None = None


class QueryIn(BaseModel):
    mapId: str
    tree: TreeIn
    params: SearchParamsIn = SearchParamsIn()
    target_clusters: int | None = Field(default=None, ge=1)
    radius: float = Field(default=DEFAULT_RADIUS, gt=0)


class GroupSearchIn(BaseModel):
    memberIds: list[str]
    k: int = Field(default=20, ge=1)


class EmbedIn(BaseModel):
    texts: list[str]


class MenuSelectIn(BaseModel):
    mapId: str


_STATUS_BY_ERROR = [
    (UnknownIdError, 404),
    (CycleDetectedError, 409),
    (CrossMapLinkError, 409),
    (DuplicateIdError, 409),
    (RemoteUnavailableError, 502),
    (EmptyTextError, 400),
    (InvalidTreeError, 400),
    (OutOfRangeError, 400),
    (DegenerateCentroidError, 400),
    (DimensionMismatchError, 400),
    (TooFewPointsError, 400),
]


def _status_for(error: EngineError) -> int:
    for error_type, status in _STATUS_BY_ERROR:
        if isinstance(error, error_type):
            return status
    return 400


def create_app(engine: Engine, cors_origins: tuple[str, ...] = ()) -> FastAPI:
    app = FastAPI(title="corpusmap", version="0.1.0")
    app.state.engine = engine
    if cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(cors_origins),
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.middleware("http")
    async def stamp_seed(request: Request, call_next):
        response = await call_next(request)
        response.headers["X-Engine-Seed"] = str(engine.seed)
        return response

    @app.exception_handler(EngineError)
    async def engine_error_handler(request: Request, error: EngineError):
        return JSONResponse(
            status_code=_status_for(error),
            content={"detail": str(error)},
            headers={"X-Engine-Seed": str(engine.seed)},
        )

    @app.exception_handler(ValueError)
    async def value_error_handler(request: Request, error: ValueError):
        return JSONResponse(
            status_code=400,
            content={"detail": str(error)},
            headers={"X-Engine-Seed": str(engine.seed)},
        )

    @app.post("/documents", status_code=201)
    def add_document(body: DocumentIn):
        return engine.add_document(body.title, body.url, body.text).to_dict()

    @app.get("/documents/{document_id}")
    def get_document(document_id: str):
        return engine.store.get_document(document_id).to_dict()

    @app.post("/maps", status_code=201)
    def create_map(body: MapIn):
        return engine.store.create_map(body.name).to_dict()

    @app.get("/maps")
    def list_maps():
        return {"maps": [m.to_dict() for m in engine.store.maps()]}

    @app.get("/maps/{map_id}")
    def get_map(map_id: str):
        record, entities = engine.store.get_map(map_id)
        payload = record.to_dict()
        payload["entities"] = [e.to_dict() for e in entities]
        return payload

    @app.post("/maps/{map_id}/entities", status_code=201)
    def create_entity(map_id: str, body: EntityIn):
        record = engine.create_entity(map_id, body.text, body.coordinates, body.parentEntityId)
        return record.to_dict()

    @app.patch("/entities/{entity_id}")
    def patch_entity(entity_id: str, body: EntityPatch):
        if body.coordinates is not None:
            engine.store.move_entity(entity_id, body.coordinates)
        if body.text is not None:
            engine.retext_entity(entity_id, body.text)
        if "parentEntityId" in body.model_fields_set:
            if body.parentEntityId is None:
                engine.store.detach(entity_id)
            else:
                engine.store.attach_child(body.parentEntityId, entity_id)
        return engine.store.get_entity(entity_id).to_dict()

    @app.delete("/entities/{entity_id}")
    def delete_entity(entity_id: str):
        engine.delete_entity(entity_id)
        return {"deleted": entity_id}

    @app.post("/group-search")
    def group_search_endpoint(body: GroupSearchIn):
        hits = engine.group_search(body.memberIds, body.k)
        return {"hits": [{"itemId": h.item_id, "score": h.score} for h in hits]}

    @app.post("/query")
    def query(body: QueryIn):
        params = ContextSearchParams(
            root_breadth=body.params.root_breadth,
            per_node_k=body.params.per_node_k,
            kind_filter=body.params.kind_filter,
        )
        return engine.query(
            body.mapId,
            body.tree.to_node(),
            params,
            target_clusters=body.target_clusters,
            radius=body.radius,
        )

    @app.post("/embed")
    def embed(body: EmbedIn):
        vectors = engine.embedder.embed_batch(body.texts)
        return {
            "dimension": engine.config.dimension,
            "vectors": [v.tolist() for v in vectors],
        }

    @app.get("/menu")
    def menu():
        return engine.store.menu().to_dict()

    @app.post("/menu/select")
    def select_map(body: MenuSelectIn):
        return engine.store.select_map(body.mapId).to_dict()

    @app.get("/debug/validate")
    def validate():
        report = engine.validate()
        status = 200 if report["ok"] else 500
        return JSONResponse(status_code=status, content=report)

    return app
