"""Persistent store for maps, entities, and documents.

Entities on one map form a forest: each entity has at most one parent, parent
and child always reference each other symmetrically, and links never cross
maps. Every mutation validates first, then applies, then appends one
self-describing JSON line to the store log; reopening a store replays the
snapshot plus log through the same application code, so a reopened store is
state-equivalent to the one that wrote it. The log is compacted into a full
snapshot every ``snapshot_every`` mutations.

Ids are monotonic per-type counters ("map-1", "ent-7", "doc-3") and are never
reused, even after deletion.
"""

from __future__ import annotations

import dataclasses
import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .errors import CrossMapLinkError, CycleDetectedError, EmptyTextError, UnknownIdError

LOG_NAME = "store.log"
SNAPSHOT_NAME = "store.snapshot.json"


@dataclass
class MapRecord:
    map_id: str
    name: str
    entity_ids: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"mapId": self.map_id, "name": self.name, "entityIds": list(self.entity_ids)}


@dataclass
class EntityRecord:
    entity_id: str
    map_id: str
    parent_entity_id: str | None
    children_entity_ids: list[str]
    coordinates: tuple[float, float]
    text: str

    def to_dict(self) -> dict:
        return {
            "entityId": self.entity_id,
            "mapId": self.map_id,
            "parentEntityId": self.parent_entity_id,
            "childrenEntityIds": list(self.children_entity_ids),
            "coordinates": [self.coordinates[0], self.coordinates[1]],
            "text": self.text,
        }


@dataclass
class DocumentRecord:
    document_id: str
    title: str
    url: str
    text: str

    def to_dict(self) -> dict:
        return {
            "documentId": self.document_id,
            "title": self.title,
            "url": self.url,
            "text": self.text,
        }


@dataclass
class MenuState:
    selected_map_id: str | None = None

    def to_dict(self) -> dict:
        return {"selectedMapId": self.selected_map_id}


def _copy_entity(entity: EntityRecord) -> EntityRecord:
    return dataclasses.replace(entity, children_entity_ids=list(entity.children_entity_ids))


class KnowledgeStore:
    """Single-writer store; mutations are serialized, reads see committed state."""

    def __init__(self, data_dir=None, index=None, snapshot_every: int = 1000):
        self._lock = threading.RLock()
        self._index = index
        self._snapshot_every = snapshot_every
        self._maps: dict[str, MapRecord] = {}
        self._entities: dict[str, EntityRecord] = {}
        self._documents: dict[str, DocumentRecord] = {}
        self._menu = MenuState()
        self._counters = {"map": 0, "ent": 0, "doc": 0}
        self._log_count = 0
        self._log_handle = None
        self._data_dir = Path(data_dir) if data_dir is not None else None
        if self._data_dir is not None:
            self._data_dir.mkdir(parents=True, exist_ok=True)
            self._load_from_disk()
            self._log_handle = open(self._data_dir / LOG_NAME, "a", encoding="utf-8")

    # -- lifecycle ---------------------------------------------------------

    def _load_from_disk(self) -> None:
        snapshot_path = self._data_dir / SNAPSHOT_NAME
        if snapshot_path.exists():
            self._restore_state(json.loads(snapshot_path.read_text(encoding="utf-8")))
        log_path = self._data_dir / LOG_NAME
        if log_path.exists():
            with open(log_path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        self._apply(json.loads(line))
                        self._log_count += 1

    def close(self) -> None:
        with self._lock:
            if self._log_handle is not None:
                self._log_handle.flush()
                os.fsync(self._log_handle.fileno())
                self._log_handle.close()
                self._log_handle = None

    def __enter__(self) -> "KnowledgeStore":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    # -- persistence -------------------------------------------------------

    def _record(self, op: dict) -> None:
        """Apply a validated mutation and append it to the log."""
        self._apply(op)
        if self._log_handle is None:
            return
        self._log_handle.write(json.dumps(op, ensure_ascii=False) + "\n")
        self._log_handle.flush()
        self._log_count += 1
        if self._log_count >= self._snapshot_every:
            self._compact()

    def _compact(self) -> None:
        self.write_snapshot()
        self._log_handle.close()
        self._log_handle = open(self._data_dir / LOG_NAME, "w", encoding="utf-8")
        self._log_count = 0

    def write_snapshot(self) -> None:
        tmp_path = self._data_dir / (SNAPSHOT_NAME + ".tmp")
        with open(tmp_path, "w", encoding="utf-8") as fh:
            json.dump(self.dump_state(), fh, ensure_ascii=False)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp_path, self._data_dir / SNAPSHOT_NAME)

    def dump_state(self) -> dict:
        """Canonical state dict; equal dicts mean state-equivalent stores."""
        with self._lock:
            return {
                "counters": dict(self._counters),
                "menu": self._menu.to_dict(),
                "maps": [m.to_dict() for m in self._maps.values()],
                "entities": [e.to_dict() for e in self._entities.values()],
                "documents": [d.to_dict() for d in self._documents.values()],
            }

    def _restore_state(self, state: dict) -> None:
        self._counters = dict(state["counters"])
        self._menu = MenuState(state["menu"]["selectedMapId"])
        self._maps = {
            m["mapId"]: MapRecord(m["mapId"], m["name"], list(m["entityIds"]))
            for m in state["maps"]
        }
        self._entities = {
            e["entityId"]: EntityRecord(
                e["entityId"],
                e["mapId"],
                e["parentEntityId"],
                list(e["childrenEntityIds"]),
                (e["coordinates"][0], e["coordinates"][1]),
                e["text"],
            )
            for e in state["entities"]
        }
        self._documents = {
            d["documentId"]: DocumentRecord(d["documentId"], d["title"], d["url"], d["text"])
            for d in state["documents"]
        }

    # -- id generation -----------------------------------------------------

    def _next_id(self, prefix: str) -> str:
        self._counters[prefix] += 1
        return f"{prefix}-{self._counters[prefix]}"

    def _bump_counter(self, item_id: str) -> None:
        prefix, _, number = item_id.rpartition("-")
        self._counters[prefix] = max(self._counters[prefix], int(number))

    # -- mutation application (shared by live calls and log replay) --------

    def _apply(self, op: dict) -> None:
        handler = getattr(self, "_apply_" + op["op"])
        handler(op)

    def _apply_create_map(self, op: dict) -> None:
        self._bump_counter(op["mapId"])
        self._maps[op["mapId"]] = MapRecord(op["mapId"], op["name"])

    def _apply_create_entity(self, op: dict) -> None:
        self._bump_counter(op["entityId"])
        entity = EntityRecord(
            entity_id=op["entityId"],
            map_id=op["mapId"],
            parent_entity_id=None,
            children_entity_ids=[],
            coordinates=(op["coordinates"][0], op["coordinates"][1]),
            text=op["text"],
        )
        self._entities[entity.entity_id] = entity
        self._maps[entity.map_id].entity_ids.append(entity.entity_id)
        if op.get("parentEntityId"):
            self._link(op["parentEntityId"], entity.entity_id)

    def _apply_attach_child(self, op: dict) -> None:
        self._unlink(op["childId"])
        self._link(op["parentId"], op["childId"])

    def _apply_detach(self, op: dict) -> None:
        self._unlink(op["childId"])

    def _apply_delete_entity(self, op: dict) -> None:
        entity = self._entities.pop(op["entityId"])
        parent_id = entity.parent_entity_id
        children = list(entity.children_entity_ids)
        if parent_id is not None:
            parent = self._entities[parent_id]
            slot = parent.children_entity_ids.index(entity.entity_id)
            parent.children_entity_ids[slot : slot + 1] = children
        for child_id in children:
            self._entities[child_id].parent_entity_id = parent_id
        self._maps[entity.map_id].entity_ids.remove(entity.entity_id)
        if self._index is not None and entity.entity_id in self._index:
            self._index.remove(entity.entity_id)

    def _apply_add_document(self, op: dict) -> None:
        self._bump_counter(op["documentId"])
        self._documents[op["documentId"]] = DocumentRecord(
            op["documentId"], op["title"], op["url"], op["text"]
        )

    def _apply_select_map(self, op: dict) -> None:
        self._menu.selected_map_id = op["mapId"]

    def _apply_move_entity(self, op: dict) -> None:
        self._entities[op["entityId"]].coordinates = (
            op["coordinates"][0],
            op["coordinates"][1],
        )

    def _apply_retext_entity(self, op: dict) -> None:
        self._entities[op["entityId"]].text = op["text"]

    def _link(self, parent_id: str, child_id: str) -> None:
        self._entities[parent_id].children_entity_ids.append(child_id)
        self._entities[child_id].parent_entity_id = parent_id

    def _unlink(self, child_id: str) -> None:
        child = self._entities[child_id]
        if child.parent_entity_id is None:
            return
        self._entities[child.parent_entity_id].children_entity_ids.remove(child_id)
        child.parent_entity_id = None

    # -- validation helpers --------------------------------------------------

    def _require_map(self, map_id: str) -> MapRecord:
        record = self._maps.get(map_id)
        if record is None:
            raise UnknownIdError(f"unknown map id {map_id!r}")
        return record

    def _require_entity(self, entity_id: str) -> EntityRecord:
        record = self._entities.get(entity_id)
        if record is None:
            raise UnknownIdError(f"unknown entity id {entity_id!r}")
        return record

    def _is_ancestor(self, candidate_id: str, entity_id: str) -> bool:
        """True when candidate_id is entity_id itself or one of its ancestors."""
        current: str | None = entity_id
        while current is not None:
            if current == candidate_id:
                return True
            current = self._entities[current].parent_entity_id
        return False

    # -- public operations ---------------------------------------------------

    def create_map(self, name: str) -> MapRecord:
        if not name:
            raise ValueError("map name must be non-empty")
        with self._lock:
            map_id = self._next_id("map")
            self._record({"op": "create_map", "mapId": map_id, "name": name})
            return dataclasses.replace(self._maps[map_id], entity_ids=[])

    def create_entity(
        self,
        map_id: str,
        text: str,
        coordinates: tuple[float, float],
        parent_entity_id: str | None = None,
    ) -> EntityRecord:
        if not text.strip():
            raise EmptyTextError("entity text must be non-empty")
        with self._lock:
            self._require_map(map_id)
            if parent_entity_id is not None:
                parent = self._require_entity(parent_entity_id)
                if parent.map_id != map_id:
                    raise CrossMapLinkError(
                        f"parent {parent_entity_id!r} is on map {parent.map_id!r}, not {map_id!r}"
                    )
            entity_id = self._next_id("ent")
            self._record(
                {
                    "op": "create_entity",
                    "entityId": entity_id,
                    "mapId": map_id,
                    "text": text,
                    "coordinates": [float(coordinates[0]), float(coordinates[1])],
                    "parentEntityId": parent_entity_id,
                }
            )
            return _copy_entity(self._entities[entity_id])

    def attach_child(self, parent_id: str, child_id: str) -> None:
        """Link child under parent, detaching it from any previous parent."""
        with self._lock:
            parent = self._require_entity(parent_id)
            child = self._require_entity(child_id)
            if parent.map_id != child.map_id:
                raise CrossMapLinkError(
                    f"{parent_id!r} and {child_id!r} are on different maps"
                )
            if self._is_ancestor(child_id, parent_id):
                raise CycleDetectedError(
                    f"attaching {child_id!r} under {parent_id!r} would create a cycle"
                )
            self._record({"op": "attach_child", "parentId": parent_id, "childId": child_id})

    def detach(self, child_id: str) -> None:
        """Make child a root; a no-op when it already is one."""
        with self._lock:
            self._require_entity(child_id)
            self._record({"op": "detach", "childId": child_id})

    def delete_entity(self, entity_id: str) -> None:
        """Remove the entity, reparenting its children to its own parent."""
        with self._lock:
            self._require_entity(entity_id)
            self._record({"op": "delete_entity", "entityId": entity_id})

    def add_document(self, title: str, url: str, text: str) -> DocumentRecord:
        if not text.strip():
            raise EmptyTextError("document text must be non-empty")
        with self._lock:
            document_id = self._next_id("doc")
            self._record(
                {
                    "op": "add_document",
                    "documentId": document_id,
                    "title": title,
                    "url": url,
                    "text": text,
                }
            )
            return dataclasses.replace(self._documents[document_id])

    def move_entity(self, entity_id: str, coordinates: tuple[float, float]) -> EntityRecord:
        with self._lock:
            self._require_entity(entity_id)
            self._record(
                {
                    "op": "move_entity",
                    "entityId": entity_id,
                    "coordinates": [float(coordinates[0]), float(coordinates[1])],
                }
            )
            return _copy_entity(self._entities[entity_id])

    def retext_entity(self, entity_id: str, text: str) -> EntityRecord:
        if not text.strip():
            raise EmptyTextError("entity text must be non-empty")
        with self._lock:
            self._require_entity(entity_id)
            self._record({"op": "retext_entity", "entityId": entity_id, "text": text})
            return _copy_entity(self._entities[entity_id])

    def select_map(self, map_id: str) -> MenuState:
        with self._lock:
            self._require_map(map_id)
            self._record({"op": "select_map", "mapId": map_id})
            return MenuState(self._menu.selected_map_id)

    # -- read operations -----------------------------------------------------

    def menu(self) -> MenuState:
        with self._lock:
            return MenuState(self._menu.selected_map_id)

    def maps(self) -> list[MapRecord]:
        with self._lock:
            return [dataclasses.replace(m, entity_ids=list(m.entity_ids)) for m in self._maps.values()]

    def get_map(self, map_id: str) -> tuple[MapRecord, list[EntityRecord]]:
        with self._lock:
            record = self._require_map(map_id)
            entities = [_copy_entity(self._entities[eid]) for eid in record.entity_ids]
            return dataclasses.replace(record, entity_ids=list(record.entity_ids)), entities

    def get_entity(self, entity_id: str) -> EntityRecord:
        with self._lock:
            return _copy_entity(self._require_entity(entity_id))

    def get_document(self, document_id: str) -> DocumentRecord:
        with self._lock:
            record = self._documents.get(document_id)
            if record is None:
                raise UnknownIdError(f"unknown document id {document_id!r}")
            return dataclasses.replace(record)

    def documents(self) -> list[DocumentRecord]:
        with self._lock:
            return [dataclasses.replace(d) for d in self._documents.values()]

    def entities(self) -> list[EntityRecord]:
        with self._lock:
            return [_copy_entity(e) for e in self._entities.values()]

    def get_text(self, item_id: str) -> str:
        """Text of a document or entity, whichever the id resolves to."""
        with self._lock:
            if item_id in self._documents:
                return self._documents[item_id].text
            if item_id in self._entities:
                return self._entities[item_id].text
            raise UnknownIdError(f"unknown item id {item_id!r}")

    def all_texts(self) -> Iterator[tuple[str, str]]:
        """(item id, text) for every document and entity in the store."""
        with self._lock:
            pairs = [(d.document_id, d.text) for d in self._documents.values()]
            pairs.extend((e.entity_id, e.text) for e in self._entities.values())
        return iter(pairs)

    # -- integrity -----------------------------------------------------------

    def validate(self) -> list[str]:
        """Full-graph referential integrity walk; returns found problems."""
        problems: list[str] = []
        with self._lock:
            if self._menu.selected_map_id is not None and self._menu.selected_map_id not in self._maps:
                problems.append(f"menu selects unknown map {self._menu.selected_map_id!r}")
            for map_record in self._maps.values():
                if len(set(map_record.entity_ids)) != len(map_record.entity_ids):
                    problems.append(f"{map_record.map_id}: duplicate entity ids")
                for entity_id in map_record.entity_ids:
                    entity = self._entities.get(entity_id)
                    if entity is None:
                        problems.append(f"{map_record.map_id}: lists missing entity {entity_id}")
                    elif entity.map_id != map_record.map_id:
                        problems.append(f"{entity_id}: map mismatch")
            for entity in self._entities.values():
                if entity.map_id not in self._maps:
                    problems.append(f"{entity.entity_id}: unknown map {entity.map_id}")
                elif entity.entity_id not in self._maps[entity.map_id].entity_ids:
                    problems.append(f"{entity.entity_id}: not listed on its map")
                if not entity.text.strip():
                    problems.append(f"{entity.entity_id}: empty text")
                if entity.parent_entity_id is not None:
                    parent = self._entities.get(entity.parent_entity_id)
                    if parent is None:
                        problems.append(f"{entity.entity_id}: missing parent")
                    else:
                        if entity.entity_id not in parent.children_entity_ids:
                            problems.append(f"{entity.entity_id}: parent does not list it")
                        if parent.map_id != entity.map_id:
                            problems.append(f"{entity.entity_id}: cross-map parent link")
                for child_id in entity.children_entity_ids:
                    child = self._entities.get(child_id)
                    if child is None:
                        problems.append(f"{entity.entity_id}: missing child {child_id}")
                    elif child.parent_entity_id != entity.entity_id:
                        problems.append(f"{entity.entity_id}: child {child_id} disagrees on parent")
            problems.extend(self._find_cycles())
        return problems

    def _find_cycles(self) -> list[str]:
        problems = []
        for entity_id in self._entities:
            seen = set()
            current: str | None = entity_id
            while current is not None:
                if current in seen:
                    problems.append(f"cycle through {current}")
                    break
                seen.add(current)
                parent = self._entities.get(current)
                current = parent.parent_entity_id if parent is not None else None
        return problems
