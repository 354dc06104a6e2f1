import numpy as np
import pytest

from corpusmap import IndexedItem, KnowledgeStore, VectorIndex
from corpusmap.errors import (
    CrossMapLinkError,
    CycleDetectedError,
    EmptyTextError,
    UnknownIdError,
)


def check_state(state: dict) -> list[str]:
    """Independent invariant validator working on the serialized state dict."""
    problems = []
    maps = {m["mapId"]: m for m in state["maps"]}
    entities = {e["entityId"]: e for e in state["entities"]}
    selected = state["menu"]["selectedMapId"]
    if selected is not None and selected not in maps:
        problems.append("menu selects missing map")
    for map_record in maps.values():
        listed = map_record["entityIds"]
        if len(set(listed)) != len(listed):
            problems.append("duplicate entity listing")
        for entity_id in listed:
            if entity_id not in entities:
                problems.append("map lists missing entity")
            elif entities[entity_id]["mapId"] != map_record["mapId"]:
                problems.append("entity/map disagreement")
    for entity in entities.values():
        if entity["entityId"] not in maps.get(entity["mapId"], {"entityIds": []})["entityIds"]:
            problems.append("entity not listed on its map")
        parent_id = entity["parentEntityId"]
        if parent_id is not None:
            parent = entities.get(parent_id)
            if parent is None:
                problems.append("missing parent")
            else:
                if entity["entityId"] not in parent["childrenEntityIds"]:
                    problems.append("parent/child asymmetry (down)")
                if parent["mapId"] != entity["mapId"]:
                    problems.append("cross-map link")
        for child_id in entity["childrenEntityIds"]:
            child = entities.get(child_id)
            if child is None or child["parentEntityId"] != entity["entityId"]:
                problems.append("parent/child asymmetry (up)")
        # forest: walking up must terminate without revisiting
        seen = set()
        current = entity["entityId"]
        while current is not None:
            if current in seen:
                problems.append("cycle")
                break
            seen.add(current)
            current = entities[current]["parentEntityId"] if current in entities else None
    return problems


def test_create_map_and_get():
    store = KnowledgeStore()
    record = store.create_map("research")
    fetched, entities = store.get_map(record.map_id)
    assert fetched.name == "research"
    assert fetched.entity_ids == []
    assert entities == []


def test_duplicate_map_names_allowed():
    store = KnowledgeStore()
    a = store.create_map("same")
    b = store.create_map("same")
    assert a.map_id != b.map_id


def test_create_entity_with_parent_is_atomic():
    store = KnowledgeStore()
    m = store.create_map("m")
    parent = store.create_entity(m.map_id, "root topic", (0.0, 0.0))
    child = store.create_entity(m.map_id, "sub topic", (1.0, 1.0), parent.entity_id)
    assert child.parent_entity_id == parent.entity_id
    assert store.get_entity(parent.entity_id).children_entity_ids == [child.entity_id]
    assert store.validate() == []


def test_two_cycle_rejected():
    store = KnowledgeStore()
    m = store.create_map("m")
    a = store.create_entity(m.map_id, "a", (0, 0))
    b = store.create_entity(m.map_id, "b", (1, 0))
    store.attach_child(a.entity_id, b.entity_id)
    with pytest.raises(CycleDetectedError):
        store.attach_child(b.entity_id, a.entity_id)
    with pytest.raises(CycleDetectedError):
        store.attach_child(a.entity_id, a.entity_id)


def test_deep_cycle_rejected():
    store = KnowledgeStore()
    m = store.create_map("m")
    ids = [store.create_entity(m.map_id, f"e{i}", (i, 0)).entity_id for i in range(4)]
    for parent, child in zip(ids, ids[1:]):
        store.attach_child(parent, child)
    with pytest.raises(CycleDetectedError):
        store.attach_child(ids[3], ids[0])


def test_cross_map_link_rejected():
    store = KnowledgeStore()
    m1 = store.create_map("m1")
    m2 = store.create_map("m2")
    a = store.create_entity(m1.map_id, "a", (0, 0))
    b = store.create_entity(m2.map_id, "b", (0, 0))
    with pytest.raises(CrossMapLinkError):
        store.attach_child(a.entity_id, b.entity_id)
    with pytest.raises(CrossMapLinkError):
        store.create_entity(m2.map_id, "c", (0, 0), parent_entity_id=a.entity_id)


def test_attach_moves_between_parents():
    store = KnowledgeStore()
    m = store.create_map("m")
    p1 = store.create_entity(m.map_id, "p1", (0, 0))
    p2 = store.create_entity(m.map_id, "p2", (1, 0))
    c = store.create_entity(m.map_id, "c", (2, 0), p1.entity_id)
    store.attach_child(p2.entity_id, c.entity_id)
    assert store.get_entity(p1.entity_id).children_entity_ids == []
    assert store.get_entity(p2.entity_id).children_entity_ids == [c.entity_id]
    assert store.get_entity(c.entity_id).parent_entity_id == p2.entity_id
    assert store.validate() == []


def test_detach_makes_root_and_is_idempotent():
    store = KnowledgeStore()
    m = store.create_map("m")
    p = store.create_entity(m.map_id, "p", (0, 0))
    c = store.create_entity(m.map_id, "c", (1, 0), p.entity_id)
    store.detach(c.entity_id)
    assert store.get_entity(c.entity_id).parent_entity_id is None
    store.detach(c.entity_id)  # already a root: no-op
    assert store.validate() == []


def test_delete_reparents_children():
    store = KnowledgeStore()
    m = store.create_map("m")
    grandparent = store.create_entity(m.map_id, "g", (0, 0))
    parent = store.create_entity(m.map_id, "p", (1, 0), grandparent.entity_id)
    c1 = store.create_entity(m.map_id, "c1", (2, 0), parent.entity_id)
    c2 = store.create_entity(m.map_id, "c2", (3, 0), parent.entity_id)
    store.delete_entity(parent.entity_id)
    assert store.get_entity(grandparent.entity_id).children_entity_ids == [
        c1.entity_id,
        c2.entity_id,
    ]
    assert store.get_entity(c1.entity_id).parent_entity_id == grandparent.entity_id
    with pytest.raises(UnknownIdError):
        store.get_entity(parent.entity_id)
    _, entities = store.get_map(m.map_id)
    assert parent.entity_id not in [e.entity_id for e in entities]
    assert store.validate() == []


def test_delete_root_children_become_roots():
    store = KnowledgeStore()
    m = store.create_map("m")
    root = store.create_entity(m.map_id, "root", (0, 0))
    child = store.create_entity(m.map_id, "child", (1, 0), root.entity_id)
    store.delete_entity(root.entity_id)
    assert store.get_entity(child.entity_id).parent_entity_id is None
    assert store.validate() == []


def test_delete_removes_index_vector():
    index = VectorIndex(4)
    store = KnowledgeStore(index=index)
    m = store.create_map("m")
    e = store.create_entity(m.map_id, "hello", (0, 0))
    index.add(IndexedItem(e.entity_id, "entity", np.array([1.0, 0, 0, 0])))
    store.delete_entity(e.entity_id)
    assert e.entity_id not in index


def test_documents():
    store = KnowledgeStore()
    doc = store.add_document("Title", "https://x", "body text")
    assert store.get_document(doc.document_id).text == "body text"
    assert store.get_text(doc.document_id) == "body text"
    with pytest.raises(EmptyTextError):
        store.add_document("t", "u", "   ")


def test_text_validation():
    store = KnowledgeStore()
    m = store.create_map("m")
    with pytest.raises(EmptyTextError):
        store.create_entity(m.map_id, " ", (0, 0))
    with pytest.raises(ValueError):
        store.create_map("")


def test_menu_select():
    store = KnowledgeStore()
    with pytest.raises(UnknownIdError):
        store.select_map("map-1")
    m = store.create_map("m")
    state = store.select_map(m.map_id)
    assert state.selected_map_id == m.map_id
    assert store.menu().selected_map_id == m.map_id


def test_ids_are_monotonic_and_never_reused():
    store = KnowledgeStore()
    m = store.create_map("m")
    first = store.create_entity(m.map_id, "one", (0, 0))
    store.delete_entity(first.entity_id)
    second = store.create_entity(m.map_id, "two", (0, 0))
    assert second.entity_id != first.entity_id


def test_unknown_ids():
    store = KnowledgeStore()
    with pytest.raises(UnknownIdError):
        store.get_map("map-9")
    with pytest.raises(UnknownIdError):
        store.attach_child("ent-1", "ent-2")
    with pytest.raises(UnknownIdError):
        store.delete_entity("ent-1")
    with pytest.raises(UnknownIdError):
        store.get_text("doc-5")


def run_random_mutations(store, rng, steps, check_every_step=True):
    """Drive the store with a random op mix, validating after each op."""
    map_ids = []
    entity_ids = []

    def random_entity():
        return entity_ids[int(rng.integers(0, len(entity_ids)))]

    for step in range(steps):
        op = rng.random()
        try:
            if not map_ids or op < 0.05:
                map_ids.append(store.create_map(f"map {step}").map_id)
            elif op < 0.40 or not entity_ids:
                map_id = map_ids[int(rng.integers(0, len(map_ids)))]
                parent = None
                if entity_ids and rng.random() < 0.5:
                    candidate = random_entity()
                    if store.get_entity(candidate).map_id == map_id:
                        parent = candidate
                record = store.create_entity(
                    map_id, f"entity {step}", tuple(rng.uniform(-10, 10, 2)), parent
                )
                entity_ids.append(record.entity_id)
            elif op < 0.55:
                store.attach_child(random_entity(), random_entity())
            elif op < 0.65:
                store.detach(random_entity())
            elif op < 0.85:
                victim = random_entity()
                store.delete_entity(victim)
                entity_ids.remove(victim)
            elif op < 0.92:
                store.move_entity(random_entity(), tuple(rng.uniform(-10, 10, 2)))
            elif op < 0.97:
                store.retext_entity(random_entity(), f"renamed {step}")
            else:
                store.add_document(f"doc {step}", "", f"document body {step}")
        except (CycleDetectedError, CrossMapLinkError):
            pass  # expected rejections for random attach choices
        if check_every_step:
            problems = check_state(store.dump_state())
            assert problems == [], f"step {step}: {problems}"
    return entity_ids


def test_random_mutation_fuzz_small():
    rng = np.random.default_rng(99)
    store = KnowledgeStore()
    run_random_mutations(store, rng, steps=200)
    assert store.validate() == []


# -- persistence -----------------------------------------------------------


def test_round_trip_state_equivalent(tmp_path):
    rng = np.random.default_rng(5)
    with KnowledgeStore(tmp_path) as store:
        run_random_mutations(store, rng, steps=60, check_every_step=False)
        before = store.dump_state()
    with KnowledgeStore(tmp_path) as reopened:
        assert reopened.dump_state() == before


def test_snapshot_bytes_round_trip(tmp_path):
    with KnowledgeStore(tmp_path) as store:
        m = store.create_map("m")
        store.create_entity(m.map_id, "hello world", (1.5, -2.25))
        store.add_document("T", "u", "doc body")
        store.write_snapshot()
        first = (tmp_path / "store.snapshot.json").read_bytes()
    with KnowledgeStore(tmp_path) as reopened:
        reopened.write_snapshot()
        assert (tmp_path / "store.snapshot.json").read_bytes() == first


def test_compaction_preserves_state(tmp_path):
    rng = np.random.default_rng(6)
    with KnowledgeStore(tmp_path, snapshot_every=5) as store:
        run_random_mutations(store, rng, steps=23, check_every_step=False)
        before = store.dump_state()
    assert (tmp_path / "store.snapshot.json").exists()
    with KnowledgeStore(tmp_path, snapshot_every=5) as reopened:
        assert reopened.dump_state() == before
        assert reopened.validate() == []


def test_counters_survive_reopen(tmp_path):
    with KnowledgeStore(tmp_path) as store:
        m = store.create_map("m")
        e = store.create_entity(m.map_id, "x", (0, 0))
        store.delete_entity(e.entity_id)
    with KnowledgeStore(tmp_path) as reopened:
        fresh = reopened.create_entity(m.map_id, "y", (0, 0))
        assert fresh.entity_id != e.entity_id
