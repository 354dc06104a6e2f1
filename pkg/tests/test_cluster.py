import numpy as np
import pytest

from corpusmap import KnowledgeStore, LayoutPoint, cut_dendrogram, label_cluster, linkage_fit
from corpusmap.errors import OutOfRangeError, UnknownIdError


def as_points(coords, prefix="p"):
    return [LayoutPoint(f"{prefix}{i}", float(x), float(y)) for i, (x, y) in enumerate(coords)]


def naive_upgma(coords):
    """Reference average linkage: cluster distances recomputed from raw
    leaf-pair distances at every step, same (smaller, larger) tie-break."""
    n = len(coords)
    leaf_dist = np.array(
        [[float(np.linalg.norm(np.subtract(a, b))) for b in coords] for a in coords]
    )
    members = {i: [i] for i in range(n)}
    merges = []
    next_id = n
    while len(members) > 1:
        best = None
        ids = sorted(members)
        for pos, a in enumerate(ids):
            for b in ids[pos + 1 :]:
                distance = leaf_dist[np.ix_(members[a], members[b])].mean()
                candidate = (distance, (a, b))
                if best is None or candidate < best:
                    best = candidate
        distance, (a, b) = best
        merges.append((a, b, distance, next_id))
        members[next_id] = members.pop(a) + members.pop(b)
        next_id += 1
    return merges


def partition_of(cut):
    return {frozenset(c.member_ids) for c in cut.clusters}


def test_single_leaf():
    d = linkage_fit(as_points([(1.0, 2.0)]))
    assert d.leaves == ["p0"]
    assert d.merges == []
    cut = cut_dendrogram(d, 1)
    assert cut.clusters[0].member_ids == ["p0"]


def test_collinear_hand_computed():
    """Points at x = 0, 1, 10: merge (0,1) at 1.0, then at (10+9)/2 = 9.5."""
    d = linkage_fit(as_points([(0.0, 0.0), (1.0, 0.0), (10.0, 0.0)]))
    assert [(m.left, m.right, m.new_id) for m in d.merges] == [(0, 1, 3), (2, 3, 4)]
    assert abs(d.merges[0].height - 1.0) < 1e-12
    assert abs(d.merges[1].height - 9.5) < 1e-12
    cut = cut_dendrogram(d, 2)
    assert partition_of(cut) == {frozenset({"p0", "p1"}), frozenset({"p2"})}


def test_matches_naive_oracle_small_instances():
    rng = np.random.default_rng(0)
    for _ in range(60):
        n = int(rng.integers(2, 13))
        coords = rng.uniform(-5, 5, size=(n, 2))
        got = linkage_fit(as_points(coords)).merges
        expected = naive_upgma(coords)
        assert [(m.left, m.right, m.new_id) for m in got] == [
            (a, b, new_id) for a, b, _, new_id in expected
        ]
        for merge, (_, _, height, _) in zip(got, expected):
            assert abs(merge.height - height) < 1e-9


def test_heights_non_decreasing():
    rng = np.random.default_rng(1)
    for _ in range(20):
        coords = rng.uniform(-10, 10, size=(int(rng.integers(2, 40)), 2))
        merges = linkage_fit(as_points(coords)).merges
        heights = [m.height for m in merges]
        assert all(a <= b + 1e-12 for a, b in zip(heights, heights[1:]))


def test_cuts_nest():
    rng = np.random.default_rng(2)
    coords = rng.uniform(-10, 10, size=(20, 2))
    d = linkage_fit(as_points(coords))
    for coarse in range(1, 20):
        for fine in range(coarse + 1, 21):
            coarse_sets = partition_of(cut_dendrogram(d, coarse))
            for cluster in partition_of(cut_dendrogram(d, fine)):
                assert sum(cluster <= parent for parent in coarse_sets) == 1


def test_partition_is_input_order_invariant():
    rng = np.random.default_rng(3)
    coords = rng.uniform(-10, 10, size=(12, 2))
    d = linkage_fit(as_points(coords))
    order = rng.permutation(12)
    shuffled = [LayoutPoint(f"p{i}", *coords[i]) for i in order]
    d_shuffled = linkage_fit(shuffled)
    for target in range(1, 13):
        assert partition_of(cut_dendrogram(d, target)) == partition_of(
            cut_dendrogram(d_shuffled, target)
        )


def test_cut_extremes_and_centroids():
    coords = [(0.0, 0.0), (2.0, 0.0), (0.0, 2.0), (2.0, 2.0)]
    d = linkage_fit(as_points(coords))
    whole = cut_dendrogram(d, 1)
    assert len(whole.clusters) == 1
    assert sorted(whole.clusters[0].member_ids) == ["p0", "p1", "p2", "p3"]
    assert whole.clusters[0].centroid == (1.0, 1.0)
    singletons = cut_dendrogram(d, 4)
    assert len(singletons.clusters) == 4
    with pytest.raises(OutOfRangeError):
        cut_dendrogram(d, 0)
    with pytest.raises(OutOfRangeError):
        cut_dendrogram(d, 5)


# -- labeling --------------------------------------------------------------


@pytest.fixture
def toy_store():
    store = KnowledgeStore()
    texts = [
        "value investing principles",
        "growth investing strategies",
        "value stocks and dividends",
        "zebra migration patterns",
        "zebra herds in savanna",
        "savanna wildlife research",
    ]
    for i, text in enumerate(texts):
        store.add_document(title=f"d{i}", url="", text=text)
    return store


def brute_force_label(store, member_ids):
    import re
    from collections import Counter

    def tokens(text):
        return [t for t in re.findall(r"[a-z0-9]+", text.lower()) if len(t) >= 3]

    tf = Counter(t for m in member_ids for t in tokens(store.get_text(m)))
    df = Counter()
    for _, text in store.all_texts():
        df.update(set(tokens(text)))
    ranked = sorted(tf, key=lambda t: (-tf[t] / df[t], t))
    return " · ".join(ranked[:3])


def test_single_entity_label_contains_its_tokens(toy_store):
    label = label_cluster(["doc-1"], toy_store)
    assert "value" in label and "investing" in label


def test_disjoint_vocabularies_give_disjoint_labels(toy_store):
    finance = label_cluster(["doc-1", "doc-2", "doc-3"], toy_store)
    animals = label_cluster(["doc-4", "doc-5"], toy_store)
    assert set(finance.split(" · ")).isdisjoint(animals.split(" · "))


def test_labels_match_brute_force_formula(toy_store):
    for member_ids in (["doc-1"], ["doc-1", "doc-3"], ["doc-4", "doc-5", "doc-6"]):
        assert label_cluster(member_ids, toy_store) == brute_force_label(toy_store, member_ids)


def test_label_unknown_member(toy_store):
    with pytest.raises(UnknownIdError):
        label_cluster(["doc-99"], toy_store)
