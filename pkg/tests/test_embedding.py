import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpusmap import EmbedderConfig, embed_batch, embed_text
from corpusmap.errors import EmptyTextError, RemoteUnavailableError

CFG = EmbedderConfig()
SMALL = EmbedderConfig(dimension=64)

WORDS = [
    "market", "investing", "strategy", "zebra", "migration", "signal",
    "portfolio", "research", "cluster", "vector", "outline", "topic",
]


def ngram_set(text: str, lo: int = 3, hi: int = 5) -> set[str]:
    collapsed = " ".join(text.lower().split())
    return {
        collapsed[i : i + n]
        for n in range(lo, hi + 1)
        for i in range(len(collapsed) - n + 1)
    }


def test_embed_is_bitwise_deterministic():
    first = embed_text("investing", CFG)
    second = embed_text("investing", CFG)
    assert np.array_equal(first, second)


def test_embed_unit_norm():
    for text in ["investing", "a", "many words in one longer sentence", "Mixed CASE  text"]:
        vector = embed_text(text, CFG)
        assert vector.shape == (CFG.dimension,)
        assert np.all(np.isfinite(vector))
        assert abs(np.linalg.norm(vector) - 1.0) < 1e-6


def test_lexical_similarity_ordering():
    anchor = embed_text("investing", CFG)
    related = embed_text("investing strategies", CFG)
    unrelated = embed_text("zebra migration", CFG)
    assert anchor @ related > anchor @ unrelated


def test_case_and_whitespace_normalization():
    assert np.array_equal(embed_text("Value  Investing", CFG), embed_text("value investing", CFG))


def test_empty_text_rejected():
    with pytest.raises(EmptyTextError):
        embed_text("   \n\t", CFG)


def test_seed_changes_the_space():
    base = embed_text("investing", CFG)
    other = embed_text("investing", EmbedderConfig(seed=7))
    assert not np.array_equal(base, other)


def test_batch_empty():
    assert embed_batch([], CFG) == []


def test_batch_matches_single():
    texts = ["a", "b", "investing strategies"]
    batch = embed_batch(texts, SMALL)
    assert len(batch) == 3
    for text, vector in zip(texts, batch):
        assert np.array_equal(vector, embed_text(text, SMALL))


def test_batch_reports_offending_index():
    with pytest.raises(EmptyTextError) as info:
        embed_batch(["fine", "  ", "also fine"], SMALL)
    assert info.value.index == 1


def test_batch_of_100_unit_norm():
    texts = [f"{WORDS[i % len(WORDS)]} {i}" for i in range(100)]
    batch = embed_batch(texts, SMALL)
    assert len(batch) == 100
    for vector in batch:
        assert abs(np.linalg.norm(vector) - 1.0) < 1e-6


@given(st.permutations(list(range(5))))
@settings(max_examples=20, deadline=None)
def test_batch_permutation_equivariance(order):
    texts = ["alpha beta", "gamma", "delta epsilon", "zeta", "eta theta iota"]
    base = embed_batch(texts, SMALL)
    permuted = embed_batch([texts[i] for i in order], SMALL)
    for out_pos, in_pos in enumerate(order):
        assert np.array_equal(permuted[out_pos], base[in_pos])


def test_config_validation():
    with pytest.raises(ValueError):
        EmbedderConfig(dimension=1)
    with pytest.raises(ValueError):
        EmbedderConfig(ngram_min=5, ngram_max=3)
    with pytest.raises(ValueError):
        EmbedderConfig(backend="quantum")
    with pytest.raises(ValueError):
        EmbedderConfig(backend="remote_service")  # missing URL
    with pytest.raises(ValueError):
        EmbedderConfig(seed=2**64)


def test_ngram_overlap_drives_cosine_ordering():
    """Statistical property: more shared n-grams with A => higher cosine.

    B is a mutated copy of A, C is an unrelated string of the same length;
    the ordering must hold in at least 95% of valid sampled triples.
    """
    rng = np.random.default_rng(12345)
    letters = "abcdefghijklmnopqrstuvwxyz"

    def random_text(length):
        return "".join(rng.choice(list(letters), size=length))

    wins = 0
    total = 0
    while total < 200:
        a = random_text(int(rng.integers(8, 30)))
        b = list(a)
        for _ in range(int(rng.integers(1, max(2, len(a) // 3)))):
            b[int(rng.integers(0, len(b)))] = letters[int(rng.integers(0, 26))]
        b = "".join(b)
        c = random_text(len(b))
        shared_b = len(ngram_set(a) & ngram_set(b))
        shared_c = len(ngram_set(a) & ngram_set(c))
        if shared_b <= shared_c:
            continue
        total += 1
        va, vb, vc = (embed_text(t, SMALL) for t in (a, b, c))
        if va @ vb > va @ vc:
            wins += 1
    assert wins / total >= 0.95


def test_remote_backend_unreachable():
    config = EmbedderConfig(
        backend="remote_service", remote_url="http://127.0.0.1:9", remote_timeout=0.5
    )
    with pytest.raises(RemoteUnavailableError):
        embed_text("investing", config)


def test_remote_backend_still_validates_empty_text():
    config = EmbedderConfig(backend="remote_service", remote_url="http://127.0.0.1:9")
    with pytest.raises(EmptyTextError):
        embed_text(" ", config)
