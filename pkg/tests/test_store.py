from __future__ import annotations

import math
import random

import pytest

from kqlforge.errors import ConfigurationError
from kqlforge.retrieval import CatalogEntry, Embedding, EmbeddingStore


def make_entry(entry_id: str, values, provider="t", kind="table") -> CatalogEntry:
    payload = {"table": entry_id, "columns": []}
    if kind == "example":
        payload = {"nlq": entry_id, "kql": "T | take 1", "theme": "Explore"}
    return CatalogEntry(
        id=entry_id,
        kind=kind,
        text=entry_id,
        payload=payload,
        vector=Embedding(values=tuple(values), provider_id=provider),
    )


def random_store(rng: random.Random, size: int, dims: int = 8) -> EmbeddingStore:
    store = EmbeddingStore("random")
    for i in range(size):
        values = [rng.uniform(-1, 1) for _ in range(dims)]
        if all(abs(v) < 1e-12 for v in values):
            values[0] = 1.0
        store.add(make_entry(f"doc{i:03d}", values))
    return store


def brute_force_ids(store: EmbeddingStore, query: Embedding, k: int) -> list[str]:
    # Independent oracle: full scan with a hand-rolled cosine and the
    # documented (-score, id) tie rule.
    def cos(a, b):
        dot = sum(x * y for x, y in zip(a, b))
        na = math.sqrt(sum(x * x for x in a))
        nb = math.sqrt(sum(y * y for y in b))
        return dot / (na * nb)

    scored = [(cos(e.vector.values, query.values), e.id) for e in store.entries]
    scored.sort(key=lambda pair: (-pair[0], pair[1]))
    return [doc_id for _, doc_id in scored[:k]]


def test_undersized_store_returns_everything():
    store = EmbeddingStore("one")
    store.add(make_entry("only", [1.0, 0.0]))
    result = store.top_k(Embedding(values=(0.5, 0.5), provider_id="t"), k=5)
    assert result.ids() == ["only"]
    assert result.k_requested == 5


def test_k_equal_to_store_size_is_total_ordering():
    store = EmbeddingStore("three")
    store.add(make_entry("a", [1.0, 0.0]))
    store.add(make_entry("b", [0.0, 1.0]))
    store.add(make_entry("c", [1.0, 1.0]))
    result = store.top_k(Embedding(values=(1.0, 0.0), provider_id="t"), k=3)
    assert result.ids() == ["a", "c", "b"]
    scores = [score for _, score in result.entries]
    assert scores == sorted(scores, reverse=True)


def test_ties_break_by_ascending_id():
    store = EmbeddingStore("ties")
    store.add(make_entry("zeta", [1.0, 0.0]))
    store.add(make_entry("alpha", [2.0, 0.0]))  # same direction, same cosine
    result = store.top_k(Embedding(values=(1.0, 0.0), provider_id="t"), k=2)
    assert result.ids() == ["alpha", "zeta"]


def test_top_k_matches_brute_force_on_200_random_stores():
    rng = random.Random(1234)
    for _ in range(200):
        store = random_store(rng, size=rng.randint(1, 50))
        query = Embedding(
            values=tuple(rng.uniform(-1, 1) for _ in range(8)), provider_id="t"
        )
        if all(abs(v) < 1e-12 for v in query.values):
            continue
        k = rng.randint(1, 9)
        assert store.top_k(query, k).ids() == brute_force_ids(store, query, k)


def test_positive_scaling_leaves_ranking_unchanged():
    rng = random.Random(99)
    for _ in range(50):
        store = random_store(rng, size=20)
        base = tuple(rng.uniform(-1, 1) for _ in range(8))
        for scale in (0.5, 2.0, 1000.0):
            original = store.top_k(Embedding(values=base, provider_id="t"), k=20).ids()
            scaled_vec = Embedding(values=tuple(scale * v for v in base), provider_id="t")
            assert store.top_k(scaled_vec, k=20).ids() == original


def test_zero_vector_rejected_at_insert():
    store = EmbeddingStore("z")
    with pytest.raises(ValueError):
        store.add(make_entry("zero", [0.0, 0.0]))


def test_duplicate_id_rejected():
    store = EmbeddingStore("d")
    store.add(make_entry("x", [1.0, 0.0]))
    with pytest.raises(ValueError):
        store.add(make_entry("x", [0.0, 1.0]))


def test_mixed_dims_and_providers_rejected():
    store = EmbeddingStore("m")
    store.add(make_entry("x", [1.0, 0.0]))
    with pytest.raises(ConfigurationError):
        store.add(make_entry("y", [1.0, 0.0, 0.0]))
    with pytest.raises(ConfigurationError):
        store.add(make_entry("z", [0.0, 1.0], provider="other"))


def test_empty_store_top_k_errors():
    store = EmbeddingStore("e")
    with pytest.raises(ValueError):
        store.top_k(Embedding(values=(1.0,), provider_id="t"), k=1)


def test_persistence_round_trip(tmp_path):
    rng = random.Random(5)
    store = random_store(rng, size=12)
    path = tmp_path / "store.ejsonl"
    store.save(path)
    loaded = EmbeddingStore.load(path)
    assert len(loaded) == len(store)
    for original, reloaded in zip(store.entries, loaded.entries):
        assert reloaded.id == original.id
        assert reloaded.payload == original.payload
        assert reloaded.vector.provider_id == original.vector.provider_id
        for a, b in zip(original.vector.values, reloaded.vector.values):
            assert abs(a - b) <= 1e-12


def test_example_theme_validated():
    store = EmbeddingStore("fsdb")
    entry = CatalogEntry(
        id="bad",
        kind="example",
        text="q",
        payload={"nlq": "q", "kql": "T", "theme": "NotATheme"},
        vector=Embedding(values=(1.0,), provider_id="t"),
    )
    with pytest.raises(ValueError):
        store.add(entry)
