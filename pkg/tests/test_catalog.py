from __future__ import annotations

import math

from kqlforge.retrieval import (
    build_example_store,
    build_table_store,
    build_value_store,
    refine_schema,
    select_few_shots,
)
from kqlforge.retrieval.catalog import _references_only


def test_table_store_documents(schema, embedder):
    store = build_table_store(schema, embedder)
    assert len(store) == len(schema.tables)
    entry = next(e for e in store.entries if e.id == "EmailEvents")
    assert entry.text.startswith("EmailEvents: Timestamp, NetworkMessageId")
    assert entry.payload["columns"][0] == {"name": "Timestamp", "type": "datetime"}


def test_value_store_documents(schema, embedder):
    store = build_value_store(schema, embedder)
    entry = next(e for e in store.entries if e.payload["literal"] == "Phish")
    assert entry.text == "EmailEvents.ThreatTypes = Phish"


def test_refine_schema_cardinality_t1(stores, embedder):
    schema_slice = refine_schema(
        "phishing emails", stores.tables, stores.values, embedder, t=1, v=5
    )
    assert len(schema_slice.tables) == 1
    # Full column list comes along with the selected table.
    table = schema_slice.tables[0]
    assert len(table.columns) >= 4


def test_refine_schema_values_capped(stores, embedder):
    schema_slice = refine_schema(
        "phishing emails delivered to inboxes",
        stores.tables, stores.values, embedder, t=9, v=5, include_values=True,
    )
    assert len(schema_slice.tables) <= 9
    for table in schema_slice.tables:
        assert len(table.values) <= 5


def test_refine_schema_omits_values_when_disabled(stores, embedder):
    schema_slice = refine_schema(
        "phishing emails", stores.tables, stores.values, embedder,
        t=5, v=5, include_values=False,
    )
    assert len(schema_slice.tables) == 5
    assert all(table.values == () for table in schema_slice.tables)
    assert schema_slice.render_values() == ""


def test_email_query_retrieves_email_table(stores, embedder):
    schema_slice = refine_schema(
        "list phishing email threat types and senders",
        stores.tables, stores.values, embedder, t=3, v=0, include_values=False,
    )
    assert "EmailEvents" in schema_slice.table_names()


def test_select_few_shots_full_pool(fsdb_examples, embedder):
    store = build_example_store(fsdb_examples[:2], embedder)
    selection = select_few_shots(
        "anything at all", store, {"DeviceNetworkEvents", "DeviceProcessEvents"}, embedder, f=2
    )
    assert len(selection.examples) == 2
    assert not selection.used_fallback


def test_select_few_shots_fallback_when_filter_empties():
    # 3-example fixture ranked by hand: the allowed-tables filter removes
    # everything, so the unfiltered top-f comes back flagged.
    examples = [
        {"nlq": "count alerts by severity", "kql": "AlertInfo | summarize c = count() by Severity"},
        {"nlq": "list alert titles", "kql": "AlertInfo | project Title"},
        {"nlq": "recent alerts", "kql": "AlertInfo | where Timestamp >= ago(1d)"},
    ]
    from kqlforge.retrieval import OfflineHashEmbedder

    embedder = OfflineHashEmbedder()
    store = build_example_store(examples, embedder)
    selection = select_few_shots("count alerts by severity", store, {"EmailEvents"}, embedder, f=2)
    assert selection.used_fallback
    assert len(selection.examples) == 2
    assert selection.examples[0][0] == "count alerts by severity"


def test_select_few_shots_matches_brute_force(fsdb_examples, embedder, stores):
    # Brute-force oracle: filter -> sort by (-cosine, id) -> take f.
    nlq = "report alert volume by severity for the week"
    allowed = {"AlertInfo", "EmailEvents", "DeviceNetworkEvents"}
    selection = select_few_shots(nlq, stores.fsdb, allowed, embedder, f=2)

    def cos(a, b):
        dot = sum(x * y for x, y in zip(a, b))
        return dot / (
            math.sqrt(sum(x * x for x in a)) * math.sqrt(sum(y * y for y in b))
        )

    query_vec = embedder.embed_one(nlq).values
    candidates = []
    for entry in stores.fsdb.entries:
        if not _references_only(entry.payload["kql"], allowed):
            continue
        candidates.append((-cos(entry.vector.values, query_vec), entry.id, entry.payload["nlq"]))
    candidates.sort()
    expected = [nlq_text for _, _, nlq_text in candidates[:2]]
    assert [nlq for nlq, _ in selection.examples] == expected
    assert not selection.used_fallback


def test_select_few_shots_no_duplicates_and_length(stores, embedder):
    allowed = {"DeviceNetworkEvents"}
    pool_size = sum(
        1 for e in stores.fsdb.entries if _references_only(e.payload["kql"], allowed)
    )
    assert pool_size >= 1
    for f in (1, 2, 5, 50):
        selection = select_few_shots("list recent activity", stores.fsdb, allowed, embedder, f=f)
        assert not selection.used_fallback
        assert len(selection.examples) == min(f, pool_size)
        assert len(set(selection.ids)) == len(selection.ids)
