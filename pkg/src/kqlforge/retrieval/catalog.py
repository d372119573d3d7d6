"""Semantic data catalog: store construction, schema refinement, and
few-shot selection."""

from __future__ import annotations

from dataclasses import dataclass

from ..kql import extract_shape, parse
from ..kql.ast import QueryAst
from ..kql.schema import SchemaCatalog
from .embedder import Embedding
from .store import CatalogEntry, EmbeddingStore


def table_document(name: str, columns: list) -> str:
    return f"{name}: " + ", ".join(col.name for col in columns)


def value_document(table: str, column: str, literal: str) -> str:
    return f"{table}.{column} = {literal}"


def build_table_store(schema: SchemaCatalog, embedder) -> EmbeddingStore:
    store = EmbeddingStore("tables")
    for name, columns in schema.tables.items():
        text = table_document(name, columns)
        store.add(
            CatalogEntry(
                id=name,
                kind="table",
                text=text,
                payload={
                    "table": name,
                    "columns": [{"name": c.name, "type": c.type} for c in columns],
                },
                vector=embedder.embed_one(text),
            )
        )
    return store


def build_value_store(schema: SchemaCatalog, embedder) -> EmbeddingStore:
    store = EmbeddingStore("values")
    for (table, column), literals in schema.values.items():
        for index, literal in enumerate(literals):
            text = value_document(table, column, literal)
            store.add(
                CatalogEntry(
                    id=f"{table}.{column}#{index}",
                    kind="value",
                    text=text,
                    payload={"table": table, "column": column, "literal": literal},
                    vector=embedder.embed_one(text),
                )
            )
    return store


def build_example_store(examples: list[dict], embedder) -> EmbeddingStore:
    """Store over few-shot example pairs; the NLQ text is what gets embedded."""
    store = EmbeddingStore("fsdb")
    for index, example in enumerate(examples):
        store.add(
            CatalogEntry(
                id=example.get("id", f"ex{index:04d}"),
                kind="example",
                text=example["nlq"],
                payload={
                    "nlq": example["nlq"],
                    "kql": example["kql"],
                    "theme": example.get("theme", "Explore"),
                },
                vector=embedder.embed_one(example["nlq"]),
            )
        )
    return store


@dataclass(frozen=True)
class SliceTable:
    name: str
    columns: tuple  # of (name, type)
    values: tuple = ()  # of (column, literal)


@dataclass(frozen=True)
class SchemaSlice:
    """The top-t tables (and optionally top-v values each) for one NLQ."""

    tables: tuple  # of SliceTable

    def table_names(self) -> set[str]:
        return {t.name for t in self.tables}

    def render_tables(self) -> str:
        lines = []
        for table in self.tables:
            cols = ", ".join(f"{name}: {ctype}" for name, ctype in table.columns)
            lines.append(f"{table.name}({cols})")
        return "\n".join(lines)

    def render_values(self) -> str:
        lines = []
        for table in self.tables:
            for column, literal in table.values:
                lines.append(value_document(table.name, column, literal))
        return "\n".join(lines)


def refine_schema(
    nlq: str,
    table_store: EmbeddingStore,
    value_store: EmbeddingStore | None,
    embedder,
    t: int,
    v: int = 5,
    include_values: bool = True,
) -> SchemaSlice:
    """Select the top-t tables for ``nlq``, optionally with top-v values each."""
    query_vector = embedder.embed_one(nlq)
    tables = table_store.top_k(query_vector, t)
    slice_tables = []
    for entry, _score in tables.entries:
        values: tuple = ()
        if include_values and value_store is not None and len(value_store):
            values = _top_values_for_table(entry.payload["table"], value_store, query_vector, v)
        slice_tables.append(
            SliceTable(
                name=entry.payload["table"],
                columns=tuple((c["name"], c["type"]) for c in entry.payload["columns"]),
                values=values,
            )
        )
    return SchemaSlice(tables=tuple(slice_tables))


def _top_values_for_table(
    table: str, value_store: EmbeddingStore, query_vector: Embedding, v: int
) -> tuple:
    ranked = value_store.top_k(query_vector, len(value_store))
    picked = []
    for entry, _score in ranked.entries:
        if entry.payload["table"] == table:
            picked.append((entry.payload["column"], entry.payload["literal"]))
            if len(picked) >= v:
                break
    return tuple(picked)


@dataclass(frozen=True)
class FewShotSelection:
    examples: tuple  # of (nlq, kql)
    ids: tuple
    used_fallback: bool


def select_few_shots(
    nlq: str,
    example_store: EmbeddingStore,
    allowed_tables: set[str],
    embedder,
    f: int = 2,
) -> FewShotSelection:
    """Top-f examples by NLQ cosine, restricted to the allowed tables.

    An example qualifies when every table its KQL references is in
    ``allowed_tables``. If the restriction empties the pool the selector
    falls back to the unrestricted ranking and flags it.
    """
    if not len(example_store):
        raise ValueError("example store is empty")
    query_vector = embedder.embed_one(nlq)
    ranked = example_store.top_k(query_vector, len(example_store))
    allowed = [
        (entry, score)
        for entry, score in ranked.entries
        if _references_only(entry.payload["kql"], allowed_tables)
    ]
    used_fallback = not allowed
    pool = list(ranked.entries) if used_fallback else allowed
    picked = pool[: min(f, len(pool))]
    return FewShotSelection(
        examples=tuple((e.payload["nlq"], e.payload["kql"]) for e, _ in picked),
        ids=tuple(e.id for e, _ in picked),
        used_fallback=used_fallback,
    )


def _references_only(kql: str, allowed_tables: set[str]) -> bool:
    parsed = parse(kql)
    if not isinstance(parsed, QueryAst):
        return False
    return set(extract_shape(parsed).tables) <= allowed_tables
