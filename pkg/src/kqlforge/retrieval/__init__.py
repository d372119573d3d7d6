"""Embedding providers, persisted stores, and cosine top-k retrieval."""

from .catalog import (
    FewShotSelection,
    SchemaSlice,
    SliceTable,
    build_example_store,
    build_table_store,
    build_value_store,
    refine_schema,
    select_few_shots,
)
from .embedder import Embedding, HttpEmbedder, OfflineHashEmbedder, cosine, split_words
from .store import CatalogEntry, EmbeddingStore, RetrievalResult

__all__ = [
    "CatalogEntry",
    "Embedding",
    "EmbeddingStore",
    "FewShotSelection",
    "HttpEmbedder",
    "OfflineHashEmbedder",
    "RetrievalResult",
    "SchemaSlice",
    "SliceTable",
    "build_example_store",
    "build_table_store",
    "build_value_store",
    "cosine",
    "refine_schema",
    "select_few_shots",
    "split_words",
]
