"""Persisted embedding stores with exact cosine top-k retrieval."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError
from .embedder import Embedding

ENTRY_KINDS = ("table", "value", "example")
EXAMPLE_THEMES = ("Explore", "Expansion", "Detect", "Remediate", "Report")


@dataclass(frozen=True)
class CatalogEntry:
    """One embedded document: a table, a sampled value, or an example pair."""

    id: str
    kind: str  # table | value | example
    text: str
    payload: dict
    vector: Embedding

    def to_json_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "text": self.text,
            "payload": self.payload,
            "vector": list(self.vector.values),
            "provider_id": self.vector.provider_id,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "CatalogEntry":
        return cls(
            id=data["id"],
            kind=data["kind"],
            text=data["text"],
            payload=data["payload"],
            vector=Embedding(
                values=tuple(float(x) for x in data["vector"]),
                provider_id=data["provider_id"],
            ),
        )


@dataclass(frozen=True)
class RetrievalResult:
    entries: tuple  # of (CatalogEntry, float) with non-increasing scores
    k_requested: int

    def ids(self) -> list[str]:
        return [entry.id for entry, _ in self.entries]


class EmbeddingStore:
    """Build-then-freeze collection of CatalogEntry rows.

    All vectors share dimensionality and provider id; zero vectors and
    duplicate ids are rejected at insert. After construction the store is
    read-only and safe to share across threads.
    """

    def __init__(self, name: str):
        self.name = name
        self._entries: list[CatalogEntry] = []
        self._ids: set[str] = set()
        self._matrix: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def entries(self) -> list[CatalogEntry]:
        return list(self._entries)

    def add(self, entry: CatalogEntry) -> None:
        if entry.kind not in ENTRY_KINDS:
            raise ValueError(f"unknown entry kind {entry.kind!r}")
        if entry.kind == "example":
            theme = entry.payload.get("theme")
            if theme is not None and theme not in EXAMPLE_THEMES:
                raise ValueError(f"unknown example theme {theme!r}")
        if entry.id in self._ids:
            raise ValueError(f"duplicate entry id {entry.id!r} in store {self.name!r}")
        if self._entries:
            first = self._entries[0].vector
            if entry.vector.dims != first.dims:
                raise ConfigurationError(
                    f"vector dims {entry.vector.dims} != store dims {first.dims}"
                )
            if entry.vector.provider_id != first.provider_id:
                raise ConfigurationError(
                    f"provider {entry.vector.provider_id!r} != store provider "
                    f"{first.provider_id!r}"
                )
        if float(np.linalg.norm(entry.vector.as_array())) == 0.0:
            raise ValueError(f"zero vector rejected for entry {entry.id!r}")
        self._entries.append(entry)
        self._ids.add(entry.id)
        self._matrix = None

    def _ensure_matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = np.stack([e.vector.as_array() for e in self._entries])
        return self._matrix

    def top_k(self, query: Embedding, k: int) -> RetrievalResult:
        """The k highest-cosine entries; ties broken by ascending id."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if not self._entries:
            raise ValueError(f"store {self.name!r} is empty")
        if query.dims != self._entries[0].vector.dims:
            raise ConfigurationError(
                f"query dims {query.dims} != store dims {self._entries[0].vector.dims}"
            )
        q = query.as_array()
        q_norm = float(np.linalg.norm(q))
        if q_norm == 0.0:
            raise ValueError("query vector has zero norm")
        matrix = self._ensure_matrix()
        norms = np.linalg.norm(matrix, axis=1)
        scores = (matrix @ q) / (norms * q_norm)
        order = sorted(range(len(self._entries)), key=lambda i: (-scores[i], self._entries[i].id))
        picked = order[: min(k, len(order))]
        return RetrievalResult(
            entries=tuple((self._entries[i], float(scores[i])) for i in picked),
            k_requested=k,
        )

    def save(self, path: str | Path) -> None:
        lines = [json.dumps(e.to_json_dict(), sort_keys=True) for e in self._entries]
        Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path, name: str | None = None) -> "EmbeddingStore":
        store = cls(name or Path(path).stem)
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    store.add(CatalogEntry.from_json_dict(json.loads(line)))
        return store
