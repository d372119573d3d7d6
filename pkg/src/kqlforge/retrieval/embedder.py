"""Embedding providers: a deterministic offline embedder and an HTTP client.

The offline embedder feature-hashes lowercased word n-grams into a fixed
256-dimensional vector and L2-normalizes it. It is the default everywhere
so that retrieval, tests, and fixtures need no network access and produce
identical vectors on every platform.
"""

from __future__ import annotations

import hashlib
import re
import threading
import time
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, RetryExhaustedError, TransportError

OFFLINE_DIMS = 256
OFFLINE_PROVIDER_ID = "offline-hash-256"

_CHUNK = re.compile(r"[A-Za-z0-9]+")
_WORD_PARTS = re.compile(r"[A-Z]+(?![a-z])|[A-Z][a-z]*|[a-z]+|[0-9]+")


@dataclass(frozen=True)
class Embedding:
    """A fixed-length vector tagged with the provider that produced it."""

    values: tuple[float, ...]
    provider_id: str

    @property
    def dims(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


def cosine(a: Embedding, b: Embedding) -> float:
    """Cosine similarity of two non-zero vectors of equal dimensionality."""
    if a.dims != b.dims:
        raise ConfigurationError(f"dimension mismatch: {a.dims} vs {b.dims}")
    va, vb = a.as_array(), b.as_array()
    norm_a = float(np.linalg.norm(va))
    norm_b = float(np.linalg.norm(vb))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ValueError("cosine is undefined for a zero vector")
    value = float(np.dot(va, vb)) / (norm_a * norm_b)
    return max(-1.0, min(1.0, value))


def split_words(text: str) -> list[str]:
    """Lowercased word parts; CamelCase, underscores, and digit runs split.

    'DeviceNetworkEvents' and 'device_network_events' yield the same words,
    which is what makes embedding-based identifier repair work.
    """
    words: list[str] = []
    for chunk in _CHUNK.findall(text):
        words.extend(part.lower() for part in _WORD_PARTS.findall(chunk))
    return words


class OfflineHashEmbedder:
    """Deterministic feature-hashing embedder over word unigrams and bigrams."""

    provider_id = OFFLINE_PROVIDER_ID
    dims = OFFLINE_DIMS

    def embed(self, texts: list[str]) -> list[Embedding]:
        if not texts:
            raise ValueError("texts must be non-empty")
        return [self._embed_one(text) for text in texts]

    def embed_one(self, text: str) -> Embedding:
        return self._embed_one(text)

    def _embed_one(self, text: str) -> Embedding:
        words = split_words(text)
        if not words:
            raise ValueError(f"text {text!r} yields no hashable features")
        vector = np.zeros(self.dims, dtype=np.float64)
        for gram in _ngrams(words):
            vector[bucket_of(gram, self.dims)] += 1.0
        vector /= np.linalg.norm(vector)
        return Embedding(values=tuple(float(x) for x in vector), provider_id=self.provider_id)


def _ngrams(words: list[str]):
    yield from words
    for i in range(len(words) - 1):
        yield words[i] + " " + words[i + 1]


def bucket_of(gram: str, dims: int = OFFLINE_DIMS) -> int:
    """Stable hash bucket for one n-gram (md5-based, platform independent)."""
    digest = hashlib.md5(gram.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % dims


class HttpEmbedder:
    """Embeddings from a JSON-over-HTTP endpoint, with retry and a
    max-in-flight cap. Opt-in via configuration; never used by tests."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        dims: int,
        api_key: str | None = None,
        max_attempts: int = 3,
        backoff_base: float = 0.5,
        max_in_flight: int = 4,
        transport=None,
    ):
        self.endpoint = endpoint
        self.model = model
        self.dims = dims
        self.provider_id = model
        self.api_key = api_key
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self._gate = threading.BoundedSemaphore(max_in_flight)
        self._transport = transport or self._post

    def _post(self, payload: dict) -> dict:
        import requests

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            response = requests.post(self.endpoint, json=payload, headers=headers, timeout=60)
        except requests.RequestException as exc:
            raise TransportError(str(exc)) from exc
        if response.status_code >= 500:
            raise TransportError(f"server error {response.status_code}")
        response.raise_for_status()
        return response.json()

    def embed(self, texts: list[str]) -> list[Embedding]:
        if not texts:
            raise ValueError("texts must be non-empty")
        attempt = 0
        last_error: Exception | None = None
        while attempt < self.max_attempts:
            attempt += 1
            try:
                with self._gate:
                    data = self._transport({"model": self.model, "input": texts})
                break
            except TransportError as exc:
                last_error = exc
                if attempt >= self.max_attempts:
                    raise RetryExhaustedError(attempts=attempt, cause=exc)
                time.sleep(self.backoff_base * (2 ** (attempt - 1)))
        vectors = [row["embedding"] for row in data["data"]]
        embeddings = []
        for vec in vectors:
            if len(vec) != self.dims:
                raise ConfigurationError(
                    f"provider returned {len(vec)} dims, expected {self.dims}"
                )
            embeddings.append(Embedding(values=tuple(float(x) for x in vec), provider_id=self.provider_id))
        return embeddings

    def embed_one(self, text: str) -> Embedding:
        return self.embed([text])[0]
