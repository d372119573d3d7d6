from __future__ import annotations

from pathlib import Path

import pytest

from kqlforge.kql import SchemaCatalog
from kqlforge.pipeline import Stores, load_dataset
from kqlforge.retrieval import EmbeddingStore, OfflineHashEmbedder

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "fixtures"
GOLDEN_PROMPTS = Path(__file__).resolve().parent / "data" / "golden_prompts"

LISTING_1 = """DeviceNetworkEvents
| where Timestamp >= ago(7d)
| where ActionType == 'ConnectionSuccess'
| summarize arg_max(Timestamp, LocalIP) by DeviceId
| where LocalIP == "89.12.55.1"
| project DeviceId"""

LISTING_2 = """EmailEvents
| where Timestamp between(datetime(" 2022-10-05T20:54:33Z") .. datetime("2022-10-05T21:05:12Z"))
| where ThreatTypes has "Phish"
| where EmailActionPolicy != "Anti-phishing user impersonation\""""

LISTING_3 = """EmailEvents
| where Timestamp between (datetime(2022-10-05 20:54:33) .. datetime(2022-10-05 21:05:12))
| where has_any(ThreatTypes, "Phish", "Phishing")
| project Timestamp, NetworkMessageId, SenderMailFromAddress, RecipientEmailAddress, Subject, ThreatTypes, DetectionMethods"""


@pytest.fixture(scope="session")
def schema() -> SchemaCatalog:
    return SchemaCatalog.load(FIXTURES / "defender_schema.json")


@pytest.fixture(scope="session")
def dataset() -> list[dict]:
    return load_dataset(FIXTURES / "defender_eval_20.jsonl")


@pytest.fixture(scope="session")
def fsdb_examples() -> list[dict]:
    return load_dataset(FIXTURES / "fsdb_examples.jsonl")


@pytest.fixture(scope="session")
def embedder() -> OfflineHashEmbedder:
    return OfflineHashEmbedder()


@pytest.fixture(scope="session")
def stores() -> Stores:
    return Stores(
        tables=EmbeddingStore.load(FIXTURES / "stores" / "tables.ejsonl", "tables"),
        values=EmbeddingStore.load(FIXTURES / "stores" / "values.ejsonl", "values"),
        fsdb=EmbeddingStore.load(FIXTURES / "stores" / "fsdb.ejsonl", "fsdb"),
    )


@pytest.fixture()
def gold_queries(dataset) -> list[str]:
    return [pair["kql"] for pair in dataset]
