"""Uniform chat-completion backend layer with token and latency accounting."""

from .backends import (
    LIVE,
    MOCK,
    REPLAY,
    CompletionRequest,
    CompletionResponse,
    LiveBackend,
    MockBackend,
    RecordingBackend,
    ReplayBackend,
    echo_backend,
    prompt_sha256,
)
from .pricing import DEFAULT_PRICES, Price, PriceTable, cost_of

__all__ = [
    "CompletionRequest",
    "CompletionResponse",
    "DEFAULT_PRICES",
    "LIVE",
    "LiveBackend",
    "MOCK",
    "MockBackend",
    "Price",
    "PriceTable",
    "REPLAY",
    "RecordingBackend",
    "ReplayBackend",
    "cost_of",
    "echo_backend",
    "prompt_sha256",
]
