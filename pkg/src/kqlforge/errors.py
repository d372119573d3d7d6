"""Shared exception types."""

from __future__ import annotations


class KqlForgeError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(KqlForgeError):
    """Invalid or inconsistent configuration."""


class TransportError(KqlForgeError):
    """A transient transport failure; safe to retry."""


class AuthenticationError(KqlForgeError):
    """Authentication rejected by a provider; not retryable."""


class RetryExhaustedError(KqlForgeError):
    """All retry attempts failed."""

    def __init__(self, attempts: int, cause: Exception):
        super().__init__(f"gave up after {attempts} attempts: {cause}")
        self.attempts = attempts
        self.cause = cause


class UnrecordedRequestError(KqlForgeError):
    """A replay lookup missed; names the missing fixture key."""

    def __init__(self, model_id: str, prompt_sha256: str, temperature: float):
        super().__init__(
            "no recorded response for key "
            f"(model={model_id!r}, prompt_sha256={prompt_sha256!r}, temperature={temperature!r})"
        )
        self.key = (model_id, prompt_sha256, temperature)


class UnpricedModelError(KqlForgeError):
    """A model id has no entry in the price table."""


class EmptySynthesisError(KqlForgeError):
    """Dataset synthesis produced no valid examples."""
