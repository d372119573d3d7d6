"""Per-model token pricing and cost aggregation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import UnpricedModelError
from .backends import CompletionResponse


@dataclass(frozen=True)
class Price:
    input_usd_per_million: float
    output_usd_per_million: float


# USD per one million input / output tokens.
DEFAULT_PRICES: dict[str, Price] = {
    "gpt-5": Price(1.25, 10.00),
    "gpt-4o": Price(2.50, 10.00),
    "gemini-2.0-flash": Price(0.10, 0.40),
    "phi-4": Price(0.075, 0.30),
    "qwen-2.5-7b-instruct-1m": Price(0.15, 0.15),
    "phi-4-mini": Price(0.15, 0.15),
    "deepseek-coder-6.7b-instruct": Price(0.15, 0.15),
    "gemma-3-4b-it": Price(0.15, 0.15),
    "gemma-3-1b-it": Price(0.10, 0.10),
}


@dataclass
class PriceTable:
    prices: dict[str, Price] = field(default_factory=lambda: dict(DEFAULT_PRICES))

    def lookup(self, model_id: str) -> Price:
        price = self.prices.get(model_id)
        if price is None:
            raise UnpricedModelError(f"no price entry for model {model_id!r}")
        return price

    @classmethod
    def load(cls, path: str | Path) -> "PriceTable":
        with open(path, encoding="utf-8") as handle:
            raw = json.load(handle)
        prices = {
            model: Price(float(spec["input_usd_per_million"]), float(spec["output_usd_per_million"]))
            for model, spec in raw.items()
        }
        for price in prices.values():
            if price.input_usd_per_million < 0 or price.output_usd_per_million < 0:
                raise ValueError("prices must be non-negative")
        return cls(prices=prices)

    def to_json_dict(self) -> dict:
        return {
            model: {
                "input_usd_per_million": p.input_usd_per_million,
                "output_usd_per_million": p.output_usd_per_million,
            }
            for model, p in self.prices.items()
        }


def cost_of(usage: list[CompletionResponse], prices: PriceTable) -> float:
    """Total USD for a list of responses, priced per model."""
    total = 0.0
    for response in usage:
        price = prices.lookup(response.model_id)
        total += response.input_tokens * price.input_usd_per_million / 1e6
        total += response.output_tokens * price.output_usd_per_million / 1e6
    return total
