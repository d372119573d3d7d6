"""Hyperparameter sweep runner over the translation pipeline knobs."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..gateway.pricing import PriceTable
from ..kql.schema import SchemaCatalog
from ..pipeline.config import PipelineConfig
from ..pipeline.translate import Backends, Stores
from .harness import MetricsReport, evaluate_dataset

# Sweep knob names map onto config fields.
KNOB_FIELDS = {
    "n_candidates": "n_candidates",
    "temperature": "generator_temperature",
    "t": "t",
    "f": "f",
    "prompt_variant": "prompt_variant",
    "oracle_mode": "oracle_mode",
}


@dataclass
class SweepPoint:
    tag: str
    params: dict
    report: MetricsReport | None = None
    error: str | None = None


def run_sweep(
    grid: dict[str, list],
    base_config: PipelineConfig,
    dataset: list[dict],
    stores: Stores,
    schema: SchemaCatalog,
    backends: Backends,
    prices: PriceTable | None = None,
    embedder=None,
    workers: int = 1,
) -> list[SweepPoint]:
    """One report per grid point.

    Iteration order is deterministic: knob names lexicographically, values
    in the given order. Per-point failures are recorded and the sweep
    continues.
    """
    if not grid:
        raise ValueError("grid must be non-empty")
    unknown = set(grid) - set(KNOB_FIELDS)
    if unknown:
        raise ValueError(f"unknown sweep knobs: {sorted(unknown)}")
    knobs = sorted(grid)
    points = []
    for values in itertools.product(*(grid[k] for k in knobs)):
        params = dict(zip(knobs, values))
        tag = ",".join(f"{k}={params[k]}" for k in knobs)
        overrides = {KNOB_FIELDS[k]: v for k, v in params.items()}
        point = SweepPoint(tag=tag, params=params)
        try:
            config = base_config.with_overrides(**overrides)
            point.report = evaluate_dataset(
                dataset, config, stores, schema, backends,
                prices=prices, embedder=embedder, workers=workers, tag=tag,
            )
        except Exception as exc:  # noqa: BLE001 - the sweep must finish
            point.error = f"{type(exc).__name__}: {exc}"
        points.append(point)
    return points
