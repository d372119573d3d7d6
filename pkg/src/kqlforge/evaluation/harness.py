"""Dataset-level evaluation: per-record scoring and aggregate reporting."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ..gateway.pricing import PriceTable, cost_of
from ..kql import analyze, strip_model_decorations
from ..kql.diagnostics import SEMANTIC, SYNTAX, Diagnostic, classify_diagnostics
from ..kql.schema import SchemaCatalog
from ..pipeline.config import PipelineConfig
from ..pipeline.translate import Backends, Stores, translate
from .metrics import score_filter, score_semantic, score_syntax, score_table, shape_of


@dataclass
class EvalRecord:
    nlq: str
    gold_kql: str
    generated_kql: str = ""
    syntax: int = 0
    semantic: int = 0
    table_score: float = 0.0
    filter_col: float = 0.0
    filter_lit: float = 0.0
    latency_seconds: float = 0.0
    cost_usd: float = 0.0
    diagnostics: list[Diagnostic] = field(default_factory=list)
    gold_unparsed: bool = False
    gen_unparsed: bool = False
    error: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "nlq": self.nlq,
            "gold_kql": self.gold_kql,
            "generated_kql": self.generated_kql,
            "syntax": self.syntax,
            "semantic": self.semantic,
            "table_score": self.table_score,
            "filter_col": self.filter_col,
            "filter_lit": self.filter_lit,
            "latency_seconds": self.latency_seconds,
            "cost_usd": self.cost_usd,
            "diagnostics": [d.to_json_dict() for d in self.diagnostics],
            "gold_unparsed": self.gold_unparsed,
            "gen_unparsed": self.gen_unparsed,
            "error": self.error,
        }


@dataclass
class MetricsReport:
    config: dict
    records: list[EvalRecord]
    summary: dict
    taxonomy: dict
    tag: str = ""
    iterations: list[dict] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        data = {
            "config": self.config,
            "records": [r.to_json_dict() for r in self.records],
            "summary": self.summary,
            "taxonomy": self.taxonomy,
        }
        if self.tag:
            data["tag"] = self.tag
        if len(self.iterations) > 1:
            data["iterations"] = self.iterations
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"

    def to_text_table(self) -> str:
        """Aligned single-row summary table in the standard column order."""
        headers = ["Syntax", "Semantic", "Table", "Filter_col", "Filter_lit", "Latency", "Avg. Cost"]
        row = [
            f"{self.summary['syntax']:.3f}",
            f"{self.summary['semantic']:.3f}",
            f"{self.summary['table']:.3f}",
            f"{self.summary['filter_col']:.3f}",
            f"{self.summary['filter_lit']:.3f}",
            f"{self.summary['mean_latency_s']:.3f}",
            f"${self.summary['total_cost_usd']:.4f}",
        ]
        widths = [max(len(h), len(v)) for h, v in zip(headers, row)]
        head = "  ".join(h.ljust(w) for h, w in zip(headers, widths))
        body = "  ".join(v.ljust(w) for v, w in zip(row, widths))
        rule = "-" * len(head)
        return "\n".join([head, rule, body]) + "\n"


def evaluate_pair(
    pair: dict,
    config: PipelineConfig,
    stores: Stores,
    schema: SchemaCatalog,
    backends: Backends,
    prices: PriceTable,
    embedder=None,
) -> EvalRecord:
    record = EvalRecord(nlq=pair["nlq"], gold_kql=pair["kql"])
    try:
        final, trace = translate(pair["nlq"], config, stores, schema, backends, embedder)
    except Exception as exc:  # noqa: BLE001 - per-record isolation is the contract
        record.error = f"{type(exc).__name__}: {exc}"
        return record
    record.generated_kql = final
    record.syntax = score_syntax(final)
    record.semantic = score_semantic(final, schema)

    gold_shape, record.gold_unparsed = shape_of(
        pair["kql"], config.case_sensitive_literals
    )
    gen_shape, record.gen_unparsed = shape_of(final, config.case_sensitive_literals)
    record.table_score = score_table(gold_shape, gen_shape)
    record.filter_col = score_filter(gold_shape.filter_columns, gen_shape.filter_columns)
    record.filter_lit = score_filter(gold_shape.filter_literals, gen_shape.filter_literals)

    record.latency_seconds = trace.latency_seconds()
    record.cost_usd = cost_of(trace.usage, prices)
    _, diags = analyze(strip_model_decorations(final), schema)
    record.diagnostics = list(diags)
    return record


def evaluate_dataset(
    dataset: list[dict],
    config: PipelineConfig,
    stores: Stores,
    schema: SchemaCatalog,
    backends: Backends,
    prices: PriceTable | None = None,
    embedder=None,
    workers: int = 1,
    tag: str = "",
) -> MetricsReport:
    """Translate and score every pair; failures are flagged, never fatal."""
    if not dataset:
        raise ValueError("dataset must be non-empty")
    prices = prices or PriceTable()

    iteration_summaries = []
    records: list[EvalRecord] = []
    for _ in range(max(1, config.iterations)):
        records = _evaluate_once(dataset, config, stores, schema, backends, prices, embedder, workers)
        iteration_summaries.append(_summarize(records))

    summary = _mean_of_summaries(iteration_summaries)
    taxonomy = _taxonomy(records)
    return MetricsReport(
        config=config.to_json_dict(),
        records=records,
        summary=summary,
        taxonomy=taxonomy,
        tag=tag,
        iterations=iteration_summaries,
    )


def _evaluate_once(dataset, config, stores, schema, backends, prices, embedder, workers):
    if workers <= 1:
        return [
            evaluate_pair(pair, config, stores, schema, backends, prices, embedder)
            for pair in dataset
        ]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(evaluate_pair, pair, config, stores, schema, backends, prices, embedder)
            for pair in dataset
        ]
        return [future.result() for future in futures]


def _summarize(records: list[EvalRecord]) -> dict:
    n = len(records)
    return {
        "syntax": sum(r.syntax for r in records) / n,
        "semantic": sum(r.semantic for r in records) / n,
        "table": sum(r.table_score for r in records) / n,
        "filter_col": sum(r.filter_col for r in records) / n,
        "filter_lit": sum(r.filter_lit for r in records) / n,
        "mean_latency_s": sum(r.latency_seconds for r in records) / n,
        "total_cost_usd": sum(r.cost_usd for r in records),
        "records": n,
        "failures": sum(1 for r in records if r.error is not None),
    }


def _mean_of_summaries(summaries: list[dict]) -> dict:
    if len(summaries) == 1:
        return summaries[0]
    keys = ("syntax", "semantic", "table", "filter_col", "filter_lit", "mean_latency_s", "total_cost_usd")
    merged = {k: sum(s[k] for s in summaries) / len(summaries) for k in keys}
    merged["records"] = summaries[0]["records"]
    merged["failures"] = max(s["failures"] for s in summaries)
    merged["iterations"] = len(summaries)
    return merged


def _taxonomy(records: list[EvalRecord]) -> dict:
    syntax_diags = [d for r in records for d in r.diagnostics if d.severity == SYNTAX]
    semantic_diags = [d for r in records for d in r.diagnostics if d.severity == SEMANTIC]
    return {
        "syntax": dict(sorted(classify_diagnostics(syntax_diags).items())),
        "semantic": dict(sorted(classify_diagnostics(semantic_diags).items())),
    }
