"""End-to-end translation of one NLQ under a pipeline configuration."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..gateway.backends import CompletionRequest, CompletionResponse
from ..kql import analyze, strip_model_decorations
from ..kql.diagnostics import SYNTAX, Diagnostic
from ..kql.schema import SchemaCatalog
from ..prompts import (
    PromptInstance,
    build_alternative,
    build_nl2kql,
    build_oracle,
    build_zero_shot,
)
from ..retrieval.catalog import SchemaSlice, refine_schema, select_few_shots
from ..retrieval.embedder import OfflineHashEmbedder
from ..retrieval.store import EmbeddingStore
from .config import PipelineConfig
from .refiner import Repair, query_refine


@dataclass
class Stores:
    tables: EmbeddingStore | None = None
    values: EmbeddingStore | None = None
    fsdb: EmbeddingStore | None = None

    @classmethod
    def load(cls, config: PipelineConfig) -> "Stores":
        return cls(
            tables=EmbeddingStore.load(config.tables_store_path, "tables")
            if config.tables_store_path
            else None,
            values=EmbeddingStore.load(config.values_store_path, "values")
            if config.values_store_path
            else None,
            fsdb=EmbeddingStore.load(config.fsdb_store_path, "fsdb")
            if config.fsdb_store_path
            else None,
        )


@dataclass
class Backends:
    generator: object
    oracle: object | None = None
    teacher: object | None = None


@dataclass
class TranslationTrace:
    """Append-only audit record of one translation."""

    nlq: str
    mode: str
    schema_tables: list[str] = field(default_factory=list)
    few_shots: list[tuple[str, str]] = field(default_factory=list)
    few_shot_fallback: bool = False
    prompts: list[PromptInstance] = field(default_factory=list)
    raw_candidates: list[str] = field(default_factory=list)
    oracle_raw: str | None = None
    oracle_fallback: bool = False
    final_kql: str = ""
    diagnostics_before: list[Diagnostic] = field(default_factory=list)
    diagnostics_after: list[Diagnostic] = field(default_factory=list)
    repairs: list[Repair] = field(default_factory=list)
    usage: list[CompletionResponse] = field(default_factory=list)
    stage_seconds: dict = field(default_factory=dict)
    error: str | None = None

    def latency_seconds(self) -> float:
        """Per-NLQ latency under the reporting rule: for two-stage runs the
        slowest candidate generation plus the oracle call, otherwise the
        single generation call."""
        if self.mode == "two_stage":
            return self.stage_seconds.get("generate", 0.0) + self.stage_seconds.get(
                "oracle", 0.0
            )
        return self.stage_seconds.get("generate", 0.0)

    def to_json_dict(self) -> dict:
        return {
            "nlq": self.nlq,
            "mode": self.mode,
            "schema_tables": list(self.schema_tables),
            "few_shots": [list(pair) for pair in self.few_shots],
            "few_shot_fallback": self.few_shot_fallback,
            "prompts": [
                {
                    "template_id": p.template_id,
                    "token_estimate": p.token_estimate,
                    "rendered": p.rendered,
                }
                for p in self.prompts
            ],
            "raw_candidates": list(self.raw_candidates),
            "oracle_raw": self.oracle_raw,
            "oracle_fallback": self.oracle_fallback,
            "final_kql": self.final_kql,
            "diagnostics_before": [d.to_json_dict() for d in self.diagnostics_before],
            "diagnostics_after": [d.to_json_dict() for d in self.diagnostics_after],
            "repairs": [r.to_json_dict() for r in self.repairs],
            "usage": [u.to_json_dict() for u in self.usage],
            "stage_seconds": dict(self.stage_seconds),
            "error": self.error,
        }


def build_embedder(config: PipelineConfig):
    if config.embedder == "offline":
        return OfflineHashEmbedder()
    import os

    from ..errors import ConfigurationError
    from ..retrieval.embedder import HttpEmbedder

    if not config.embedder_endpoint:
        raise ConfigurationError(
            f"live embedder {config.embedder!r} needs embedder_endpoint in the config"
        )
    return HttpEmbedder(
        endpoint=config.embedder_endpoint,
        model=config.embedder,
        dims=config.embedder_dims,
        api_key=os.environ.get("KQLFORGE_EMBED_KEY"),
        max_in_flight=config.embedder_max_in_flight,
        max_attempts=config.embedder_max_attempts,
    )


def translate(
    nlq: str,
    config: PipelineConfig,
    stores: Stores,
    schema: SchemaCatalog,
    backends: Backends,
    embedder=None,
) -> tuple[str, TranslationTrace]:
    """Translate one NLQ to KQL and return the final text plus full trace.

    Unparseable final output is returned as-is with its diagnostics in the
    trace; backend errors propagate to the caller.
    """
    if embedder is None:
        embedder = build_embedder(config)
    trace = TranslationTrace(nlq=nlq, mode=config.mode)

    try:
        if config.mode == "zero_shot":
            return _translate_zero_shot(nlq, config, schema, backends, trace)
        if config.mode == "nl2kql":
            return _translate_nl2kql(nlq, config, stores, schema, backends, embedder, trace)
        return _translate_two_stage(nlq, config, stores, schema, backends, embedder, trace)
    except Exception as exc:
        # Propagate with the partial trace attached for callers that want
        # the audit record of what happened before the failure.
        trace.error = f"{type(exc).__name__}: {exc}"
        exc.trace = trace
        raise


def _generator_request(config: PipelineConfig, prompt: str, tag: str) -> CompletionRequest:
    return CompletionRequest(
        model_id=config.generator_model,
        prompt=prompt,
        temperature=config.generator_temperature,
        max_output_tokens=config.max_output_tokens,
        request_tag=tag,
    )


def _translate_zero_shot(nlq, config, schema, backends, trace):
    prompt = build_zero_shot(nlq)
    trace.prompts.append(prompt)
    response = backends.generator.complete(_generator_request(config, prompt.rendered, "generator:0"))
    trace.usage.append(response)
    trace.stage_seconds["generate"] = response.latency_seconds
    trace.raw_candidates.append(response.text)
    final = strip_model_decorations(response.text)
    _, diags = analyze(final, schema)
    trace.final_kql = final
    trace.diagnostics_before = list(diags)
    trace.diagnostics_after = list(diags)
    return final, trace


def _retrieve(nlq, config, stores, embedder, trace) -> SchemaSlice:
    schema_slice = refine_schema(
        nlq,
        stores.tables,
        stores.values,
        embedder,
        t=min(config.top_tables, len(stores.tables)),
        v=config.v,
        include_values=config.values_included,
    )
    trace.schema_tables = [t.name for t in schema_slice.tables]
    if stores.fsdb is not None and len(stores.fsdb):
        selection = select_few_shots(
            nlq, stores.fsdb, schema_slice.table_names(), embedder, f=config.f
        )
        trace.few_shots = list(selection.examples)
        trace.few_shot_fallback = selection.used_fallback
    return schema_slice


def _main_prompt(nlq, config, schema_slice, few_shots) -> PromptInstance:
    if config.prompt_variant == "original":
        return build_nl2kql(nlq, schema_slice, few_shots)
    variant = 1 if config.prompt_variant == "alt1" else 2
    return build_alternative(nlq, schema_slice, few_shots, variant)


def _translate_nl2kql(nlq, config, stores, schema, backends, embedder, trace):
    schema_slice = _retrieve(nlq, config, stores, embedder, trace)
    prompt = _main_prompt(nlq, config, schema_slice, trace.few_shots)
    trace.prompts.append(prompt)
    response = backends.generator.complete(_generator_request(config, prompt.rendered, "generator:0"))
    trace.usage.append(response)
    trace.stage_seconds["generate"] = response.latency_seconds
    trace.raw_candidates.append(response.text)

    candidate = strip_model_decorations(response.text)
    _, before = analyze(candidate, schema)
    trace.diagnostics_before = list(before)
    final, repairs = query_refine(
        response.text, schema, embedder, config.identifier_repair_threshold
    )
    trace.repairs = repairs
    _, after = analyze(final, schema)
    trace.diagnostics_after = list(after)
    trace.final_kql = final
    return final, trace


def _translate_two_stage(nlq, config, stores, schema, backends, embedder, trace):
    schema_slice = _retrieve(nlq, config, stores, embedder, trace)
    prompt = _main_prompt(nlq, config, schema_slice, trace.few_shots)
    trace.prompts.append(prompt)

    generator_latencies = []
    for index in range(config.n_candidates):
        response = backends.generator.complete(
            _generator_request(config, prompt.rendered, f"generator:{index}")
        )
        trace.usage.append(response)
        trace.raw_candidates.append(response.text)
        generator_latencies.append(response.latency_seconds)
    trace.stage_seconds["generate"] = max(generator_latencies)

    oracle_slice = schema_slice if config.oracle_mode == "schema" else None
    oracle_prompt = build_oracle(nlq, trace.raw_candidates, oracle_slice)
    trace.prompts.append(oracle_prompt)
    oracle_backend = backends.oracle or backends.generator
    oracle_response = oracle_backend.complete(
        CompletionRequest(
            model_id=config.oracle_model,
            prompt=oracle_prompt.rendered,
            temperature=config.oracle_temperature,
            max_output_tokens=config.max_output_tokens,
            request_tag="oracle",
        )
    )
    trace.usage.append(oracle_response)
    trace.stage_seconds["oracle"] = oracle_response.latency_seconds
    trace.oracle_raw = oracle_response.text

    chosen = oracle_response.text
    if not chosen.strip():
        chosen = _best_candidate(trace.raw_candidates, schema)
        trace.oracle_fallback = True

    final = strip_model_decorations(chosen)
    _, before = analyze(final, schema)
    trace.diagnostics_before = list(before)
    if any(d.severity == SYNTAX for d in before):
        final, repairs = query_refine(
            chosen, schema, embedder, config.identifier_repair_threshold
        )
        trace.repairs = repairs
        _, after = analyze(final, schema)
        trace.diagnostics_after = list(after)
    else:
        trace.diagnostics_after = list(before)
    trace.final_kql = final
    return final, trace


def _best_candidate(raw_candidates: list[str], schema: SchemaCatalog) -> str:
    """Fallback for empty oracle replies: fewest diagnostics, then shortest."""

    def rank(raw: str):
        text = strip_model_decorations(raw)
        _, diags = analyze(text, schema)
        return (len(diags), len(text))

    return min(raw_candidates, key=rank)
