"""Few-shot dataset synthesis with post-generation validity filtering."""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import EmptySynthesisError
from ..gateway.backends import CompletionRequest
from ..kql import analyze
from ..kql.schema import SchemaCatalog
from ..prompts import SYNTHESIS_THEMES, build_synthesis
from ..retrieval.catalog import SchemaSlice, SliceTable

log = logging.getLogger(__name__)


def slice_of_schema(schema: SchemaCatalog, tables: list[str] | None = None) -> SchemaSlice:
    names = tables if tables is not None else schema.table_names()
    return SchemaSlice(
        tables=tuple(
            SliceTable(
                name=name,
                columns=tuple((c.name, c.type) for c in schema.tables[name]),
            )
            for name in names
        )
    )


@dataclass
class SynthesisResult:
    kept: list[dict] = field(default_factory=list)
    discarded: list[dict] = field(default_factory=list)
    usage: list = field(default_factory=list)


def synthesize_fsdb(
    schema: SchemaCatalog,
    teacher_backend,
    teacher_model: str,
    themes: tuple[str, ...] = SYNTHESIS_THEMES,
    pairs_per_theme: int = 5,
    with_rationale: bool = False,
    tables: list[str] | None = None,
    temperature: float = 1.0,
) -> SynthesisResult:
    """Generate NLQ-KQL pairs per theme, then keep only those that parse
    and validate cleanly. Discards are recorded with their diagnostics."""
    table_subset = slice_of_schema(schema, tables)
    result = SynthesisResult()
    for theme in themes:
        prompt = build_synthesis(theme, table_subset, with_rationale, count=pairs_per_theme)
        try:
            response = teacher_backend.complete(
                CompletionRequest(
                    model_id=teacher_model,
                    prompt=prompt.rendered,
                    temperature=temperature,
                    request_tag=f"teacher:{theme}",
                )
            )
        except Exception as exc:  # noqa: BLE001 - per-batch isolation is the contract
            log.warning("teacher batch for theme %s failed: %s", theme, exc)
            continue
        result.usage.append(response)
        for pair in parse_synthesis_reply(response.text, with_rationale):
            _, diags = analyze(pair["kql"], schema)
            record = {"theme": theme, "nlq": pair["nlq"], "kql": pair["kql"]}
            if with_rationale and pair.get("rationale"):
                record["rationale"] = pair["rationale"]
            if diags:
                record["diagnostics"] = [d.to_json_dict() for d in diags]
                result.discarded.append(record)
            else:
                result.kept.append(record)
    if not result.kept:
        raise EmptySynthesisError("synthesis produced no valid NLQ-KQL pairs")
    return result


def parse_synthesis_reply(text: str, with_rationale: bool) -> list[dict]:
    """Split a teacher reply into pairs.

    Blocks are separated by ``---`` lines; inside a block the query starts
    after the ``KQL:`` line, with an optional ``EXPLANATION:`` section in
    between.
    """
    pairs = []
    for block in _split_blocks(text):
        pair = _parse_block(block, with_rationale)
        if pair is not None:
            pairs.append(pair)
    return pairs


def _split_blocks(text: str) -> list[list[str]]:
    blocks: list[list[str]] = [[]]
    for line in text.splitlines():
        if line.strip() == "---":
            blocks.append([])
        else:
            blocks[-1].append(line)
    return [b for b in blocks if any(line.strip() for line in b)]


def _parse_block(lines: list[str], with_rationale: bool) -> dict | None:
    nlq = None
    rationale_lines: list[str] = []
    kql_lines: list[str] = []
    section = None
    for line in lines:
        stripped = line.strip()
        if stripped.startswith("NLQ:"):
            nlq = stripped[len("NLQ:"):].strip()
            section = "nlq"
            continue
        if stripped.startswith("EXPLANATION:"):
            section = "rationale"
            remainder = stripped[len("EXPLANATION:"):].strip()
            if remainder:
                rationale_lines.append(remainder)
            continue
        if stripped.startswith("KQL:"):
            section = "kql"
            remainder = stripped[len("KQL:"):].strip()
            if remainder:
                kql_lines.append(remainder)
            continue
        if section == "rationale":
            rationale_lines.append(line)
        elif section == "kql":
            kql_lines.append(line)
    if nlq is None or not kql_lines:
        return None
    pair = {"nlq": nlq, "kql": "\n".join(kql_lines).strip()}
    if with_rationale:
        pair["rationale"] = "\n".join(rationale_lines).strip()
    return pair


def split_dataset(
    examples: list, train_fraction: float = 0.8, seed: int = 0
) -> tuple[list, list]:
    """Seeded shuffle then split; (train, validation)."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    if len(examples) < 2:
        raise ValueError("need at least 2 examples to split")
    shuffled = list(examples)
    random.Random(seed).shuffle(shuffled)
    cut = round(len(shuffled) * train_fraction)
    cut = max(1, min(cut, len(shuffled) - 1))
    return shuffled[:cut], shuffled[cut:]


def load_dataset(path: str | Path) -> list[dict]:
    """Read a JSON-lines dataset of ``{"nlq": ..., "kql": ...}`` records."""
    records = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def save_dataset(records: list[dict], path: str | Path) -> None:
    lines = [json.dumps(record, sort_keys=True) for record in records]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
