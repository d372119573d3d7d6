"""Parser-driven query repair: parentheses, missing pipes, and
embedding-based replacement of undefined identifiers."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..kql import analyze, strip_model_decorations
from ..kql.diagnostics import CATEGORY_UNKNOWN_NAME, SYNTAX
from ..kql.schema import SchemaCatalog
from ..retrieval.embedder import cosine

_STAGE_LINE = re.compile(
    r"^(where|project|extend|summarize|sort|order|top|take|limit|count|distinct|join|union)\b"
)
_UNKNOWN_NAME = re.compile(r"^The name '(.*)' does not refer to")


@dataclass(frozen=True)
class Repair:
    kind: str  # strip-decorations | balance-parens | insert-pipe | replace-identifier
    before: str
    after: str

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "before": self.before, "after": self.after}


def query_refine(
    candidate: str,
    schema: SchemaCatalog,
    embedder,
    threshold: float = 0.9,
) -> tuple[str, list[Repair]]:
    """Best-effort repair of a model-produced query.

    Applies, in order: decoration stripping, per-line parenthesis
    balancing, missing-pipe insertion, and replacement of undefined
    identifiers by their nearest schema name when the embedding cosine
    reaches ``threshold``. A step is kept only if it does not increase the
    total diagnostic count, so refinement never makes a query worse and is
    a no-op on already-valid queries.
    """
    repairs: list[Repair] = []
    current = strip_model_decorations(candidate)
    if current != candidate.strip():
        repairs.append(Repair("strip-decorations", candidate, current))

    _, diags = analyze(current, schema)

    if any(d.severity == SYNTAX for d in diags):
        current, diags = _try_step(_balance_parens(current), current, diags, schema, repairs)
    if any(d.severity == SYNTAX for d in diags):
        current, diags = _try_step(_insert_pipes(current), current, diags, schema, repairs)

    unknown = _unknown_names(diags)
    if unknown:
        proposed = _replace_identifiers(current, unknown, schema, embedder, threshold)
        current, diags = _try_step(proposed, current, diags, schema, repairs)
    return current, repairs


def _try_step(proposed, current, diags, schema, repairs):
    text, step_repairs = proposed
    if text == current:
        return current, diags
    _, new_diags = analyze(text, schema)
    if len(new_diags) <= len(diags):
        repairs.extend(step_repairs)
        return text, new_diags
    return current, diags


def _unknown_names(diags) -> list[str]:
    names = []
    for diag in diags:
        if diag.category != CATEGORY_UNKNOWN_NAME:
            continue
        match = _UNKNOWN_NAME.match(diag.message)
        if match and match.group(1) not in names:
            names.append(match.group(1))
    return names


def _balance_parens(text: str) -> tuple[str, list[Repair]]:
    lines = text.splitlines()
    repairs: list[Repair] = []
    fixed: list[str] = []
    for line in lines:
        delta = _paren_delta(line)
        new_line = line
        if delta > 0:
            new_line = line.rstrip() + ")" * delta
            repairs.append(Repair("balance-parens", line, new_line))
        elif delta < 0:
            new_line = line
            while delta < 0 and new_line.rstrip().endswith(")"):
                stripped = new_line.rstrip()
                new_line = stripped[:-1]
                delta += 1
            if new_line != line:
                repairs.append(Repair("balance-parens", line, new_line))
        fixed.append(new_line)
    return "\n".join(fixed), repairs


def _insert_pipes(text: str) -> tuple[str, list[Repair]]:
    lines = text.splitlines()
    repairs: list[Repair] = []
    fixed: list[str] = []
    depth = 0
    for index, line in enumerate(lines):
        stripped = line.lstrip()
        if (
            index > 0
            and depth == 0
            and stripped
            and not stripped.startswith("|")
            and _STAGE_LINE.match(stripped)
            and fixed
            and not fixed[-1].rstrip().endswith("|")
        ):
            new_line = "| " + stripped
            repairs.append(Repair("insert-pipe", line, new_line))
            fixed.append(new_line)
        else:
            fixed.append(line)
        depth += _paren_delta(line)
    return "\n".join(fixed), repairs


def _replace_identifiers(
    text: str, names: list[str], schema: SchemaCatalog, embedder, threshold: float
) -> tuple[str, list[Repair]]:
    repairs: list[Repair] = []
    current = text
    candidates = schema.all_names()
    for name in names:
        replacement = nearest_schema_name(name, candidates, embedder, threshold)
        if replacement is None or replacement == name:
            continue
        new_text = re.sub(rf"\b{re.escape(name)}\b", replacement, current)
        if new_text != current:
            repairs.append(Repair("replace-identifier", name, replacement))
            current = new_text
    return current, repairs


def nearest_schema_name(
    name: str, candidates: list[str], embedder, threshold: float
) -> str | None:
    """Closest schema name by embedding cosine, or None below the threshold."""
    try:
        target = embedder.embed_one(name)
    except ValueError:
        return None
    best_name = None
    best_score = -1.0
    for candidate in sorted(candidates):
        try:
            score = cosine(target, embedder.embed_one(candidate))
        except ValueError:
            continue
        if score > best_score:
            best_name = candidate
            best_score = score
    return best_name if best_score >= threshold else None


def _paren_delta(line: str) -> int:
    depth = 0
    in_string: str | None = None
    i = 0
    while i < len(line):
        ch = line[i]
        if in_string is not None:
            if ch == "\\":
                i += 2
                continue
            if ch == in_string:
                in_string = None
        elif ch in "\"'":
            in_string = ch
        elif ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        i += 1
    return depth
