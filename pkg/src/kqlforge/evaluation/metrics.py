"""Per-query scores: syntax, semantic, table, and filter metrics."""

from __future__ import annotations

from ..kql import analyze, strip_model_decorations
from ..kql.ast import QueryAst
from ..kql.diagnostics import SYNTAX
from ..kql.schema import SchemaCatalog
from ..kql.shape import QueryShape, extract_shape, shape_from_text


def score_syntax(generated: str) -> int:
    """1 iff the query parses cleanly after decoration stripping."""
    query, diags = analyze(strip_model_decorations(generated))
    if query is None:
        return 0
    return 0 if any(d.severity == SYNTAX for d in diags) else 1


def score_semantic(generated: str, schema: SchemaCatalog) -> int:
    """1 iff the query parses and validates against the schema with no findings."""
    query, diags = analyze(strip_model_decorations(generated), schema)
    if query is None:
        return 0
    return 0 if diags else 1


def score_table(gold: QueryShape, generated: QueryShape) -> float:
    """Asymmetric table score.

    |T(q) ∩ T(q̂)| / |T(q̂)| when the gold tables are a subset of the
    generated tables, else 0. An empty generated table set scores 0.
    """
    gen_tables = generated.tables
    gold_tables = gold.tables
    if not gen_tables:
        return 0.0
    if not gold_tables <= gen_tables:
        return 0.0
    return len(gold_tables & gen_tables) / len(gen_tables)


def score_filter(gold: frozenset, generated: frozenset, empty_score: float = 1.0) -> float:
    """Jaccard similarity; two empty sets score ``empty_score`` (default 1:
    identical filter behavior)."""
    if not gold and not generated:
        return empty_score
    return len(gold & generated) / len(gold | generated)


def shape_of(text: str, case_sensitive_literals: bool = True) -> tuple[QueryShape, bool]:
    """Shape of ``text`` plus whether the tolerant regex fallback was used.

    Queries outside the supported grammar subset still get a best-effort
    shape so structural scores stay comparable.
    """
    cleaned = strip_model_decorations(text)
    query, _ = analyze(cleaned)
    if isinstance(query, QueryAst):
        return extract_shape(query, case_sensitive_literals), False
    shape = shape_from_text(cleaned)
    if not case_sensitive_literals:
        shape = QueryShape(
            tables=shape.tables,
            filter_columns=shape.filter_columns,
            filter_literals=frozenset(lit.lower() for lit in shape.filter_literals),
        )
    return shape, True
