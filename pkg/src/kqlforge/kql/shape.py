"""Structural extraction: tables, filter columns, and filter literals."""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import ast


@dataclass(frozen=True)
class QueryShape:
    """The comparison-relevant structure of one query."""

    tables: frozenset[str]
    filter_columns: frozenset[str]
    filter_literals: frozenset[str]


def extract_shape(query: ast.QueryAst, case_sensitive_literals: bool = True) -> QueryShape:
    """Tables, filter columns, and normalized filter literals of ``query``.

    Filters are where-stage predicates plus join on-clause columns;
    project/summarize columns do not count. Literal normalization strips
    quotes, trims whitespace, lowercases timespan units, and renders
    datetimes in ISO-8601-style text.
    """
    columns: set[str] = set()
    literals: set[str] = set()
    _collect(query, columns, literals)
    if not case_sensitive_literals:
        literals = {lit.lower() for lit in literals}
    return QueryShape(
        tables=frozenset(query.sources),
        filter_columns=frozenset(columns),
        filter_literals=frozenset(literals),
    )


def _collect(query: ast.QueryAst, columns: set[str], literals: set[str]) -> None:
    for stage in query.stages:
        if isinstance(stage, ast.WhereStage):
            for node in ast.walk(stage.predicate):
                if isinstance(node, ast.ColumnRef):
                    columns.add(node.name)
                elif isinstance(node, ast.Literal):
                    literals.add(normalize_literal(node))
        elif isinstance(stage, ast.JoinStage):
            for cond in stage.on:
                columns.add(cond.left)
                if cond.qualified:
                    columns.add(cond.right)
            _collect(stage.right, columns, literals)


def normalize_literal(literal: ast.Literal) -> str:
    if literal.kind == "string":
        return literal.value.strip()
    if literal.kind == "timespan":
        return literal.value.lower()
    return literal.value  # numbers and datetimes are canonicalized at parse


_IDENT_LINE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(\||$)")
_JOIN_TABLE = re.compile(r"\bjoin\b(?:\s+kind\s*=\s*\w+)?\s*\(\s*([A-Za-z_][A-Za-z0-9_]*)")
_UNION_TABLES = re.compile(r"\bunion\b\s+([A-Za-z_][A-Za-z0-9_]*(?:\s*,\s*[A-Za-z_][A-Za-z0-9_]*)*)")
_FILTER_COLUMN = re.compile(
    r"([A-Za-z_][A-Za-z0-9_]*)\s*(?:==|!=|<=|>=|=~|!~|<|>|"
    r"\b(?:contains|has_any|has_all|has|in~|in|between|startswith|endswith)\b)"
)
_CALL_FORM_COLUMN = re.compile(r"\b(?:has_any|has_all)\s*\(\s*([A-Za-z_][A-Za-z0-9_]*)")
_QUOTED = re.compile(r"\"((?:[^\"\\]|\\.)*)\"|'((?:[^'\\]|\\.)*)'")
_TIMESPAN_TEXT = re.compile(r"\b(\d+(?:ms|[dhms]))\b")

_RESERVED = {
    "where", "project", "extend", "summarize", "by", "sort", "order", "top",
    "take", "limit", "count", "distinct", "join", "union", "on", "kind",
    "and", "or", "not", "ago", "datetime", "true", "false",
}


def shape_from_text(text: str) -> QueryShape:
    """Tolerant regex-based shape extraction for queries the parser rejects.

    Best effort only; used so structural scores stay comparable when a
    query exceeds the supported grammar subset.
    """
    tables: set[str] = set()
    columns: set[str] = set()
    literals: set[str] = set()
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("```"):
            continue
        match = _IDENT_LINE.match(stripped)
        if match and match.group(1) not in _RESERVED:
            tables.add(match.group(1))
            break
    for match in _JOIN_TABLE.finditer(text):
        tables.add(match.group(1))
    for match in _UNION_TABLES.finditer(text):
        for name in match.group(1).split(","):
            tables.add(name.strip())
    for segment in text.split("|"):
        segment = segment.strip()
        if not segment.startswith("where"):
            continue
        body = segment[len("where"):]
        for match in _FILTER_COLUMN.finditer(body):
            name = match.group(1)
            if name not in _RESERVED:
                columns.add(name)
        for match in _CALL_FORM_COLUMN.finditer(body):
            columns.add(match.group(1))
        for match in _QUOTED.finditer(body):
            value = match.group(1) if match.group(1) is not None else match.group(2)
            value = value.strip()
            if value:
                literals.add(value)
        for match in _TIMESPAN_TEXT.finditer(body):
            literals.add(match.group(1))
    return QueryShape(
        tables=frozenset(tables),
        filter_columns=frozenset(columns),
        filter_literals=frozenset(literals),
    )
