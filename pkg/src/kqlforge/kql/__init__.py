"""Lexer, parser, semantic validator, and structural extractors for a KQL subset."""

from . import ast
from .cleanup import strip_model_decorations
from .diagnostics import (
    SEMANTIC,
    SYNTAX,
    Diagnostic,
    classify_diagnostics,
)
from .lexer import Token, tokenize
from .parser import parse, normalize_datetime_text
from .schema import Column, SchemaCatalog
from .semantics import validate_semantics
from .shape import QueryShape, extract_shape, shape_from_text


def analyze(source: str, schema: "SchemaCatalog | None" = None):
    """Parse ``source`` and, when it parses, validate against ``schema``.

    Returns (query_or_none, diagnostics): syntax diagnostics when the parse
    fails, semantic diagnostics otherwise (empty when fully valid).
    """
    result = parse(source)
    if isinstance(result, ast.QueryAst):
        diags = validate_semantics(result, schema) if schema is not None else []
        return result, diags
    return None, result

__all__ = [
    "analyze",
    "ast",
    "Column",
    "Diagnostic",
    "QueryShape",
    "SchemaCatalog",
    "SEMANTIC",
    "SYNTAX",
    "Token",
    "classify_diagnostics",
    "extract_shape",
    "normalize_datetime_text",
    "parse",
    "shape_from_text",
    "strip_model_decorations",
    "tokenize",
    "validate_semantics",
]
