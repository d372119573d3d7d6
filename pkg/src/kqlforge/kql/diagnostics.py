"""Diagnostics emitted by the KQL lexer, parser, and semantic validator.

Message strings for common failure classes are byte-identical to the
canonical parser phrasing so that error histograms can be compared by
plain string equality.
"""

from __future__ import annotations

from dataclasses import dataclass

SYNTAX = "syntax"
SEMANTIC = "semantic"

# Canonical messages. These exact strings are load-bearing: downstream
# error classification groups on them.
UNEXPECTED_BACKTICK = "Unexpected: `"
INCOMPLETE_FRAGMENT = "The incomplete fragment is unexpected."
EXPECTED_SEMICOLON = "Expected: ;"
EXPECTED_RPAREN = "Expected: )"
EXPECTED_LPAREN = "Expected: ("
EXPECTED_COMMA = "Expected: ,"
MISSING_QUOTE = 'Missing: "'
UNEXPECTED_BACKSLASH = "Unexpected: \\"
MISSING_EXPRESSION = "Missing expression"
COLUMN_NAME_EXPECTED = "Column name expected."
TIMESPAN_EXPECTED = "A value of type timespan expected."
STRING_OR_DYNAMIC_EXPECTED = "A value of type string or dynamic expected."

UNKNOWN_NAME_TEMPLATE = (
    "The name '{name}' does not refer to any known column, table, "
    "variable or function."
)

# Category keys. Fixed-message diagnostics use the message itself as the
# category; parameterized or artifact-specific ones use a stable slug.
CATEGORY_UNKNOWN_NAME = "unknown-name"
CATEGORY_INFIX_MISUSE = "infix-operator-misuse"
CATEGORY_OTHER = "other"

_FIXED_CATEGORIES = {
    UNEXPECTED_BACKTICK,
    INCOMPLETE_FRAGMENT,
    EXPECTED_SEMICOLON,
    EXPECTED_RPAREN,
    EXPECTED_LPAREN,
    EXPECTED_COMMA,
    MISSING_QUOTE,
    UNEXPECTED_BACKSLASH,
    MISSING_EXPRESSION,
    COLUMN_NAME_EXPECTED,
    TIMESPAN_EXPECTED,
    STRING_OR_DYNAMIC_EXPECTED,
}

KNOWN_CATEGORIES = sorted(_FIXED_CATEGORIES) + [
    CATEGORY_UNKNOWN_NAME,
    CATEGORY_INFIX_MISUSE,
    CATEGORY_OTHER,
]


@dataclass(frozen=True)
class Diagnostic:
    """One finding about a query: what went wrong, where, and how it groups."""

    severity: str  # SYNTAX or SEMANTIC
    message: str
    category: str
    span: tuple[int, int]

    def to_json_dict(self) -> dict:
        return {
            "severity": self.severity,
            "message": self.message,
            "category": self.category,
            "span": [self.span[0], self.span[1]],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "Diagnostic":
        span = data.get("span") or [0, 0]
        return cls(
            severity=data["severity"],
            message=data["message"],
            category=data.get("category", CATEGORY_OTHER),
            span=(int(span[0]), int(span[1])),
        )


def syntax_error(message: str, span: tuple[int, int], category: str | None = None) -> Diagnostic:
    if category is None:
        category = message if message in _FIXED_CATEGORIES else CATEGORY_OTHER
    return Diagnostic(SYNTAX, message, category, span)


def semantic_error(message: str, span: tuple[int, int], category: str | None = None) -> Diagnostic:
    if category is None:
        category = message if message in _FIXED_CATEGORIES else CATEGORY_OTHER
    return Diagnostic(SEMANTIC, message, category, span)


def unknown_name(name: str, span: tuple[int, int]) -> Diagnostic:
    return Diagnostic(
        SEMANTIC,
        UNKNOWN_NAME_TEMPLATE.format(name=name),
        CATEGORY_UNKNOWN_NAME,
        span,
    )


def infix_misuse(operator: str, span: tuple[int, int]) -> Diagnostic:
    return Diagnostic(
        SEMANTIC,
        f"The operator '{operator}' must be used in infix form, not as a function call.",
        CATEGORY_INFIX_MISUSE,
        span,
    )


def classify_diagnostics(diags: list[Diagnostic]) -> dict[str, int]:
    """Histogram of diagnostics keyed by category, in first-seen order."""
    counts: dict[str, int] = {}
    for diag in diags:
        counts[diag.category] = counts.get(diag.category, 0) + 1
    return counts
