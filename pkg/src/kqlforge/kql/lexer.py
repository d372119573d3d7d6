"""Hand-written lexer for the supported KQL subset."""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import (
    EXPECTED_RPAREN,
    MISSING_QUOTE,
    UNEXPECTED_BACKSLASH,
    CATEGORY_OTHER,
    Diagnostic,
    syntax_error,
)

IDENTIFIER = "identifier"
KEYWORD = "keyword"
STRING = "string-literal"
NUMBER = "number-literal"
TIMESPAN = "timespan-literal"
DATETIME = "datetime-literal"
OPERATOR = "operator"
PIPE = "pipe"
PUNCTUATION = "punctuation"
FENCE = "code-fence-residue"

KEYWORDS = {
    "where", "project", "extend", "summarize", "by", "sort", "order",
    "top", "take", "limit", "count", "distinct", "join", "union", "on",
    "kind", "and", "or", "not", "contains", "has", "has_any", "has_all",
    "in", "between", "startswith", "endswith", "matches", "regex",
    "asc", "desc", "true", "false",
}

# Keywords that may carry a leading "!" (negated operators) or a
# trailing "~" (case-insensitive variants).
_NEGATABLE = {"contains", "has", "in", "startswith", "endswith", "has_any", "has_all"}
_TILDABLE = {"in", "!in"}

TIMESPAN_UNITS = ("ms", "d", "h", "m", "s")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: tuple[int, int]


def tokenize(source: str) -> "list[Token] | Diagnostic":
    """Lex ``source`` into tokens.

    Returns the full token stream, or a syntax Diagnostic located at the
    first character that cannot be lexed. Backtick runs become
    code-fence-residue tokens so fenced model output is visible to the
    parser rather than silently dropped. ``//`` line comments are skipped
    as trivia.
    """
    tokens: list[Token] = []
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "/" and i + 1 < n and source[i + 1] == "/":
            while i < n and source[i] != "\n":
                i += 1
            continue
        if ch == "`":
            start = i
            while i < n and source[i] == "`":
                i += 1
            tokens.append(Token(FENCE, source[start:i], (start, i)))
            continue
        if ch == "|":
            tokens.append(Token(PIPE, "|", (i, i + 1)))
            i += 1
            continue
        if ch in "(),;*":
            tokens.append(Token(PUNCTUATION, ch, (i, i + 1)))
            i += 1
            continue
        if ch == ".":
            if i + 1 < n and source[i + 1] == ".":
                tokens.append(Token(PUNCTUATION, "..", (i, i + 2)))
                i += 2
            else:
                tokens.append(Token(PUNCTUATION, ".", (i, i + 1)))
                i += 1
            continue
        if ch in "\"'":
            result = _lex_string(source, i)
            if isinstance(result, Diagnostic):
                return result
            tokens.append(result)
            i = result.span[1]
            continue
        if ch.isdigit():
            tokens.append(_lex_number(source, i))
            i = tokens[-1].span[1]
            continue
        if ch == "!":
            token = _lex_bang(source, i)
            if token is None:
                return syntax_error("Unexpected: !", (i, i + 1), CATEGORY_OTHER)
            tokens.append(token)
            i = token.span[1]
            continue
        if ch in "=<>":
            tokens.append(_lex_comparison(source, i))
            i = tokens[-1].span[1]
            continue
        if ch in "+-":
            tokens.append(Token(OPERATOR, ch, (i, i + 1)))
            i += 1
            continue
        if ch.isalpha() or ch == "_" or ch == "$":
            token = _lex_word(source, i)
            if isinstance(token, Diagnostic):
                return token
            tokens.append(token)
            i = token.span[1]
            continue
        if ch == "\\":
            return syntax_error(UNEXPECTED_BACKSLASH, (i, i + 1))
        return syntax_error(f"Unexpected: {ch}", (i, i + 1), CATEGORY_OTHER)
    return tokens


def _lex_string(source: str, start: int) -> "Token | Diagnostic":
    quote = source[start]
    i = start + 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\\" and i + 1 < n:
            i += 2
            continue
        if ch == quote:
            return Token(STRING, source[start : i + 1], (start, i + 1))
        if ch == "\n":
            break
        i += 1
    return syntax_error(MISSING_QUOTE, (start, min(i, n)))


def _lex_number(source: str, start: int) -> Token:
    i = start
    n = len(source)
    while i < n and source[i].isdigit():
        i += 1
    # timespan literal: <int><unit>
    for unit in TIMESPAN_UNITS:
        end = i + len(unit)
        if source[i:end] == unit and (end >= n or not (source[end].isalnum() or source[end] == "_")):
            return Token(TIMESPAN, source[start:end], (start, end))
    if i < n and source[i] == "." and i + 1 < n and source[i + 1].isdigit():
        i += 1
        while i < n and source[i].isdigit():
            i += 1
    return Token(NUMBER, source[start:i], (start, i))


def _lex_bang(source: str, start: int) -> Token | None:
    n = len(source)
    if start + 1 < n and source[start + 1] == "=":
        return Token(OPERATOR, "!=", (start, start + 2))
    if start + 1 < n and source[start + 1] == "~":
        return Token(OPERATOR, "!~", (start, start + 2))
    i = start + 1
    while i < n and (source[i].isalnum() or source[i] == "_"):
        i += 1
    word = source[start + 1 : i]
    if word in _NEGATABLE:
        text = "!" + word
        if text in _TILDABLE and i < n and source[i] == "~":
            i += 1
            text += "~"
        return Token(KEYWORD, text, (start, i))
    return None


def _lex_comparison(source: str, start: int) -> Token:
    two = source[start : start + 2]
    if two in ("==", "<=", ">=", "=~"):
        return Token(OPERATOR, two, (start, start + 2))
    return Token(OPERATOR, source[start], (start, start + 1))


def _lex_word(source: str, start: int) -> "Token | Diagnostic":
    n = len(source)
    i = start
    if source[i] == "$":
        i += 1
    while i < n and (source[i].isalnum() or source[i] == "_"):
        i += 1
    text = source[start:i]
    if text == "$":
        return syntax_error("Unexpected: $", (start, start + 1), CATEGORY_OTHER)
    if text == "datetime" and i < n and source[i] == "(":
        return _lex_datetime(source, start, i)
    if text in KEYWORDS:
        if text in _TILDABLE and i < n and source[i] == "~":
            return Token(KEYWORD, text + "~", (start, i + 1))
        return Token(KEYWORD, text, (start, i))
    return Token(IDENTIFIER, text, (start, i))


def _lex_datetime(source: str, start: int, open_paren: int) -> "Token | Diagnostic":
    """Lex ``datetime(...)`` as one literal; the payload may be unquoted."""
    i = open_paren + 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch in "\"'":
            quote = ch
            i += 1
            while i < n and source[i] != quote:
                i += 2 if source[i] == "\\" else 1
            if i >= n:
                return syntax_error(MISSING_QUOTE, (start, n))
            i += 1
            continue
        if ch == ")":
            return Token(DATETIME, source[start : i + 1], (start, i + 1))
        i += 1
    return syntax_error(EXPECTED_RPAREN, (start, n))


def datetime_payload(token_text: str) -> str:
    """Inner text of a ``datetime(...)`` literal, quotes stripped and trimmed."""
    inner = token_text[len("datetime(") : -1].strip()
    if len(inner) >= 2 and inner[0] in "\"'" and inner[-1] == inner[0]:
        inner = inner[1:-1]
    return inner.strip()
