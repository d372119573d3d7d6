"""Recursive-descent parser for the supported KQL subset.

Parsing stops at the first syntax error and reports it with the canonical
message for that failure class.
"""

from __future__ import annotations

import dataclasses

from . import ast
from . import lexer
from .diagnostics import (
    COLUMN_NAME_EXPECTED,
    EXPECTED_COMMA,
    EXPECTED_LPAREN,
    EXPECTED_RPAREN,
    EXPECTED_SEMICOLON,
    INCOMPLETE_FRAGMENT,
    MISSING_EXPRESSION,
    UNEXPECTED_BACKTICK,
    CATEGORY_OTHER,
    Diagnostic,
    syntax_error,
)
from .lexer import (
    DATETIME,
    FENCE,
    IDENTIFIER,
    KEYWORD,
    NUMBER,
    OPERATOR,
    PIPE,
    PUNCTUATION,
    STRING,
    TIMESPAN,
    Token,
)

COMPARISON_OPERATORS = {"==", "!=", "<", "<=", ">", ">=", "=~", "!~"}
WORD_COMPARISONS = {
    "contains", "!contains", "has", "!has",
    "startswith", "!startswith", "endswith", "!endswith",
}
LIST_OPERATORS = {"in", "in~", "!in", "!in~", "has_any", "has_all", "!has_any", "!has_all"}
STAGE_KEYWORDS = {
    "where", "project", "extend", "summarize", "sort", "order", "top",
    "take", "limit", "count", "distinct", "join", "union",
}

# Operators that KQL only accepts in infix position; call-form usage
# parses but is flagged by the semantic validator.
INFIX_ONLY_OPERATORS = {
    "contains", "has", "has_any", "has_all", "in", "in~", "between",
    "startswith", "endswith",
}


class _ParseError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.message)
        self.diagnostic = diagnostic


def parse(source: str) -> "ast.QueryAst | list[Diagnostic]":
    """Parse ``source`` into a QueryAst, or return syntax diagnostics."""
    tokens = lexer.tokenize(source)
    if isinstance(tokens, Diagnostic):
        return [tokens]
    parser = _Parser(tokens, source)
    try:
        query = parser.parse_query(top_level=True)
    except _ParseError as err:
        return [err.diagnostic]
    return query


class _Parser:
    def __init__(self, tokens: list[Token], source: str):
        self.tokens = tokens
        self.source = source
        self.pos = 0

    # -- token plumbing ---------------------------------------------------

    def peek(self, offset: int = 0) -> Token | None:
        index = self.pos + offset
        return self.tokens[index] if index < len(self.tokens) else None

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def at(self, kind: str, text: str | None = None) -> bool:
        token = self.peek()
        if token is None or token.kind != kind:
            return False
        return text is None or token.text == text

    def at_keyword(self, *names: str) -> bool:
        token = self.peek()
        return token is not None and token.kind == KEYWORD and token.text in names

    def expect_punct(self, text: str, message: str) -> Token:
        if self.at(PUNCTUATION, text):
            return self.advance()
        raise _ParseError(syntax_error(message, self._here()))

    def _here(self) -> tuple[int, int]:
        token = self.peek()
        if token is None:
            end = len(self.source)
            return (end, end)
        return token.span

    def fail(self, message: str, category: str | None = None) -> None:
        raise _ParseError(syntax_error(message, self._here(), category))

    # -- query ------------------------------------------------------------

    def parse_query(self, top_level: bool) -> ast.QueryAst:
        start = self._here()[0]
        token = self.peek()
        if token is None:
            self.fail(INCOMPLETE_FRAGMENT)
        if token.kind == FENCE:
            self.fail(UNEXPECTED_BACKTICK)
        head: list[str] = []
        if token.kind == IDENTIFIER:
            head.append(self.advance().text)
        elif token.kind == KEYWORD and token.text == "union":
            self.advance()
            head.extend(self._table_name_list())
        else:
            self.fail(INCOMPLETE_FRAGMENT)

        stages: list = []
        while self.at(PIPE):
            self.advance()
            stages.append(self.parse_stage())

        if top_level:
            if self.at(PUNCTUATION, ";"):
                self.advance()
            leftover = self.peek()
            if leftover is not None:
                if leftover.kind == FENCE:
                    self.fail(UNEXPECTED_BACKTICK)
                self.fail(EXPECTED_SEMICOLON)
        end = self.tokens[self.pos - 1].span[1] if self.pos else start

        sources = list(head)
        for stage in stages:
            _collect_stage_sources(stage, sources)
        deduped: list[str] = []
        for name in sources:
            if name not in deduped:
                deduped.append(name)
        return ast.QueryAst(
            sources=tuple(deduped),
            stages=tuple(stages),
            raw=self.source,
            head_tables=tuple(head),
            span=(start, end),
        )

    def _table_name_list(self) -> list[str]:
        names = []
        if not self.at(IDENTIFIER):
            self.fail(INCOMPLETE_FRAGMENT)
        names.append(self.advance().text)
        while self.at(PUNCTUATION, ","):
            self.advance()
            if not self.at(IDENTIFIER):
                self.fail(INCOMPLETE_FRAGMENT)
            names.append(self.advance().text)
        return names

    # -- stages -----------------------------------------------------------

    def parse_stage(self):
        token = self.peek()
        if token is None:
            self.fail(MISSING_EXPRESSION)
        if token.kind == FENCE:
            self.fail(UNEXPECTED_BACKTICK)
        if token.kind != KEYWORD or token.text not in STAGE_KEYWORDS:
            self.fail(INCOMPLETE_FRAGMENT)
        start = token.span[0]
        name = self.advance().text
        handler = {
            "where": self._stage_where,
            "project": self._stage_project,
            "extend": self._stage_extend,
            "summarize": self._stage_summarize,
            "sort": self._stage_sort,
            "order": self._stage_sort,
            "top": self._stage_top,
            "take": self._stage_take,
            "limit": self._stage_take,
            "count": self._stage_count,
            "distinct": self._stage_distinct,
            "join": self._stage_join,
            "union": self._stage_union,
        }[name]
        stage = handler()
        end = self.tokens[self.pos - 1].span[1]
        return _with_span(stage, (start, end))

    def _stage_where(self):
        predicate = self.parse_expression()
        return ast.WhereStage(predicate=predicate)

    def _stage_project(self):
        return ast.ProjectStage(items=tuple(self._projection_items(require_expr=False)))

    def _stage_extend(self):
        return ast.ExtendStage(assignments=tuple(self._projection_items(require_expr=True)))

    def _projection_items(self, require_expr: bool) -> list[ast.ProjectItem]:
        items = []
        while True:
            token = self.peek()
            if token is None or token.kind != IDENTIFIER:
                self.fail(COLUMN_NAME_EXPECTED)
            name_token = self.advance()
            expr = None
            if self.at(OPERATOR, "="):
                self.advance()
                expr = self.parse_expression()
            elif require_expr:
                self.fail("Expected: =", CATEGORY_OTHER)
            items.append(
                ast.ProjectItem(name=name_token.text, expr=expr, span=name_token.span)
            )
            if self.at(PUNCTUATION, ","):
                self.advance()
                continue
            if self.at(IDENTIFIER):
                self.fail(EXPECTED_COMMA)
            return items

    def _stage_summarize(self):
        aggregates: list[ast.AggregateSpec] = []
        if not self.at_keyword("by"):  # "summarize by A, B" groups without aggregating
            aggregates.append(self._aggregate_spec())
            while self.at(PUNCTUATION, ","):
                self.advance()
                aggregates.append(self._aggregate_spec())
        by: list[ast.ColumnRef] = []
        if self.at_keyword("by"):
            self.advance()
            by.extend(self._column_list())
        return ast.SummarizeStage(aggregates=tuple(aggregates), by=tuple(by))

    def _aggregate_spec(self) -> ast.AggregateSpec:
        token = self.peek()
        if token is None or token.kind not in (IDENTIFIER, KEYWORD):
            self.fail(MISSING_EXPRESSION)
        alias = None
        if (
            token.kind == IDENTIFIER
            and self.peek(1) is not None
            and self.peek(1).kind == OPERATOR
            and self.peek(1).text == "="
        ):
            alias = self.advance().text
            self.advance()
            token = self.peek()
            if token is None or token.kind not in (IDENTIFIER, KEYWORD):
                self.fail(MISSING_EXPRESSION)
        func_token = self.advance()
        self.expect_punct("(", EXPECTED_LPAREN)
        args: list = []
        if not self.at(PUNCTUATION, ")"):
            args.append(self.parse_expression())
            while self.at(PUNCTUATION, ","):
                self.advance()
                args.append(self.parse_expression())
        self.expect_punct(")", EXPECTED_RPAREN)
        return ast.AggregateSpec(
            func=func_token.text, args=tuple(args), alias=alias, span=func_token.span
        )

    def _column_list(self) -> list[ast.ColumnRef]:
        columns = []
        while True:
            token = self.peek()
            if token is None or token.kind != IDENTIFIER:
                self.fail(COLUMN_NAME_EXPECTED)
            token = self.advance()
            columns.append(ast.ColumnRef(name=token.text, span=token.span))
            if self.at(PUNCTUATION, ","):
                self.advance()
                continue
            if self.at(IDENTIFIER):
                self.fail(EXPECTED_COMMA)
            return columns

    def _stage_sort(self):
        if not self.at_keyword("by"):
            self.fail(INCOMPLETE_FRAGMENT)
        self.advance()
        keys = [self._sort_key()]
        while self.at(PUNCTUATION, ","):
            self.advance()
            keys.append(self._sort_key())
        return ast.SortStage(keys=tuple(keys))

    def _sort_key(self) -> ast.SortKey:
        token = self.peek()
        if token is None or token.kind != IDENTIFIER:
            self.fail(COLUMN_NAME_EXPECTED)
        token = self.advance()
        ascending = None
        if self.at_keyword("asc", "desc"):
            ascending = self.advance().text == "asc"
        return ast.SortKey(
            column=ast.ColumnRef(name=token.text, span=token.span),
            ascending=ascending,
            span=token.span,
        )

    def _stage_top(self):
        if not self.at(NUMBER):
            self.fail(MISSING_EXPRESSION)
        count_token = self.advance()
        if not self.at_keyword("by"):
            self.fail(INCOMPLETE_FRAGMENT)
        self.advance()
        keys = [self._sort_key()]
        while self.at(PUNCTUATION, ","):
            self.advance()
            keys.append(self._sort_key())
        return ast.TopStage(count=int(count_token.text), keys=tuple(keys))

    def _stage_take(self):
        if not self.at(NUMBER):
            self.fail(MISSING_EXPRESSION)
        return ast.TakeStage(count=int(self.advance().text))

    def _stage_count(self):
        return ast.CountStage()

    def _stage_distinct(self):
        if self.at(PUNCTUATION, "*"):
            self.advance()
            return ast.DistinctStage(star=True)
        return ast.DistinctStage(columns=tuple(self._column_list()))

    def _stage_join(self):
        join_kind = "inner"
        if self.at_keyword("kind"):
            self.advance()
            if not self.at(OPERATOR, "="):
                self.fail("Expected: =", CATEGORY_OTHER)
            self.advance()
            token = self.peek()
            if token is None or token.kind not in (IDENTIFIER, KEYWORD):
                self.fail(INCOMPLETE_FRAGMENT)
            join_kind = self.advance().text
        self.expect_punct("(", EXPECTED_LPAREN)
        right = self.parse_query(top_level=False)
        self.expect_punct(")", EXPECTED_RPAREN)
        if not self.at_keyword("on"):
            self.fail(INCOMPLETE_FRAGMENT)
        self.advance()
        conditions = [self._join_condition()]
        while self.at(PUNCTUATION, ","):
            self.advance()
            conditions.append(self._join_condition())
        return ast.JoinStage(right=right, on=tuple(conditions), join_kind=join_kind)

    def _join_condition(self) -> ast.JoinCondition:
        token = self.peek()
        if token is None:
            self.fail(COLUMN_NAME_EXPECTED)
        if token.kind == IDENTIFIER and token.text in ("$left", "$right"):
            return self._qualified_join_condition()
        if token.kind != IDENTIFIER:
            self.fail(COLUMN_NAME_EXPECTED)
        token = self.advance()
        return ast.JoinCondition(left=token.text, right=token.text, span=token.span)

    def _qualified_join_condition(self) -> ast.JoinCondition:
        start = self._here()[0]
        left = self._qualified_column("$left")
        if not self.at(OPERATOR, "=="):
            self.fail("Expected: ==", CATEGORY_OTHER)
        self.advance()
        right = self._qualified_column("$right")
        end = self.tokens[self.pos - 1].span[1]
        return ast.JoinCondition(left=left, right=right, qualified=True, span=(start, end))

    def _qualified_column(self, side: str) -> str:
        token = self.peek()
        if token is None or token.kind != IDENTIFIER or token.text != side:
            self.fail(COLUMN_NAME_EXPECTED)
        self.advance()
        self.expect_punct(".", COLUMN_NAME_EXPECTED)
        token = self.peek()
        if token is None or token.kind != IDENTIFIER:
            self.fail(COLUMN_NAME_EXPECTED)
        return self.advance().text

    def _stage_union(self):
        return ast.UnionStage(tables=tuple(self._table_name_list()))

    # -- expressions --------------------------------------------------------

    def parse_expression(self):
        return self._parse_or()

    def _parse_or(self):
        start = self._here()[0]
        operands = [self._parse_and()]
        while self.at_keyword("or"):
            self.advance()
            operands.append(self._parse_and())
        if len(operands) == 1:
            return operands[0]
        end = self.tokens[self.pos - 1].span[1]
        return ast.BoolOp(op="or", operands=tuple(operands), span=(start, end))

    def _parse_and(self):
        start = self._here()[0]
        operands = [self._parse_not()]
        while self.at_keyword("and"):
            self.advance()
            operands.append(self._parse_not())
        if len(operands) == 1:
            return operands[0]
        end = self.tokens[self.pos - 1].span[1]
        return ast.BoolOp(op="and", operands=tuple(operands), span=(start, end))

    def _parse_not(self):
        if self.at_keyword("not"):
            start = self.advance().span[0]
            self.expect_punct("(", EXPECTED_LPAREN)
            inner = self.parse_expression()
            close = self.expect_punct(")", EXPECTED_RPAREN)
            return ast.NotExpr(operand=inner, span=(start, close.span[1]))
        return self._parse_comparison()

    def _parse_comparison(self):
        start = self._here()[0]
        left = self._parse_additive()
        token = self.peek()
        if token is None:
            return left
        if token.kind == OPERATOR and token.text in COMPARISON_OPERATORS:
            op = self.advance().text
            right = self._parse_additive()
            end = self.tokens[self.pos - 1].span[1]
            return ast.Comparison(op=op, left=left, right=right, span=(start, end))
        if token.kind == KEYWORD and token.text in WORD_COMPARISONS:
            op = self.advance().text
            right = self._parse_additive()
            end = self.tokens[self.pos - 1].span[1]
            return ast.Comparison(op=op, left=left, right=right, span=(start, end))
        if token.kind == KEYWORD and token.text == "matches":
            self.advance()
            if not self.at_keyword("regex"):
                self.fail(INCOMPLETE_FRAGMENT)
            self.advance()
            right = self._parse_additive()
            end = self.tokens[self.pos - 1].span[1]
            return ast.Comparison(op="matches regex", left=left, right=right, span=(start, end))
        if token.kind == KEYWORD and token.text == "between":
            self.advance()
            self.expect_punct("(", EXPECTED_LPAREN)
            low = self._parse_additive()
            if not self.at(PUNCTUATION, ".."):
                self.fail("Expected: ..", CATEGORY_OTHER)
            self.advance()
            high = self._parse_additive()
            close = self.expect_punct(")", EXPECTED_RPAREN)
            return ast.BetweenPredicate(operand=left, low=low, high=high, span=(start, close.span[1]))
        if token.kind == KEYWORD and token.text in LIST_OPERATORS:
            op = self.advance().text
            self.expect_punct("(", EXPECTED_LPAREN)
            items = [self.parse_expression()]
            while self.at(PUNCTUATION, ","):
                self.advance()
                items.append(self.parse_expression())
            close = self.expect_punct(")", EXPECTED_RPAREN)
            return ast.ListPredicate(op=op, operand=left, items=tuple(items), span=(start, close.span[1]))
        return left

    def _parse_additive(self):
        start = self._here()[0]
        left = self._parse_primary()
        while self.at(OPERATOR, "+") or self.at(OPERATOR, "-"):
            op = self.advance().text
            right = self._parse_primary()
            end = self.tokens[self.pos - 1].span[1]
            left = ast.BinaryOp(op=op, left=left, right=right, span=(start, end))
        return left

    def _parse_primary(self):
        token = self.peek()
        if token is None:
            self.fail(MISSING_EXPRESSION)
        if token.kind == FENCE:
            self.fail(UNEXPECTED_BACKTICK)
        if token.kind == PUNCTUATION and token.text == "(":
            self.advance()
            inner = self.parse_expression()
            self.expect_punct(")", EXPECTED_RPAREN)
            return inner
        if token.kind == PUNCTUATION and token.text == "*":
            self.advance()
            return ast.Star(span=token.span)
        if token.kind == OPERATOR and token.text == "-":
            self.advance()
            operand = self._parse_primary()
            return ast.UnaryOp(op="-", operand=operand, span=token.span)
        if token.kind == STRING:
            self.advance()
            return ast.Literal(kind="string", value=_string_value(token.text), span=token.span)
        if token.kind == NUMBER:
            self.advance()
            return ast.Literal(kind="number", value=_canonical_number(token.text), span=token.span)
        if token.kind == TIMESPAN:
            self.advance()
            return ast.Literal(kind="timespan", value=token.text.lower(), span=token.span)
        if token.kind == DATETIME:
            self.advance()
            value = normalize_datetime_text(lexer.datetime_payload(token.text))
            return ast.Literal(kind="datetime", value=value, span=token.span)
        if token.kind == KEYWORD and token.text in ("true", "false"):
            self.advance()
            return ast.Literal(kind="bool", value=token.text, span=token.span)
        if token.kind in (IDENTIFIER, KEYWORD):
            follows_paren = (
                self.peek(1) is not None
                and self.peek(1).kind == PUNCTUATION
                and self.peek(1).text == "("
            )
            if follows_paren and (token.kind == IDENTIFIER or token.text in INFIX_ONLY_OPERATORS or token.text == "count"):
                name_token = self.advance()
                self.advance()  # consume "("
                args: list = []
                if not self.at(PUNCTUATION, ")"):
                    args.append(self.parse_expression())
                    while self.at(PUNCTUATION, ","):
                        self.advance()
                        args.append(self.parse_expression())
                close = self.expect_punct(")", EXPECTED_RPAREN)
                return ast.FuncCall(
                    name=name_token.text,
                    args=tuple(args),
                    span=(name_token.span[0], close.span[1]),
                )
            if token.kind == IDENTIFIER:
                self.advance()
                return ast.ColumnRef(name=token.text, span=token.span)
        self.fail(MISSING_EXPRESSION)


def _with_span(stage, span: tuple[int, int]):
    return dataclasses.replace(stage, span=span)


def _collect_stage_sources(stage, into: list[str]) -> None:
    if isinstance(stage, ast.JoinStage):
        into.extend(stage.right.sources)
    elif isinstance(stage, ast.UnionStage):
        into.extend(stage.tables)


def _string_value(text: str) -> str:
    body = text[1:-1]
    out: list[str] = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            nxt = body[i + 1]
            out.append({"n": "\n", "t": "\t", "r": "\r"}.get(nxt, nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _canonical_number(text: str) -> str:
    if "." in text:
        value = float(text)
        if value.is_integer():
            return str(int(value))
        return repr(value)
    return str(int(text))


def normalize_datetime_text(text: str) -> str:
    """Normalize datetime literal text to an ISO-8601-style form.

    Space-separated date/time becomes 'T'-separated; a missing time part
    becomes midnight; a missing zone designator becomes 'Z'.
    """
    cleaned = text.strip()
    if " " in cleaned:
        date_part, _, time_part = cleaned.partition(" ")
        cleaned = f"{date_part}T{time_part.strip()}"
    if "T" not in cleaned:
        cleaned = cleaned + "T00:00:00"
    if not cleaned.endswith("Z") and "+" not in cleaned[10:]:
        cleaned = cleaned + "Z"
    return cleaned
